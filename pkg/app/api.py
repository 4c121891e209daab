"""
FastAPI routes and endpoint handlers
"""
import logging
from typing import Any, Dict

from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool

from .algebra import free_symbols, to_text
from .config import settings
from .exceptions import IsoreduceError
from .lax_models import builtin_model, model_to_dict
from .models import SELECTORS, HealthResponse, ModelDump, ParseRequest, ParseResponse, SuiteReport
from .parser import parse_expression
from .suite import run_suite

logger = logging.getLogger(__name__)
router = APIRouter()


@router.get("/health_check", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    """
    Health check endpoint to verify API status

    Returns:
        HealthResponse: API status information
    """
    try:
        return HealthResponse(status="ok", message="API is running")
    except Exception as e:
        logger.error(f"Health check failed: {str(e)}")
        raise HTTPException(status_code=500, detail="Health check failed")


@router.post("/parse", response_model=ParseResponse)
async def parse(request: ParseRequest) -> ParseResponse:
    """
    Parse an expression into its canonical reduced form

    Args:
        request: ParseRequest containing the expression text

    Returns:
        ParseResponse: canonical text and the symbols involved
    """
    value = parse_expression(request.expression)
    return ParseResponse(canonical=to_text(value), symbols=sorted(free_symbols(value)))


@router.get("/models/{name}", response_model=ModelDump)
async def get_model(name: str) -> ModelDump:
    """
    Dump a built-in model (Hamiltonians, Lax matrices, assumptions)

    Raises:
        UnknownModel: mapped to 404 by the exception handlers
    """
    return ModelDump(**model_to_dict(builtin_model(name)))


@router.post("/verify/{selector}", response_model=SuiteReport)
async def verify(selector: str) -> SuiteReport:
    """
    Run the verification checks of one selector

    Args:
        selector: one of all, pIV, gar92, gar5232, quasi, genus, numeric

    Returns:
        SuiteReport: per-check verdicts ordered by check id

    Raises:
        HTTPException: unknown selector
    """
    if selector not in SELECTORS:
        raise HTTPException(status_code=404, detail=f"unknown selector '{selector}'")
    try:
        logger.info(f"Verification requested for '{selector}'")
        return await run_in_threadpool(run_suite, selector)
    except IsoreduceError:
        raise
    except Exception as e:
        logger.error(f"Unexpected error verifying {selector}: {str(e)}")
        raise HTTPException(status_code=500, detail="Internal server error")


@router.get("/")
async def root() -> Dict[str, Any]:
    """
    Root endpoint with API information
    """
    return {
        "message": settings.api_title,
        "version": settings.api_version,
        "endpoints": {
            "health": "/health_check",
            "parse": "/parse",
            "models": "/models/{name}",
            "verify": "/verify/{selector}",
            "docs": "/docs",
        },
    }
