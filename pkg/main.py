"""
Isomonodromy reduction verification service
Main application entry point
"""
import logging
from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api import router
from app.config import settings
from app.exceptions import setup_exception_handlers
from app.golden import golden_names
from app.lax_models import MODEL_NAMES, builtin_model

logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(f"{settings.api_title} starting up...")
    for name in MODEL_NAMES:
        builtin_model(name)
    displays = golden_names()
    if not displays:
        logger.warning(f"No golden files under {settings.golden_dir}; verification checks will error")
    logger.info(f"Max threads: {settings.max_threads}, {len(displays)} golden displays")
    yield
    logger.info(f"{settings.api_title} shutting down...")


def create_app() -> FastAPI:
    """Build the application: CORS, exception handlers and the router"""
    application = FastAPI(
        title=settings.api_title,
        description=settings.api_description,
        version=settings.api_version,
        docs_url="/docs",
        redoc_url="/redoc",
        lifespan=lifespan
    )
    application.add_middleware(
        CORSMiddleware,
        allow_origins=settings.allow_origins,
        allow_credentials=settings.allow_credentials,
        allow_methods=settings.allow_methods,
        allow_headers=settings.allow_headers,
    )
    setup_exception_handlers(application)
    application.include_router(router)
    return application


app = create_app()


if __name__ == "__main__":
    uvicorn.run("main:app", host="0.0.0.0", port=8000, reload=False, log_level=settings.log_level.lower())
