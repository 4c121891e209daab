"""
Custom exceptions and error handlers
"""
from fastapi import FastAPI, Request, HTTPException
from fastapi.responses import JSONResponse
from fastapi.exceptions import RequestValidationError
import logging

logger = logging.getLogger(__name__)


class IsoreduceError(Exception):
    """Base class of every domain error raised by the engine"""
    pass


# exact arithmetic

class DivisionByZero(IsoreduceError):
    """Exception raised when dividing by the zero polynomial"""
    pass

class NonExactDivision(IsoreduceError):
    """Exception raised when a polynomial quotient leaves a remainder"""
    pass

class UnknownSymbol(IsoreduceError):
    """Exception raised when a name is not in the symbol registry"""

    def __init__(self, name: str):
        super().__init__(f"unknown symbol '{name}'")
        self.name = name

class DenominatorVanishesIdentically(IsoreduceError):
    """Exception raised when a substitution sends a denominator to zero"""
    pass

class DegreeZero(IsoreduceError):
    """Exception raised when a discriminant is requested in a symbol the polynomial does not contain"""
    pass


# series engine

class IncompatibleExpansionPoints(IsoreduceError):
    """Exception raised when series about different points are combined"""
    pass

class ZeroLeadingCoefficient(IsoreduceError):
    """Exception raised when a series with no known nonzero term is inverted"""
    pass

class InsufficientOrder(IsoreduceError):
    """Exception raised when a coefficient beyond the truncation order is requested"""
    pass

class DivergentLimit(IsoreduceError):
    """Exception raised when a series keeps a nonzero negative-exponent term"""

    def __init__(self, exponent, coefficient):
        super().__init__(f"divergent limit: exponent {exponent} has coefficient {coefficient.as_expr()}")
        self.exponent = exponent
        self.coefficient = coefficient


# models and tests

class UnknownModel(IsoreduceError):
    """Exception raised when a model or family name is not recognized"""
    pass

class L12IdenticallyZero(IsoreduceError):
    """Exception raised when the (1,2) Lax entry vanishes and cannot be eliminated"""
    pass

class EmptyRange(IsoreduceError):
    """Exception raised when the exponent search window is empty"""
    pass

class NoBalance(IsoreduceError):
    """Exception raised when a balance search finds no singular balance"""
    pass

class InconsistentResonance(IsoreduceError):
    """Exception raised when a resonance condition is violated"""

    def __init__(self, order: int, obstruction):
        super().__init__(f"inconsistent resonance at order {order}: {obstruction.as_expr()}")
        self.order = order
        self.obstruction = obstruction

class Inconsistent(IsoreduceError):
    """Exception raised when parameter derivatives cannot satisfy a coefficient relation"""

    def __init__(self, order, relation):
        super().__init__(f"inconsistent relation at exponent {order}: {relation.as_expr()} = 0")
        self.order = order
        self.relation = relation

class NotTriangular(IsoreduceError):
    """Exception raised when a flow system cannot be eliminated step by step"""
    pass

class GradingError(IsoreduceError):
    """Exception raised when a reduced potential has hbar-degree above two or hbar in its denominator"""
    pass


# curves

class SampleOnDiscriminant(IsoreduceError):
    """Exception raised when a genus sample lies on the discriminant or a forbidden locus"""
    pass

class SquarefreeFailure(IsoreduceError):
    """Exception raised when a curve polynomial has a repeated factor"""
    pass


# numerics

class NearPole(IsoreduceError):
    """Exception raised when a denominator is numerically zero"""
    pass

class StepCollapse(IsoreduceError):
    """Exception raised when the adaptive step size collapses"""

    def __init__(self, t: float):
        super().__init__(f"step size collapsed at t = {t!r}")
        self.t = t

class DomainViolation(IsoreduceError):
    """Exception raised when a numeric state leaves the domain of the system"""
    pass

class InsufficientWindow(IsoreduceError):
    """Exception raised when a branch fit has too few usable samples"""
    pass


# parser

class ExpressionSyntaxError(IsoreduceError):
    """Exception raised when expression text cannot be parsed"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _error_response(status_code: int, error: str, exc: Exception, kind: str) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content={
            "error": error,
            "message": str(exc),
            "type": kind
        }
    )


def setup_exception_handlers(app: FastAPI):
    """Setup custom exception handlers for the FastAPI app"""

    @app.exception_handler(ExpressionSyntaxError)
    async def syntax_exception_handler(request: Request, exc: ExpressionSyntaxError):
        logger.error(f"Expression syntax error: {str(exc)}")
        return _error_response(400, "Syntax Error", exc, "syntax_error")

    @app.exception_handler(UnknownSymbol)
    async def unknown_symbol_exception_handler(request: Request, exc: UnknownSymbol):
        logger.error(f"Unknown symbol: {exc.name}")
        return _error_response(400, "Unknown Symbol", exc, "unknown_symbol")

    @app.exception_handler(UnknownModel)
    async def unknown_model_exception_handler(request: Request, exc: UnknownModel):
        logger.error(f"Unknown model: {str(exc)}")
        return _error_response(404, "Unknown Model", exc, "unknown_model")

    @app.exception_handler(IsoreduceError)
    async def computation_exception_handler(request: Request, exc: IsoreduceError):
        logger.error(f"Computation error ({type(exc).__name__}): {str(exc)}")
        return _error_response(422, "Computation Error", exc, "computation_error")

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError):
        logger.error(f"Validation error: {str(exc)}")
        return JSONResponse(
            status_code=400,
            content={
                "error": "Validation Error",
                "message": "Invalid request data",
                "details": exc.errors(),
                "type": "validation_error"
            }
        )

    @app.exception_handler(HTTPException)
    async def http_exception_handler(request: Request, exc: HTTPException):
        logger.error(f"HTTP exception: {exc.status_code} - {exc.detail}")
        return JSONResponse(
            status_code=exc.status_code,
            content={
                "error": f"HTTP {exc.status_code}",
                "message": exc.detail,
                "type": "http_error"
            }
        )

    @app.exception_handler(Exception)
    async def general_exception_handler(request: Request, exc: Exception):
        logger.error(f"Unexpected error: {str(exc)}", exc_info=True)
        return JSONResponse(
            status_code=500,
            content={
                "error": "Internal Server Error",
                "message": "An unexpected error occurred",
                "type": "internal_error"
            }
        )
