"""
Pydantic models for verification reports and request/response validation
"""
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from .lax_models import MODEL_NAMES

SCHEMA_VERSION = "1.0"

SELECTORS = ("all", "pIV", "gar92", "gar5232", "quasi", "genus", "numeric")

CheckStatus = Literal["pass", "fail", "divergent", "inconsistent", "error"]


class VerificationReport(BaseModel):
    """Outcome of one check of the verification matrix"""
    check_id: str = Field(..., description="Stable identifier '<selector>.<check-name>'")
    status: CheckStatus = Field(..., description="Verdict; expected-negative checks pass when the predicted failure occurs")
    expected_negative: bool = Field(False, description="Whether the check asserts a predicted failure")
    detail: str = Field("", description="Residual text, valuation or mismatch summary")
    mismatches: List[Dict[str, str]] = Field(default_factory=list, description="Golden coefficients that differ")
    assumptions: List[str] = Field(default_factory=list, description="Nonvanishing assumptions used by the check")
    wall_time: float = Field(0.0, description="Seconds spent on the check")

    @property
    def passed(self) -> bool:
        return self.status == "pass"


class SuiteReport(BaseModel):
    """Versioned report of one suite run"""
    schema_version: str = Field(SCHEMA_VERSION, description="Report schema version")
    selector: str = Field(..., description="Selector the suite was run with")
    checks: List[VerificationReport] = Field(default_factory=list, description="Reports ordered by check id")

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


class ParseRequest(BaseModel):
    """Request model for expression parsing"""
    expression: str = Field(..., description="Rational expression in the registered symbols")

    @field_validator("expression")
    def validate_expression(cls, v):
        if not v.strip():
            raise ValueError("expression must not be empty")
        return v


class ParseResponse(BaseModel):
    """Response model for a parsed expression"""
    canonical: str = Field(..., description="Canonical text of the reduced rational function")
    symbols: List[str] = Field(..., description="Symbols occurring in the expression")


class ModelDump(BaseModel):
    """Response model for a built-in isomonodromy model"""
    name: str = Field(..., description="Model name")
    times: List[str] = Field(..., description="Deformation times")
    coordinates: List[str] = Field(..., description="Canonical coordinates")
    momenta: List[str] = Field(..., description="Canonical momenta")
    constants: List[str] = Field(default_factory=list, description="Symbolic model constants")
    hamiltonians: List[str] = Field(..., description="Hamiltonian per time")
    assumptions: List[str] = Field(default_factory=list, description="Nonvanishing assumptions")
    lax: Optional[List[List[str]]] = Field(None, description="Lax matrix L")
    deformations: Optional[List[List[List[str]]]] = Field(None, description="Deformation matrices M_j per time")
    potential: Optional[str] = Field(None, description="Schrodinger potential when given in closed form")
    deformation_coefficients: Optional[List[str]] = Field(None, description="Closed-form deformation coefficients A_j")

    @field_validator("name")
    def validate_name(cls, v):
        if v not in MODEL_NAMES:
            raise ValueError(f"unknown model '{v}'")
        return v


class HealthResponse(BaseModel):
    """Response model for health check"""
    status: str = Field(..., description="API status")
    message: Optional[str] = Field(None, description="Additional status information")


class ErrorResponse(BaseModel):
    """Response model for errors"""
    error: str = Field(..., description="Error type")
    message: str = Field(..., description="Error message")
    type: Optional[str] = Field(None, description="Exception class")
