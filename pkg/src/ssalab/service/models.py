"""Pydantic request models for the HTTP service.

Responses are emitted through the canonical serializer (fixed key order,
17-significant-digit floats) rather than pydantic, so that replays are
byte-identical; the response schemas are documented in the README.
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class MatrixPayload(BaseModel):
    dim: int = Field(ge=1)
    entries: List[List[float]]

    @model_validator(mode="after")
    def _square(self):
        if len(self.entries) != self.dim or any(len(r) != self.dim for r in self.entries):
            raise ValueError(f"entries must be a {self.dim}x{self.dim} array")
        return self


class FunctionChoice(BaseModel):
    """Either a catalog spec string or an expression with its domain."""

    function: Optional[str] = None
    expr: Optional[str] = None
    domain: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.function is None) == (self.expr is None):
            raise ValueError("provide exactly one of 'function' or 'expr'")
        if self.expr is not None and self.domain is None:
            raise ValueError("'expr' requires 'domain', e.g. \"[0,inf)\"")
        return self


class CheckRequest(FunctionChoice):
    matrix: MatrixPayload
    partition: Tuple[int, int, int]
    form: Literal["compressed", "projected"] = "compressed"
    tol_rel: float = Field(default=1e-8, gt=0)
    diagnostics: bool = True
    ci: bool = False


class ScanRequest(FunctionChoice):
    kind: Literal["generic_spd", "arrow_abcd", "a23_zero", "log_equality",
                  "trivi_block", "near_singular"] = "generic_spd"
    dims: Tuple[int, int, int]
    trials: int = Field(default=1000, ge=1)
    seed: int = 0
    eps: float = Field(default=1e-3, gt=0)
    form: Literal["compressed", "projected"] = "compressed"
    tol_rel: float = Field(default=1e-8, gt=0)
    ci: bool = False


class SearchRequest(FunctionChoice):
    dims: Tuple[int, int, int]
    iters: int = Field(default=10000, ge=1)
    seed: int = 0
    step0: float = Field(default=0.5, gt=0)
    kind: Literal["generic_spd", "arrow_abcd"] = "generic_spd"
    eps: float = Field(default=1e-3, gt=0)
    start_matrix: Optional[MatrixPayload] = None
    tol_rel: float = Field(default=1e-8, gt=0)
    include_matrix: bool = True
    ci: bool = False


class MonotoneRequest(FunctionChoice):
    neg_derivative: bool = True
    interval: Tuple[float, float] = (1e-3, 1e3)
    order: int = Field(default=5, ge=2)
    trials: int = Field(default=500, ge=1)
    seed: int = 0
    ci: bool = False


class EqualityRequest(BaseModel):
    matrix: MatrixPayload
    partition: Tuple[int, int, int]
    tol: float = Field(default=1e-8, gt=0)
    ci: bool = False


class RepresentRequest(BaseModel):
    check: Literal["power", "kappa"]
    x: float
    t: Optional[float] = None
    variant: Literal["resolvent", "log"] = "resolvent"
    ci: bool = False

    @model_validator(mode="after")
    def _power_needs_t(self):
        if self.check == "power" and self.t is None:
            raise ValueError("check='power' requires 't'")
        return self
