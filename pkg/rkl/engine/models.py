"""Pydantic Data Models for the rkl engine

Type-safe configuration, trace and report models shared by the solvers,
the predictors, the experiment runner and the CLI.
"""

from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

# Enumerations


class Termination(str, Enum):
    """Why a solver run stopped"""

    CONVERGED = "Converged"
    STAGNATED = "Stagnated"
    BREAKDOWN = "Breakdown"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"


class Regime(str, Enum):
    """Spectral regime that selects the closed-form factor"""

    SYMMETRIC_DEFINITE = "SymmetricDefinite"
    SYMMETRIC_INDEFINITE = "SymmetricIndefinite"
    SKEW_M = "SkewM"


class MapKind(str, Enum):
    """Vector-dependent residual maps"""

    I2 = "i2"
    PI = "pi"
    PSI = "psi"
    UPSILON = "upsilon"


class SolverKind(str, Enum):
    """Iterative methods available to solve/measure"""

    GMRES1 = "gmres1"
    RAA1 = "raa1"
    STATIONARY = "stationary"


# Solver Models


class SolveConfig(BaseModel):
    """Stopping rules and recording options for one solver run"""

    tol: float = Field(default=1e-30, gt=0, description="Residual-norm stopping threshold")
    max_iters: int = Field(default=1000, ge=1, description="Maximum number of steps")
    record_vectors: bool = Field(default=False, description="Store every residual vector")
    stagnation_eps: float = Field(
        default=1e-14, ge=0, description="Relative step length below which GMRES(1) stagnates"
    )
    divergence_threshold: float = Field(
        default=1e150, gt=0, description="Residual norm treated as divergence"
    )
    track_drift: bool = Field(
        default=False, description="Recompute ||A x_k - b|| each step (GMRES(1) only)"
    )

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "tol": 1e-30,
                "max_iters": 1000,
                "record_vectors": False,
                "stagnation_eps": 1e-14,
            }
        },
    )


class IterationTrace(BaseModel):
    """Per-step record of one solver run

    residual_norms[k] is ||r_k|| for k = 0..K. rho_series[k - 1] is
    rho_k = ||r_k||^(1/k), so rho_series is one shorter than residual_norms.
    alphas[k] is the step coefficient used to go from step k to k + 1,
    or None when the step has none (plain fixed-point steps).
    """

    method: SolverKind
    residual_norms: List[float]
    log_residual_norms: List[float]
    rho_series: List[float]
    alphas: List[Optional[float]]
    termination: Termination
    residual_vectors: Optional[List[np.ndarray]] = None
    true_residual_drift: Optional[float] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def iterations(self) -> int:
        """Number of steps taken"""
        return len(self.residual_norms) - 1

    def rho(self, k: int) -> float:
        """Root-convergence estimate rho_k for k >= 1"""
        if k < 1 or k > self.iterations:
            raise IndexError(f"rho_k defined for 1 <= k <= {self.iterations}, got {k}")
        return self.rho_series[k - 1]

    def step_ratios(self) -> List[float]:
        """||r_k|| / ||r_{k-1}|| for k = 1..K"""
        norms = self.residual_norms
        return [
            norms[k] / norms[k - 1] if norms[k - 1] > 0 else 0.0 for k in range(1, len(norms))
        ]

    def normalized_rho(self, k: int) -> float:
        """(||r_k|| / ||r_0||)^(1/k), insensitive to the scale of r_0"""
        if k < 1 or k > self.iterations:
            raise IndexError(f"rho_k defined for 1 <= k <= {self.iterations}, got {k}")
        return float(np.exp((self.log_residual_norms[k] - self.log_residual_norms[0]) / k))

    def to_summary(self) -> Dict[str, Any]:
        """JSON-friendly summary without the vectors"""
        return {
            "method": self.method.value,
            "termination": self.termination.value,
            "iterations": self.iterations,
            "initial_residual": self.residual_norms[0],
            "final_residual": self.residual_norms[-1],
            "final_rho": self.rho_series[-1] if self.rho_series else None,
            "true_residual_drift": self.true_residual_drift,
        }


# Theory Models


class PairFactor(BaseModel):
    """Pairwise factor for distinct eigenvalues (a_i, a_j)"""

    i: int
    j: int
    a_i: float
    a_j: float
    value: float = Field(description="Pairwise convergence factor or map eigenvalue")
    eps_sq: Optional[float] = Field(default=None, description="Maximising epsilon squared")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {"i": 0, "j": 2, "a_i": 1.0, "a_j": 3.0, "value": 0.5, "eps_sq": 0.3333}
        }
    )


class FactorReport(BaseModel):
    """Worst-case GMRES(1) factor for a symmetric spectrum"""

    worst_case_rho: float = Field(ge=0, le=1)
    regime: Regime
    per_pair_table: List[PairFactor] = Field(default_factory=list)
    attaining_pairs: List[Tuple[int, int]] = Field(
        default_factory=list, description="Pairs that attain factor one (indefinite A)"
    )
    eigenvalues: List[float] = Field(default_factory=list)
    restricted_to: Optional[List[int]] = None

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "worst_case_rho": 0.5,
                "regime": "SymmetricDefinite",
                "per_pair_table": [
                    {"i": 0, "j": 2, "a_i": 1.0, "a_j": 3.0, "value": 0.5, "eps_sq": 0.3333}
                ],
                "eigenvalues": [1.0, 2.0, 3.0],
            }
        }
    )


class SkewFactorReport(BaseModel):
    """Factors for M = I - A skew-symmetric"""

    rho_star: float = Field(description="m*/sqrt(1 + m*^2)")
    rho_star_raa1: float = Field(description="m*/(1 + m*^2)^(1/4)")
    m_star_upper: float
    m_star_lower: float
    alpha_range: Tuple[float, float]
    moduli: List[float] = Field(default_factory=list)
    subset: Optional[List[int]] = None
    subset_rho: Optional[float] = None
    positive_definite_bound: float = Field(
        description="sqrt(1 - lambda_min(S) lambda_min(sym A)) with S = (A^-1 + A^-T)/2"
    )

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "rho_star": 0.7071,
                "rho_star_raa1": 0.8409,
                "m_star_upper": 1.0,
                "m_star_lower": 0.25,
                "alpha_range": [0.5, 0.9412],
                "subset": [1, 2, 3],
                "subset_rho": 0.6,
                "positive_definite_bound": 0.7071,
            }
        }
    )


class NepEigenpair(BaseModel):
    """Eigenpair of a vector-dependent map, map(u) u = value * u"""

    vector: np.ndarray
    value: float
    map_kind: MapKind
    i1: int
    i2: int
    eps: float
    spread: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True)


class SandwichReport(BaseModel):
    """Monte-Carlo bracket of max ||Pi(v) v|| / ||v|| for definite A"""

    samples: int
    max_sampled: float
    attained: float = Field(description="Ratio at the constructed maximising eigenvector")
    bound: float = Field(description="(rho*)^2")


# Exact Models


class ConjectureCheck(BaseModel):
    """Exact comparison of ||Upsilon(v) v|| / ||v|| against Lambda*"""

    case: str
    ratio_sq: Fraction
    lambda_star: Fraction
    lambda_star_sq: Fraction
    violated: bool
    applicable: bool = True

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def ratio(self) -> float:
        return float(self.ratio_sq) ** 0.5

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return "NOT-APPLICABLE"
        return "VIOLATED" if self.violated else "NOT-VIOLATED"


class CounterexampleIntermediates(BaseModel):
    """Exact intermediate values of one Upsilon cycle on (A_1, v_1)"""

    alpha_v: Fraction
    u: Tuple[Fraction, ...]
    alpha_u: Fraction
    w: Tuple[Fraction, ...]
    alpha_u_matches_printed: bool
    w_matches_printed: Tuple[bool, ...]

    model_config = ConfigDict(arbitrary_types_allowed=True)


class ParityCertificate(BaseModel):
    """Integer identity check for 16^2 ||w||^2 = ||v_1||^2"""

    applicable: bool
    lhs: int = 0
    rhs: int = 0
    certified: bool = False
    printed_lhs: int = 0
    printed_rhs: int = 0
    printed_certified: bool = False


# Experiment Models


class EnsembleConfig(BaseModel):
    """Random initial-guess ensemble; field names match the key=value config file"""

    matrix: str = Field(description="Builtin name (A1..A4, CA1..CA3) or matrix file path")
    trials: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    solver: SolverKind = SolverKind.GMRES1
    tol: float = Field(default=1e-30, gt=0)
    max_iters: int = Field(default=2000, ge=1)
    mask: List[int] = Field(default_factory=list, description="x0 components forced to zero")
    block_init: List[int] = Field(
        default_factory=list, description="Schur blocks that x0 is projected onto"
    )
    transient_cutoff: int = Field(default=20, ge=1)
    bound_slack: float = Field(default=1e-3, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "matrix": "A1",
                "trials": 1000,
                "seed": 2024,
                "solver": "gmres1",
                "tol": 1e-30,
                "max_iters": 2000,
                "mask": [],
                "block_init": [],
            }
        }
    )

    @field_validator("mask", "block_init")
    @classmethod
    def _unique_indices(cls, value: List[int]) -> List[int]:
        if any(i < 0 for i in value):
            raise ValueError("indices must be non-negative")
        return sorted(set(value))


class EnsembleResult(BaseModel):
    """Outcome of run_ensemble"""

    config: EnsembleConfig
    theoretical_rho: float
    max_observed_rho_tail: float
    traces: List[IterationTrace]
    bounded: bool = Field(description="Regime has a proven factor below one")
    bound_violations: int = 0

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def terminations(self) -> List[Termination]:
        return [t.termination for t in self.traces]


class StructuredRunResult(BaseModel):
    """Measured rho_k for one x0 next to its predicted factor"""

    trace: IterationTrace
    predicted_rho: float
    measured_tail: float


# Error Models


class ErrorCode(str, Enum):
    """Standardized error codes for all commands"""

    # Input errors (exit 2)
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    NON_FINITE = "NON_FINITE"
    NOT_SYMMETRIC = "NOT_SYMMETRIC"
    NOT_SKEW_SYMMETRIC = "NOT_SKEW_SYMMETRIC"
    BLOCK_INDEX_OUT_OF_RANGE = "BLOCK_INDEX_OUT_OF_RANGE"
    UNKNOWN_MATRIX = "UNKNOWN_MATRIX"
    MATRIX_PARSE_ERROR = "MATRIX_PARSE_ERROR"
    VALIDATION_ERROR = "VALIDATION_ERROR"

    # Numerical errors (exit 3)
    ZERO_RESIDUAL = "ZERO_RESIDUAL"
    SINGULAR_DIRECTION = "SINGULAR_DIRECTION"
    ZERO_EIGENVALUE = "ZERO_EIGENVALUE"
    SIGN_CONDITION_VIOLATED = "SIGN_CONDITION_VIOLATED"
    UNSUPPORTED_STRUCTURE = "UNSUPPORTED_STRUCTURE"
    BREAKDOWN = "BREAKDOWN"
    DIVERGED = "DIVERGED"
    INTERMEDIATE_BREAKDOWN = "INTERMEDIATE_BREAKDOWN"
    RATIONAL_OVERFLOW = "RATIONAL_OVERFLOW"

    # Internal
    INTERNAL_ERROR = "INTERNAL_ERROR"


class ErrorResponse(BaseModel):
    """Standardized error response for all commands"""

    error: str = Field(description="Human-readable error message")
    error_code: str | None = Field(
        default=None, description="Machine-readable error code from ErrorCode enum"
    )
    details: str | None = Field(default=None, description="Additional error details")
    suggested_action: str | None = Field(default=None, description="How to fix the error")
    context: Dict[str, Any] | None = Field(default=None, description="Error context for debugging")
    tool_version: str = Field(default="unknown", description="rkl version that produced this error")
    timestamp: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(),
        description="Error timestamp (ISO 8601 UTC)",
    )

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "error": "Unknown matrix 'A9'",
                "error_code": "UNKNOWN_MATRIX",
                "details": "Builtins: A1, A2, A3, A4, CA1, CA2, CA3",
                "suggested_action": "Pass a builtin name or a path to a matrix file",
                "context": {"name": "A9"},
                "tool_version": "0.3.0",
                "timestamp": "2025-10-25T14:30:00.000Z",
            }
        }
    )
