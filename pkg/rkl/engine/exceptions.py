"""Structured exception hierarchy for the rkl engine.

Every numerical or input failure raised by the engine carries an error code,
a details dictionary and a list of suggestions, so the CLI can render a
consistent error response and choose an exit status.

Example Usage:
    try:
        x, trace = gmres1(A, b, x0, cfg)
    except Breakdown as e:
        logger.warning(f"{e} after {e.trace.iterations} steps")
        return create_error_response(
            error=e.message,
            error_code=e.error_code,
            suggested_action=e.suggestions[0],
        )
"""

from typing import Any, Dict, List


class RKLError(Exception):
    """Base exception for all rkl operations.

    Attributes:
        message: Human-readable error message
        error_code: Machine-readable error code (e.g., "ZERO_RESIDUAL")
        details: Optional dictionary with additional error context
        suggestions: List of actionable suggestions for the user
    """

    #: Exit status the CLI uses for this family of errors
    exit_code = 2

    def __init__(
        self,
        message: str,
        error_code: str,
        details: Dict[str, Any] | None = None,
        suggestions: List[str] | None = None,
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.suggestions = suggestions or []
        super().__init__(message)

    def __str__(self) -> str:
        """Return formatted error message with code."""
        return f"[{self.error_code}] {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for JSON serialization."""
        return {
            "error": self.message,
            "error_code": self.error_code,
            "details": self.details,
            "suggestions": self.suggestions,
        }


class NumericalError(RKLError):
    """Base for failures of the mathematics itself rather than of the input.

    The CLI maps these to exit status 3.
    """

    exit_code = 3


# ===== Input errors =====


class DimensionMismatch(RKLError):
    """Operands have incompatible shapes.

    Example:
        raise DimensionMismatch("matvec", expected=(3, 3), actual=(4,))
    """

    def __init__(self, operation: str, expected: Any, actual: Any):
        super().__init__(
            message=f"Dimension mismatch in {operation}: expected {expected}, got {actual}",
            error_code="DIMENSION_MISMATCH",
            details={"operation": operation, "expected": str(expected), "actual": str(actual)},
            suggestions=["Check that the matrix is square and the vectors have length n"],
        )


class NonFiniteEntries(RKLError):
    """A vector or matrix contains NaN or Inf."""

    def __init__(self, name: str):
        super().__init__(
            message=f"'{name}' contains non-finite entries (NaN or Inf)",
            error_code="NON_FINITE",
            details={"name": name},
            suggestions=["Inspect the input file for overflowing or missing entries"],
        )


class NotSymmetric(RKLError):
    """Matrix is not symmetric within tolerance."""

    def __init__(self, asymmetry: float, tol: float):
        super().__init__(
            message=f"Matrix is not symmetric: max |A - A^T| = {asymmetry:.3e} > {tol:.1e}",
            error_code="NOT_SYMMETRIC",
            details={"asymmetry": asymmetry, "tolerance": tol},
            suggestions=["Symmetric-regime predictors require A = A^T"],
        )


class NotSkewSymmetric(RKLError):
    """Matrix is not skew-symmetric within tolerance."""

    def __init__(self, asymmetry: float, tol: float):
        super().__init__(
            message=f"Matrix is not skew-symmetric: max |M + M^T| = {asymmetry:.3e} > {tol:.1e}",
            error_code="NOT_SKEW_SYMMETRIC",
            details={"asymmetry": asymmetry, "tolerance": tol},
            suggestions=["The skew regime requires M = I - A with M = -M^T"],
        )


class BlockIndexError(RKLError):
    """Schur block or eigenvalue group index out of range."""

    def __init__(self, index: int, count: int, kind: str = "block"):
        super().__init__(
            message=f"{kind.capitalize()} index {index} out of range (0..{count - 1})",
            error_code="BLOCK_INDEX_OUT_OF_RANGE",
            details={"index": index, "count": count, "kind": kind},
            suggestions=[f"Use 'rkl predict' to list the available {kind} indices"],
        )


class UnknownMatrix(RKLError):
    """Matrix name is neither a builtin nor an existing file."""

    def __init__(self, name: str, available: List[str]):
        super().__init__(
            message=f"Unknown matrix '{name}'",
            error_code="UNKNOWN_MATRIX",
            details={"name": name, "available": available},
            suggestions=[f"Builtins: {', '.join(available)}", "Or pass a path to a matrix file"],
        )


class MatrixParseError(RKLError):
    """Matrix or vector text could not be parsed."""

    def __init__(self, source: str, reason: str):
        super().__init__(
            message=f"Cannot parse '{source}': {reason}",
            error_code="MATRIX_PARSE_ERROR",
            details={"source": source, "reason": reason},
            suggestions=[
                "First line holds n, then n lines of n entries",
                "Entries may be decimals (0.25) or fractions (1/4)",
            ],
        )


class ConfigValidationError(RKLError):
    """Configuration or argument validation failed.

    Example:
        raise ConfigValidationError(
            message="Unknown config key",
            field="trails",
            value="10",
            valid_values=["trials", "seed", "matrix"],
        )
    """

    def __init__(
        self,
        message: str,
        field: str | None = None,
        value: Any | None = None,
        valid_values: List[str] | None = None,
    ):
        details: Dict[str, Any] = {}
        if field:
            details["field"] = field
        if value is not None:
            details["provided_value"] = value
        if valid_values:
            details["valid_values"] = valid_values

        suggestions = []
        if valid_values:
            suggestions.append(f"Valid values for '{field}': {', '.join(valid_values)}")

        super().__init__(
            message=message,
            error_code="VALIDATION_ERROR",
            details=details,
            suggestions=suggestions,
        )


# ===== Numerical errors =====


class ZeroResidual(NumericalError):
    """Vector is numerically zero where a direction is required."""

    def __init__(self, norm: float):
        super().__init__(
            message=f"Vector is zero (norm {norm:.3e})",
            error_code="ZERO_RESIDUAL",
            details={"norm": norm},
            suggestions=["The residual already vanished; the iteration has converged"],
        )


class SingularDirection(NumericalError):
    """A v = 0 for nonzero v, so alpha(v) is undefined."""

    def __init__(self, norm_v: float):
        super().__init__(
            message="A*v vanishes for a nonzero v; alpha(v) is undefined",
            error_code="SINGULAR_DIRECTION",
            details={"norm_v": norm_v},
            suggestions=["A is singular along v; check the matrix for a zero eigenvalue"],
        )


class ZeroEigenvalue(NumericalError):
    """Symmetric A has a zero eigenvalue."""

    def __init__(self, eigenvalue: float):
        super().__init__(
            message=f"A is singular (eigenvalue {eigenvalue:.3e})",
            error_code="ZERO_EIGENVALUE",
            details={"eigenvalue": eigenvalue},
            suggestions=["Convergence factors are defined for invertible A only"],
        )


class SignConditionViolated(NumericalError):
    """The requested map has no eigenpair of the requested form."""

    def __init__(self, map_kind: str, a_i: float, a_j: float, reason: str):
        super().__init__(
            message=f"{map_kind} has no two-mode eigenpair for ({a_i:g}, {a_j:g}): {reason}",
            error_code="SIGN_CONDITION_VIOLATED",
            details={"map": map_kind, "a_i": a_i, "a_j": a_j},
            suggestions=["Pick a different eigenvalue pair, or use the pi/upsilon maps"],
        )


class UnsupportedStructure(NumericalError):
    """Matrix is neither symmetric nor of the form I - skew."""

    def __init__(self, operation: str, reason: str = ""):
        super().__init__(
            message=f"{operation} needs symmetric A or skew-symmetric I - A{': ' + reason if reason else ''}",
            error_code="UNSUPPORTED_STRUCTURE",
            details={"operation": operation},
            suggestions=["Only the symmetric and skew-M regimes have closed-form factors"],
        )


class IterationError(NumericalError):
    """Base for solver failures; carries the partial trace."""

    def __init__(self, message: str, error_code: str, trace: Any = None, **kwargs: Any):
        self.trace = trace
        super().__init__(message=message, error_code=error_code, **kwargs)


class Breakdown(IterationError):
    """The step direction vanished while the residual did not."""

    def __init__(self, step: int, reason: str, trace: Any = None):
        super().__init__(
            message=f"Breakdown at step {step}: {reason}",
            error_code="BREAKDOWN",
            trace=trace,
            details={"step": step},
            suggestions=["Check that A is nonsingular on the current residual"],
        )


class Diverged(IterationError):
    """Residual norm exceeded the divergence threshold."""

    def __init__(self, step: int, norm: float, threshold: float, trace: Any = None):
        super().__init__(
            message=f"Diverged at step {step}: ||r|| = {norm:.3e} > {threshold:.1e}",
            error_code="DIVERGED",
            trace=trace,
            details={"step": step, "norm": norm, "threshold": threshold},
            suggestions=["The stationary iteration diverges when rho(I - A) > 1"],
        )


class IntermediateBreakdown(NumericalError):
    """An intermediate vector of a composite map vanished."""

    def __init__(self, stage: str):
        super().__init__(
            message=f"Intermediate vector vanished at {stage}; the composite map is undefined",
            error_code="INTERMEDIATE_BREAKDOWN",
            details={"stage": stage},
            suggestions=["v is (close to) an eigenvector; the map terminates early"],
        )


class RationalOverflow(NumericalError):
    """Exact rational does not fit a double."""

    def __init__(self, value: str):
        super().__init__(
            message=f"Rational {value} overflows a 64-bit float",
            error_code="RATIONAL_OVERFLOW",
            details={"value": value},
            suggestions=["Keep the value in exact form (use --exact-print)"],
        )
