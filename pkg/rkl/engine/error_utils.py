"""JSON error responses printed by the CLI on stderr

Every failure, whether an RKLError from the engine or an unexpected
exception, is rendered through create_error_response so the stderr payload
has one shape.
"""

from typing import Any, Dict

from rkl.engine.exceptions import RKLError
from rkl.engine.models import ErrorCode, ErrorResponse


def get_version() -> str:
    """Package version, imported lazily (rkl imports the engine)"""
    try:
        from rkl import __version__

        return __version__
    except ImportError:
        return "unknown"


def create_error_response(
    error: str,
    error_code: str,
    details: str | None = None,
    suggested_action: str | None = None,
    context: Dict[str, Any] | None = None,
) -> str:
    """Serialize one ErrorResponse

    Args:
        error: One-line description shown to the user
        error_code: ErrorCode value
        details: Longer explanation, if any
        suggested_action: What to change before re-running
        context: JSON-safe values describing the failing input

    Returns:
        Indented JSON
    """
    response = ErrorResponse(
        error=error,
        error_code=error_code,
        details=details,
        suggested_action=suggested_action,
        context=context,
        tool_version=get_version(),
    )
    return response.model_dump_json(indent=2)


def from_exception(exc: RKLError) -> str:
    """Render an engine exception as a standardized error response"""
    context = {k: v for k, v in exc.details.items() if _is_jsonable(v)}
    return create_error_response(
        error=exc.message,
        error_code=exc.error_code,
        details="; ".join(exc.suggestions[1:]) or None,
        suggested_action=exc.suggestions[0] if exc.suggestions else None,
        context=context or None,
    )


def internal_error(exc: Exception, command: str) -> str:
    """Unexpected exception escaping a command"""
    return create_error_response(
        error=f"Unexpected failure in '{command}'",
        error_code=ErrorCode.INTERNAL_ERROR.value,
        details=f"{type(exc).__name__}: {exc}",
        suggested_action="Re-run with --log-level DEBUG and report the output",
        context={"command": command},
    )


def _is_jsonable(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool, list, tuple, dict)) or value is None
