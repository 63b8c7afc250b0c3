"""Version Synchronization Tests

Tests to ensure the package version matches pyproject.toml and is included in error responses.
"""

import json
import re
from pathlib import Path

from rkl import __version__
from rkl.engine.error_utils import create_error_response
from rkl.engine.models import ErrorResponse


def _pyproject_version() -> str:
    text = (Path(__file__).parent.parent.parent / "pyproject.toml").read_text(encoding="utf-8")
    match = re.search(r'^version\s*=\s*"([^"]+)"', text, re.MULTILINE)
    assert match, "pyproject.toml must declare a version"
    return match.group(1)


def test_version_synchronization():
    """Verify __version__ matches pyproject.toml"""
    manifest_version = _pyproject_version()
    assert (
        manifest_version == __version__
    ), f"Version mismatch: __init__.py={__version__}, pyproject.toml={manifest_version}"


def test_version_in_error_response():
    """Verify error responses carry the tool version"""
    error = ErrorResponse(error="Test error", details="Test details", tool_version=__version__)

    assert error.tool_version == __version__
    assert error.timestamp is not None


def test_error_response_model_dump():
    """Verify the version survives JSON serialization"""
    data = json.loads(create_error_response(error="Test", error_code="BREAKDOWN"))

    assert data["tool_version"] == __version__
    assert "timestamp" in data
