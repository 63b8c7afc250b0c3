"""Runtime settings read from the environment

The CLI loads a .env file (python-dotenv) before calling load_settings(), so
values may come from the shell or from the file.

Environment variables:
  RKL_THREADS      Cap on worker threads for ensembles (default: 1)
  RKL_LOG_LEVEL    Logging level name (default: WARNING)
  RKL_OUTPUT_DIR   Default directory for measure/figure output (default: results)
"""

import logging
import os
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, field_validator

from rkl.engine.exceptions import ConfigValidationError

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(asctime)s] %(levelname)s: %(message)s"
LOG_DATEFMT = "%H:%M:%S %d.%m.%Y"


class RuntimeSettings(BaseModel):
    """Process-wide settings"""

    threads: int = Field(default=1, ge=1)
    log_level: str = "WARNING"
    output_dir: Path = Path("results")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{value}'")
        return level


def load_settings() -> RuntimeSettings:
    """Build RuntimeSettings from RKL_* environment variables"""
    raw = {
        "threads": os.getenv("RKL_THREADS", "1"),
        "log_level": os.getenv("RKL_LOG_LEVEL", "WARNING"),
        "output_dir": os.getenv("RKL_OUTPUT_DIR", "results"),
    }
    try:
        return RuntimeSettings(**raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = str(first["loc"][0]) if first.get("loc") else None
        raise ConfigValidationError(
            message=f"Invalid environment setting: {first['msg']}",
            field=f"RKL_{field.upper()}" if field else None,
            value=raw.get(field) if field else None,
        )


def configure_logging(level: str) -> None:
    """Configure root logging on stderr"""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
    )
    logger.debug(f"Logging configured at {level.upper()}")
