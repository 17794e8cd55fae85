"""Settings read from the environment.

The CLI entry point calls ``load_dotenv()`` first, so a ``.env`` file in the
working directory can provide the same variables.
"""

import logging
import math
import os

from tautline.errors import ParameterError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_LOG_LEVEL = "INFO"

TOL_VARIABLE = "TAUTLINE_TOL"
LOG_LEVEL_VARIABLE = "TAUTLINE_LOG_LEVEL"

_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


def default_tolerance() -> float:
    """Returns the global absolute tolerance (``TAUTLINE_TOL`` or 1e-9)."""
    raw = os.getenv(TOL_VARIABLE)
    if raw is None or not raw.strip():
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ParameterError(f"{TOL_VARIABLE}={raw!r} is not a number") from None
    if not math.isfinite(tol) or tol <= 0:
        raise ParameterError(f"{TOL_VARIABLE} must be a positive finite number, got {raw!r}")
    return tol


def resolve_tolerance(tol=None) -> float:
    """Returns ``tol`` if given (validated), else the configured default."""
    if tol is None:
        return default_tolerance()
    tol = float(tol)
    if not math.isfinite(tol) or tol <= 0:
        raise ParameterError(f"tolerance must be positive and finite, got {tol!r}")
    return tol


def log_level() -> str:
    level = os.getenv(LOG_LEVEL_VARIABLE, DEFAULT_LOG_LEVEL).strip().upper()
    if level not in _LEVELS:
        logger.warning(f"Unknown {LOG_LEVEL_VARIABLE}={level!r}, using {DEFAULT_LOG_LEVEL}")
        return DEFAULT_LOG_LEVEL
    return level
