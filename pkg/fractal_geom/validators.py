"""Validation functions for fractal_geom package."""
import math
from typing import Optional, Sequence
from .constants import COMMANDS, DEFAULT_LOG_LEVEL, GENERATOR_KINDS, MAX_SEED
from .errors import DimensionMismatchError, ParameterError

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def check_same_dimension(p: Sequence[float], q: Sequence[float]) -> int:
    """Return the shared dimension of two coordinate sequences.

    Raises:
        DimensionMismatchError: if the lengths differ
    """
    if len(p) != len(q):
        raise DimensionMismatchError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return len(p)


def check_coordinates(coords: Sequence[float]) -> None:
    if len(coords) < 1:
        raise ParameterError("a point needs at least one coordinate")
    if not all(math.isfinite(float(c)) for c in coords):
        raise ParameterError(f"non-finite coordinate in {tuple(coords)}")


def require_positive(name: str, value: float) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(f"{name} must be positive, got {value}")
    return float(value)


def require_range(name: str, value: int, low: int, high: Optional[int] = None) -> int:
    """Check low <= value <= high (high open when None)."""
    if value < low or (high is not None and value > high):
        bound = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ParameterError(f"{name} must be in {bound}, got {value}")
    return int(value)


def validate_seed(seed: Optional[int]) -> bool:
    return isinstance(seed, int) and 0 <= seed <= MAX_SEED


def normalize_kind(kind: Optional[str]) -> str:
    normalized = (kind or "").strip().lower().replace("_", "-")
    if normalized not in GENERATOR_KINDS:
        raise ParameterError(f"unknown generator kind {kind!r}")
    return normalized


def normalize_command(command: Optional[str]) -> str:
    normalized = (command or "").strip().lower()
    if normalized not in COMMANDS:
        raise ParameterError(f"unknown command {command!r}")
    return normalized


def normalize_log_level(level: Optional[str]) -> str:
    """Normalize log level name, falling back to the default."""
    normalized = (level or "").strip().upper()
    return normalized if normalized in _LOG_LEVELS else DEFAULT_LOG_LEVEL
