"""Data models for fractal_geom package."""
from typing import List, Optional, Tuple
import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator
from .constants import (
    DEFAULT_LOG_LEVEL, DEFAULT_REPETITIONS, DEFAULT_THREADS, DEFAULT_TOL,
    RANDOM_SEED, SCALING_QUANTITIES,
)
from .errors import ParameterError
from .validators import (
    check_coordinates, normalize_command, normalize_kind, normalize_log_level,
    validate_seed,
)


class PointSet(BaseModel):
    """Finite point set in R^d with a provenance label."""
    dim: int = Field(ge=1)
    points: List[Tuple[float, ...]] = Field(default_factory=list)
    label: str = ""
    _coords: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_points(self) -> "PointSet":
        for p in self.points:
            if len(p) != self.dim:
                raise ValueError(f"point {p} does not have dimension {self.dim}")
            check_coordinates(p)
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate points")
        return self

    @classmethod
    def from_array(cls, coords, label: str = "") -> "PointSet":
        arr = np.asarray(coords, dtype=float)
        if arr.ndim != 2:
            raise ParameterError(f"expected an (n, d) array, got shape {arr.shape}")
        return cls(dim=arr.shape[1], points=[tuple(row) for row in arr.tolist()], label=label)

    @property
    def coords(self) -> np.ndarray:
        if self._coords is None:
            self._coords = np.asarray(self.points, dtype=float).reshape(-1, self.dim)
        return self._coords

    def subset(self, indices, label: Optional[str] = None) -> "PointSet":
        return PointSet(dim=self.dim, points=[self.points[i] for i in indices],
                        label=self.label if label is None else label)

    def __len__(self) -> int:
        return len(self.points)


class GeneratorSpec(BaseModel):
    """Which synthetic family to generate and its size parameters."""
    kind: str
    k: Optional[int] = Field(None, description="Recursion level for carpet/cantor")
    d: Optional[int] = Field(None, description="Ambient dimension")
    m: Optional[int] = Field(None, description="Grid side length")
    n: Optional[int] = Field(None, description="Number of points")
    seed: int = RANDOM_SEED
    scale: float = Field(default=1.0, gt=0)

    @field_validator("kind")
    @classmethod
    def normalize_kind_field(cls, v: str) -> str:
        return normalize_kind(v)

    @model_validator(mode="after")
    def _check_parameters(self) -> "GeneratorSpec":
        required = {
            "carpet": ("k",), "cantor": ("k", "d"), "grid": ("m", "d"),
            "line": ("n",), "random": ("n", "d"), "carpet-subsample": ("k", "n"),
        }[self.kind]
        for name in required:
            value = getattr(self, name)
            if value is None or value < 1:
                raise ValueError(f"{self.kind} needs {name} >= 1, got {value}")
        if self.kind == "carpet-subsample" and self.n > 8 ** self.k:
            raise ValueError(f"cannot draw {self.n} points from a carpet of {8 ** self.k}")
        if not validate_seed(self.seed):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        return self


class SolverConfig(BaseModel):
    """Resolved run settings (settings files, environment, defaults)."""
    tol: float = Field(default=DEFAULT_TOL, gt=0)
    threads: int = Field(default=DEFAULT_THREADS, ge=1)
    seed: int = RANDOM_SEED
    logLevel: str = DEFAULT_LOG_LEVEL
    outDir: Optional[str] = None

    @field_validator("logLevel")
    @classmethod
    def normalize_log_level_field(cls, v: str) -> str:
        return normalize_log_level(v)


class ExperimentConfig(BaseModel):
    """One harness run: command, instance family and algorithm parameters."""
    command: str
    generator: GeneratorSpec
    eps: Optional[float] = Field(None, gt=0)
    ell: Optional[int] = Field(None, ge=1)
    k: Optional[int] = Field(None, ge=0)
    seed: int = RANDOM_SEED
    repetitions: int = Field(default=DEFAULT_REPETITIONS, ge=1)
    out: Optional[str] = None
    tol: float = Field(default=DEFAULT_TOL, gt=0)
    threads: int = Field(default=DEFAULT_THREADS, ge=1)
    sizes: Optional[List[int]] = None
    quantity: str = "pathwidth"
    eps_list: Optional[List[float]] = None
    trace: bool = False

    @field_validator("command")
    @classmethod
    def normalize_command_field(cls, v: str) -> str:
        return normalize_command(v)

    @field_validator("seed")
    @classmethod
    def check_seed(cls, v: int) -> int:
        if not validate_seed(v):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {v}")
        return v

    @field_validator("quantity")
    @classmethod
    def check_quantity(cls, v: str) -> str:
        if v not in SCALING_QUANTITIES:
            raise ValueError(f"quantity must be one of {SCALING_QUANTITIES}")
        return v
