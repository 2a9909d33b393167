"""Primitive geometry: points, segments, balls, axis boxes and incidence predicates.

All predicates work in floating point with an absolute tolerance (``DEFAULT_TOL``).
Scalar forms take the dataclasses below; the batch forms take numpy arrays and are
what the separator search uses.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Tuple, Union
import numpy as np
from .constants import DEFAULT_TOL
from .errors import DimensionMismatchError, ParameterError
from .validators import check_coordinates, check_same_dimension

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]


class Norm(str, Enum):
    L2 = "L2"
    L1 = "L1"


class Side(str, Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    CROSSING = "crossing"


# Integer codes used by the batch predicates.
INSIDE, OUTSIDE, CROSSING = 0, 1, 2


def as_point(coords: Sequence[float]) -> Point:
    check_coordinates(coords)
    return tuple(float(c) for c in coords)


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        object.__setattr__(self, "a", as_point(self.a))
        object.__setattr__(self, "b", as_point(self.b))
        check_same_dimension(self.a, self.b)

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def midpoint(self) -> Point:
        return tuple((x + y) / 2.0 for x, y in zip(self.a, self.b))

    @property
    def length(self) -> float:
        return segment_length(self)


@dataclass(frozen=True)
class Ball:
    """Closed ball; the same record describes the sphere bounding it."""
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius >= 0 and np.isfinite(self.radius)):
            raise ParameterError(f"radius must be a finite nonnegative number, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


Sphere = Ball


@dataclass(frozen=True)
class AxisBox:
    """Product of per-axis intervals with open/closed flags."""
    lower: Point
    upper: Point
    lower_closed: Tuple[bool, ...] = field(default=())
    upper_closed: Tuple[bool, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "lower", as_point(self.lower))
        object.__setattr__(self, "upper", as_point(self.upper))
        d = check_same_dimension(self.lower, self.upper)
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ParameterError(f"lower bound exceeds upper bound in {self.lower}, {self.upper}")
        if not self.lower_closed:
            object.__setattr__(self, "lower_closed", (True,) * d)
        if not self.upper_closed:
            object.__setattr__(self, "upper_closed", (True,) * d)

    @classmethod
    def cube(cls, lower: Sequence[float], size: float) -> "AxisBox":
        lo = as_point(lower)
        return cls(lo, tuple(x + size for x in lo))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def side_lengths(self) -> Tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    @property
    def size(self) -> float:
        return max(self.side_lengths)

    @property
    def is_cube(self) -> bool:
        sides = self.side_lengths
        return max(sides) - min(sides) <= DEFAULT_TOL

    @property
    def center(self) -> Point:
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.lower, self.upper))

    def contains(self, p: Sequence[float]) -> bool:
        check_same_dimension(self.lower, p)
        for x, lo, hi, lc, uc in zip(p, self.lower, self.upper, self.lower_closed, self.upper_closed):
            if x < lo or (x == lo and not lc):
                return False
            if x > hi or (x == hi and not uc):
                return False
        return True


def distance(p: Sequence[float], q: Sequence[float], norm: Union[Norm, str] = Norm.L2) -> float:
    """Distance between two points under the L2 or L1 norm."""
    check_same_dimension(p, q)
    try:
        norm = Norm(norm)
    except ValueError:
        raise ParameterError(f"unsupported norm {norm!r}") from None
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    if norm is Norm.L1:
        return float(np.abs(diff).sum())
    return float(np.sqrt(np.dot(diff, diff)))


def segment_length(s: Segment) -> float:
    return distance(s.a, s.b)


def circumball(s: Segment) -> Ball:
    """Smallest ball containing the segment."""
    return Ball(s.midpoint, segment_length(s) / 2.0)


def point_to_segment_distance(p: Sequence[float], s: Segment) -> float:
    check_same_dimension(p, s.a)
    dmin, _ = segment_distance_range(np.asarray(p, float), np.asarray([s.a]), np.asarray([s.b]))
    return float(dmin[0])


def segment_distance_range(center: np.ndarray, starts: np.ndarray,
                           ends: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Closest and farthest distance from ``center`` to each segment.

    Works on a batch of segments given as (m, d) arrays of endpoints; the
    closest point comes from clamping the projection parameter to [0, 1].
    """
    v = ends - starts
    w = center - starts
    vv = np.einsum("ij,ij->i", v, v)
    t = np.divide(np.einsum("ij,ij->i", w, v), vv, out=np.zeros_like(vv), where=vv > 0)
    t = np.clip(t, 0.0, 1.0)
    closest = starts + t[:, None] * v
    dmin = np.linalg.norm(closest - center, axis=1)
    dmax = np.maximum(np.linalg.norm(starts - center, axis=1), np.linalg.norm(ends - center, axis=1))
    return dmin, dmax


def segments_intersect_sphere(center: np.ndarray, radius: float, starts: np.ndarray,
                              ends: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    dmin, dmax = segment_distance_range(np.asarray(center, float), starts, ends)
    return (dmin <= radius + tol) & (dmax >= radius - tol)


def sphere_segment_intersects(c: Sphere, s: Segment, tol: float = DEFAULT_TOL) -> bool:
    """True iff the closed segment meets the sphere surface within ``tol``."""
    check_same_dimension(c.center, s.a)
    hit = segments_intersect_sphere(np.asarray(c.center), c.radius,
                                    np.asarray([s.a]), np.asarray([s.b]), tol)
    return bool(hit[0])


def balls_side(center: np.ndarray, radius: float, centers: np.ndarray, radii: np.ndarray,
               tol: float = DEFAULT_TOL) -> np.ndarray:
    """Batch form of :func:`ball_side` returning INSIDE/OUTSIDE/CROSSING codes."""
    dist = np.linalg.norm(centers - np.asarray(center, float), axis=1)
    codes = np.full(len(dist), CROSSING, dtype=np.int8)
    codes[dist + radii < radius - tol] = INSIDE
    codes[dist - radii > radius + tol] = OUTSIDE
    return codes


def ball_side(c: Sphere, b: Ball, tol: float = DEFAULT_TOL) -> Side:
    check_same_dimension(c.center, b.center)
    code = balls_side(np.asarray(c.center), c.radius, np.asarray([b.center]),
                      np.asarray([b.radius]), tol)[0]
    return (Side.INSIDE, Side.OUTSIDE, Side.CROSSING)[int(code)]


def l1_diamond_radius(s: Segment) -> float:
    """Half the L1 distance from the midpoint to an endpoint."""
    return distance(s.midpoint, s.a, Norm.L1) / 2.0


def l1_diamond_contains(s: Segment, p: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
    check_same_dimension(s.a, p)
    return distance(s.midpoint, p, Norm.L1) <= l1_diamond_radius(s) + tol


def l1_diamonds_overlap(s1: Segment, s2: Segment, tol: float = DEFAULT_TOL) -> bool:
    """True iff the open interiors of the two edge diamonds intersect.

    Two L1 balls have intersecting interiors exactly when the L1 distance of
    their centers is below the sum of their radii.
    """
    check_same_dimension(s1.a, s2.a)
    r1, r2 = l1_diamond_radius(s1), l1_diamond_radius(s2)
    if r1 <= tol or r2 <= tol:
        return False
    return distance(s1.midpoint, s2.midpoint, Norm.L1) < r1 + r2 - tol


def box_distance(b1: AxisBox, b2: AxisBox) -> float:
    """Euclidean distance between two boxes; zero when they meet."""
    if b1.dim != b2.dim:
        raise DimensionMismatchError(f"dimension mismatch: {b1.dim} vs {b2.dim}")
    gap = np.maximum(0.0, np.maximum(np.subtract(b2.lower, b1.upper), np.subtract(b1.lower, b2.upper)))
    return float(np.linalg.norm(gap))
