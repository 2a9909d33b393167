"""Sphere separators for families of balls or segments, plus thickness measurement."""
from __future__ import annotations
import itertools, json, logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Union
import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from .constants import (
    COVER_CONSTANT_BASE, COVER_CONSTANT_PLANE, DEDUP_DECIMALS, DEFAULT_TOL,
    THICKNESS_PAIR_BUDGET,
)
from .errors import NoBalancedCandidateError, ParameterError
from .geometry import Ball, Point, Segment, Sphere
from .models import PointSet
from .validators import require_range

logger = logging.getLogger(__name__)

_CHUNK_ELEMENTS = 4_000_000


def cover_constant(d: int) -> int:
    """Balls of radius 1/2 needed to cover a unit ball: 7 in the plane, 5^d otherwise."""
    return COVER_CONSTANT_PLANE if d == 2 else COVER_CONSTANT_BASE ** d


def balance_fraction(d: int) -> float:
    return 1.0 / (cover_constant(d) + 1)


@dataclass
class ThicknessReport:
    lam: float
    kappa_hat: int
    witness_point: Optional[Point] = None


@dataclass
class SphereSeparator:
    sphere: Sphere
    inside_count: int
    outside_count: int
    crossing: List[int]
    balance: float
    inside: List[int] = field(default_factory=list)
    outside: List[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"center": list(self.sphere.center), "radius": self.sphere.radius,
                "inside": self.inside_count, "outside": self.outside_count,
                "crossing": list(self.crossing), "balance": self.balance}


class SphereBatch(NamedTuple):
    """Candidate spheres as parallel arrays."""
    centers: np.ndarray
    radii: np.ndarray

    def to_spheres(self) -> List[Sphere]:
        return [Ball(tuple(c), float(r)) for c, r in zip(self.centers, self.radii)]

    def __len__(self) -> int:
        return len(self.radii)


def as_batch(candidates: Union[SphereBatch, Sequence[Sphere]]) -> SphereBatch:
    if isinstance(candidates, SphereBatch):
        return candidates
    if not candidates:
        return SphereBatch(np.zeros((0, 0)), np.zeros(0))
    return SphereBatch(np.asarray([c.center for c in candidates], dtype=float),
                       np.asarray([c.radius for c in candidates], dtype=float))


@dataclass
class SeparatorObjects:
    """Balls or segments to separate, with the reference points balance is counted on.

    Ball families count balance on the balls themselves (a crossing ball is on
    neither side). Segment families count it on ``ref_points``, a point being
    inside when it lies in the closed ball.
    """
    kind: str
    starts: np.ndarray
    ends: np.ndarray
    radii: np.ndarray
    ref_points: np.ndarray

    @classmethod
    def from_ball_arrays(cls, centers, radii) -> "SeparatorObjects":
        centers = np.asarray(centers, dtype=float)
        return cls("balls", centers, centers, np.asarray(radii, dtype=float), centers)

    @classmethod
    def from_balls(cls, balls: Sequence[Ball]) -> "SeparatorObjects":
        return cls.from_ball_arrays([b.center for b in balls], [b.radius for b in balls])

    @classmethod
    def from_edges(cls, coords: np.ndarray, edges: Sequence[Sequence[int]],
                   ref_points: Optional[np.ndarray] = None) -> "SeparatorObjects":
        coords = np.asarray(coords, dtype=float)
        e = np.asarray(edges, dtype=int).reshape(-1, 2)
        refs = coords if ref_points is None else np.asarray(ref_points, dtype=float)
        return cls("segments", coords[e[:, 0]], coords[e[:, 1]], np.zeros(len(e)), refs)

    @classmethod
    def from_segments(cls, segments: Sequence[Segment],
                      ref_points: Optional[np.ndarray] = None) -> "SeparatorObjects":
        starts = np.asarray([s.a for s in segments], dtype=float)
        ends = np.asarray([s.b for s in segments], dtype=float)
        if ref_points is None:
            ref_points = np.unique(np.vstack([starts, ends]), axis=0)
        return cls("segments", starts, ends, np.zeros(len(segments)), np.asarray(ref_points, float))

    @property
    def count(self) -> int:
        return len(self.starts)

    @property
    def dim(self) -> int:
        return self.ref_points.shape[1]

    @property
    def total(self) -> int:
        return self.count if self.kind == "balls" else len(self.ref_points)


def _classify(objects: SeparatorObjects, centers: np.ndarray, radii: np.ndarray, tol: float):
    """Return (inside mask over refs, crossing mask over objects) for each candidate."""
    R = radii[:, None]
    if objects.kind == "balls":
        dist = cdist(centers, objects.starts)
        inside = dist + objects.radii < R - tol
        outside = dist - objects.radii > R + tol
        return inside, ~(inside | outside), outside
    v = objects.ends - objects.starts
    vv = np.einsum("ij,ij->i", v, v)
    w = centers[:, None, :] - objects.starts[None, :, :]
    t = np.divide(np.einsum("kmd,md->km", w, v), vv, out=np.zeros(w.shape[:2]), where=vv > 0)
    t = np.clip(t, 0.0, 1.0)
    dmin = np.linalg.norm(w - t[:, :, None] * v[None, :, :], axis=2)
    dmax = np.maximum(np.linalg.norm(w, axis=2),
                      np.linalg.norm(centers[:, None, :] - objects.ends[None, :, :], axis=2))
    crossing = (dmin <= R + tol) & (dmax >= R - tol)
    inside = cdist(centers, objects.ref_points) <= R + tol
    return inside, crossing, ~inside


def _counts(objects: SeparatorObjects, batch: SphereBatch, tol: float):
    K = len(batch)
    width = max(objects.count, 1) * max(objects.dim, 1) + len(objects.ref_points)
    step = max(1, _CHUNK_ELEMENTS // width)
    ins = np.zeros(K, dtype=np.int64)
    outs = np.zeros(K, dtype=np.int64)
    cross = np.zeros(K, dtype=np.int64)
    for lo in range(0, K, step):
        hi = min(K, lo + step)
        inside, crossing, outside = _classify(objects, batch.centers[lo:hi], batch.radii[lo:hi], tol)
        ins[lo:hi] = inside.sum(axis=1)
        outs[lo:hi] = outside.sum(axis=1)
        cross[lo:hi] = crossing.sum(axis=1)
    return ins, outs, cross


def _best_index(mask: np.ndarray, primary: List[np.ndarray], batch: SphereBatch) -> Optional[int]:
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return None
    keys = [batch.centers[idx, j] for j in range(batch.centers.shape[1] - 1, -1, -1)]
    keys.append(batch.radii[idx])
    keys.extend(np.asarray(p)[idx] for p in reversed(primary))
    return int(idx[np.lexsort(keys)[0]])


def _separator_at(objects: SeparatorObjects, center: np.ndarray, radius: float,
                  tol: float) -> SphereSeparator:
    inside, crossing, outside = _classify(objects, center[None, :], np.asarray([radius]), tol)
    inside, crossing, outside = inside[0], crossing[0], outside[0]
    total = objects.total
    n_in, n_out = int(inside.sum()), int(outside.sum())
    return SphereSeparator(
        sphere=Ball(tuple(center), float(radius)), inside_count=n_in, outside_count=n_out,
        crossing=np.flatnonzero(crossing).tolist(),
        balance=max(n_in, n_out) / total if total else 1.0,
        inside=np.flatnonzero(inside).tolist(), outside=np.flatnonzero(outside).tolist())


def find_separator(objects: SeparatorObjects, balance_fraction: float,
                   candidates: Union[SphereBatch, Sequence[Sphere]], tol: float = DEFAULT_TOL,
                   trace: Optional[list] = None, fallback: bool = False) -> SphereSeparator:
    """Pick the balanced candidate crossing the fewest objects.

    Balanced means max(inside, outside) / total <= 1 - balance_fraction; ties
    go to the smaller radius, then the lexicographically smaller center. With
    ``fallback`` the least unbalanced candidate is returned instead of raising.
    """
    if objects.count == 0:
        raise ParameterError("cannot separate an empty family")
    batch = as_batch(candidates)
    if len(batch) == 0:
        raise NoBalancedCandidateError("no candidate spheres given")
    ins, outs, cross = _counts(objects, batch, tol)
    total = objects.total
    balance = np.maximum(ins, outs) / max(total, 1)
    if trace is not None:
        for c, r, a, b, x, bal in zip(batch.centers, batch.radii, ins, outs, cross, balance):
            trace.append({"center": c.tolist(), "radius": float(r), "inside": int(a),
                          "outside": int(b), "crossing": int(x), "balance": float(bal)})
    if total == 1:
        best = _best_index(np.ones(len(batch), dtype=bool), [cross, -ins], batch)
    else:
        nondegenerate = (ins + outs) > 0
        ok = nondegenerate & (balance <= 1.0 - balance_fraction + 1e-12)
        best = _best_index(ok, [cross], batch)
        if best is None and fallback:
            best = _best_index(nondegenerate, [balance, cross], batch)
    if best is None:
        raise NoBalancedCandidateError(
            f"none of {len(batch)} candidates reaches balance {1.0 - balance_fraction:.4f}")
    sep = _separator_at(objects, batch.centers[best], batch.radii[best], tol)
    logger.debug(f"Separator r={sep.sphere.radius:.4g}: in={sep.inside_count} "
                 f"out={sep.outside_count} crossing={len(sep.crossing)} balance={sep.balance:.3f}")
    return sep


def crossing_set(objects: SeparatorObjects, sphere: Sphere, tol: float = DEFAULT_TOL) -> List[int]:
    """Ids of the objects the sphere crosses."""
    _, crossing, _ = _classify(objects, np.asarray([sphere.center], dtype=float),
                               np.asarray([sphere.radius]), tol)
    return np.flatnonzero(crossing[0]).tolist()


def dump_trace(trace: Sequence[dict], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(list(trace), f, indent=2); f.write("\n")


def _circumsphere(pts: np.ndarray, tol: float):
    """Center and radius of the sphere through ``pts`` centered in their affine hull."""
    p0 = pts[0]
    A = pts[1:] - p0
    if np.linalg.matrix_rank(A, tol=tol * max(1.0, float(np.abs(A).max()))) < len(A):
        return None
    rhs = np.einsum("ij,ij->i", A, A)
    lam = np.linalg.solve(2.0 * A @ A.T, rhs)
    center = p0 + A.T @ lam
    return center, float(np.linalg.norm(center - p0))


def candidate_arrays(coords: np.ndarray, max_defining: int, tol: float = DEFAULT_TOL) -> SphereBatch:
    coords = np.asarray(coords, dtype=float)
    n, d = coords.shape
    require_range("max_defining", max_defining, 2, d + 1)
    centers, radii, seen = [], [], set()
    for j in range(2, max_defining + 1):
        for combo in itertools.combinations(range(n), j):
            found = _circumsphere(coords[list(combo)], tol)
            if found is None:
                continue
            c, r = found
            key = tuple(np.round(np.append(c, r), DEDUP_DECIMALS).tolist())
            if key in seen:
                continue
            seen.add(key)
            centers.append(c); radii.append(r)
    if not centers:
        return SphereBatch(np.zeros((0, d)), np.zeros(0))
    return SphereBatch(np.asarray(centers), np.asarray(radii))


def candidate_spheres(P: PointSet, max_defining: int, tol: float = DEFAULT_TOL) -> List[Sphere]:
    """Diameter spheres of all pairs plus circumspheres of up to ``max_defining`` points."""
    return candidate_arrays(P.coords, max_defining, tol).to_spheres()


def sampled_centers(coords: np.ndarray, budget: int) -> np.ndarray:
    """Farthest-point sample of ``budget`` points, plus the centroid."""
    coords = np.asarray(coords, dtype=float)
    centroid = coords.mean(axis=0)
    first = int(np.argmin(np.linalg.norm(coords - centroid, axis=1)))
    chosen = [first]
    gap = np.linalg.norm(coords - coords[first], axis=1)
    while len(chosen) < min(budget, len(coords)):
        nxt = int(np.argmax(gap))
        if gap[nxt] <= 0:
            break
        chosen.append(nxt)
        gap = np.minimum(gap, np.linalg.norm(coords - coords[nxt], axis=1))
    return np.vstack([coords[chosen], centroid[None, :]])


def separator_centers(coords: np.ndarray, max_defining: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Candidate-sphere centers together with the points themselves, deduplicated."""
    coords = np.asarray(coords, dtype=float)
    batch = candidate_arrays(coords, max_defining, tol) if len(coords) >= 2 else None
    stacked = coords if batch is None or len(batch) == 0 else np.vstack([batch.centers, coords])
    _, first = np.unique(np.round(stacked, DEDUP_DECIMALS), axis=0, return_index=True)
    return stacked[np.sort(first)]


def _event_radii(objects: SeparatorObjects, center: np.ndarray) -> np.ndarray:
    if objects.kind == "balls":
        dist = np.linalg.norm(objects.starts - center, axis=1)
        events = np.concatenate([dist + objects.radii, np.maximum(dist - objects.radii, 0.0)])
    else:
        v = objects.ends - objects.starts
        dmin = np.linalg.norm(objects.starts - center, axis=1)
        dmax = np.linalg.norm(objects.ends - center, axis=1)
        vv = np.einsum("ij,ij->i", v, v)
        t = np.divide(np.einsum("ij,ij->i", center - objects.starts, v), vv,
                      out=np.zeros_like(vv), where=vv > 0)
        closest = np.linalg.norm(objects.starts + np.clip(t, 0, 1)[:, None] * v - center, axis=1)
        refs = np.linalg.norm(objects.ref_points - center, axis=1)
        events = np.concatenate([closest, np.maximum(dmin, dmax), refs])
    return np.unique(np.round(events, DEDUP_DECIMALS))


def event_spheres(objects: SeparatorObjects, centers: np.ndarray,
                  max_radii: Optional[int] = None) -> SphereBatch:
    """Every event radius around each center plus one radius inside each gap.

    Between consecutive events the classification is constant, so this is
    exhaustive over the distinct partitions a sphere at that center can make.
    """
    all_centers, all_radii = [], []
    for c in np.asarray(centers, dtype=float):
        events = _event_radii(objects, c)
        gaps = (events[:-1] + events[1:]) / 2.0
        tail = events[-1] * 2.0 + 1.0
        head = [events[0] / 2.0] if events[0] > 0 else []
        radii = np.unique(np.concatenate([head, events, gaps, [tail]]))
        if max_radii is not None and len(radii) > max_radii:
            radii = radii[np.unique(np.linspace(0, len(radii) - 1, max_radii).round().astype(int))]
        all_centers.append(np.repeat(c[None, :], len(radii), axis=0))
        all_radii.append(radii)
    if not all_radii:
        return SphereBatch(np.zeros((0, objects.dim)), np.zeros(0))
    return SphereBatch(np.vstack(all_centers), np.concatenate(all_radii))


def _overlap_midpoints(centers: np.ndarray, radii: np.ndarray, budget: int, tol: float) -> np.ndarray:
    if len(centers) < 2:
        return np.zeros((0, centers.shape[1]))
    reach = 2.0 * float(radii.max()) + tol
    pairs = cKDTree(centers).query_pairs(r=reach, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, centers.shape[1]))
    pairs = pairs[np.lexsort(pairs.T[::-1])]
    out = []
    for i, j in pairs:
        delta = centers[j] - centers[i]
        d = float(np.linalg.norm(delta))
        if d > radii[i] + radii[j] + tol:
            continue
        if d == 0:
            out.append(centers[i])
        else:
            lo, hi = max(-radii[i], d - radii[j]), min(radii[i], d + radii[j])
            out.append(centers[i] + delta / d * (lo + hi) / 2.0)
        if len(out) >= budget:
            break
    return np.asarray(out).reshape(-1, centers.shape[1])


def measure_thickness(B: Sequence[Ball], lam: float,
                      sample_points: Optional[Sequence[Sequence[float]]] = None,
                      pair_budget: int = THICKNESS_PAIR_BUDGET,
                      tol: float = DEFAULT_TOL) -> ThicknessReport:
    """Largest number of balls with diameters within a factor ``lam`` covering one sample point."""
    if lam < 1:
        raise ParameterError(f"lambda must be >= 1, got {lam}")
    if not B:
        return ThicknessReport(lam, 0, None)
    centers = np.asarray([b.center for b in B], dtype=float)
    radii = np.asarray([b.radius for b in B], dtype=float)
    if sample_points is None:
        samples = np.vstack([centers, _overlap_midpoints(centers, radii, pair_budget, tol)])
    else:
        samples = np.asarray(sample_points, dtype=float)
    order = np.argsort(radii, kind="stable")
    diam = 2.0 * radii[order]
    best, witness = 0, None
    step = max(1, _CHUNK_ELEMENTS // max(len(B), 1))
    for lo in range(0, len(samples), step):
        chunk = samples[lo:lo + step]
        covered = cdist(chunk, centers[order]) <= radii[order] + tol
        for row, mask in enumerate(covered):
            ds = diam[mask]
            if len(ds) <= best:
                continue
            window = np.searchsorted(ds, lam * ds, side="right") - np.arange(len(ds))
            top = int(window.max())
            if top > best:
                best, witness = top, tuple(float(x) for x in chunk[row])
    logger.debug(f"Thickness at lambda={lam}: kappa_hat={best} over {len(samples)} samples")
    return ThicknessReport(lam, best, witness)
