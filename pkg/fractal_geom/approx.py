"""Shifted-grid approximation schemes for eps-cover and eps-packing."""
from __future__ import annotations
import itertools, logging, math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from scipy.spatial.distance import cdist
from .constants import BRUTE_FORCE_OPT_MAX_N, DEFAULT_TOL
from .errors import CapExceededError
from .independent_set import max_independent_subset
from .models import PointSet
from .nets import verify_net
from .validators import require_positive, require_range

logger = logging.getLogger(__name__)

Cell = Tuple[int, ...]


class Problem(str, Enum):
    COVER = "cover"
    PACKING = "packing"


@dataclass
class GridPartition:
    shift_index: Tuple[int, ...]
    cell_side: float
    origin: Tuple[float, ...]
    cells: Dict[Cell, List[int]] = field(default_factory=dict)

    def cell_bounds(self, cell: Cell) -> Tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.origin) + np.asarray(cell) * self.cell_side
        return lo, lo + self.cell_side


@dataclass
class CoverSolution:
    chosen: List[int]
    shift_index: Optional[Tuple[int, ...]] = None

    @property
    def size(self) -> int:
        return len(self.chosen)


@dataclass
class PackingSolution:
    chosen: List[int]
    shift_index: Optional[Tuple[int, ...]] = None

    @property
    def size(self) -> int:
        return len(self.chosen)


def shifted_partitions(P: PointSet, eps: float, ell: int, cell_side: float) -> List[GridPartition]:
    """The ell^d grids of side ``cell_side``, hyperplanes shifted by cell_side/ell per step."""
    require_positive("eps", eps)
    require_range("ell", ell, 1)
    require_positive("cell_side", cell_side)
    coords = P.coords
    lo = coords.min(axis=0) if len(P) else np.zeros(P.dim)
    step = cell_side / ell
    partitions = []
    for shift in itertools.product(range(ell), repeat=P.dim):
        origin = lo + np.asarray(shift, dtype=float) * step
        ids = np.floor((coords - origin) / cell_side).astype(np.int64)
        cells: Dict[Cell, List[int]] = {}
        for i, cell in enumerate(map(tuple, ids.tolist())):
            cells.setdefault(cell, []).append(i)
        partitions.append(GridPartition(tuple(shift), cell_side, tuple(origin.tolist()),
                                        dict(sorted(cells.items()))))
    return partitions


def _packing_lower_bound(coords: np.ndarray, eps: float, tol: float) -> int:
    """Points pairwise farther than 2 eps need distinct centers."""
    picked: List[np.ndarray] = []
    for p in coords:
        if all(np.linalg.norm(p - q) > 2 * eps + tol for q in picked):
            picked.append(p)
    return len(picked)


def exact_cell_cover(cell_points: PointSet, eps: float, cap: Optional[int] = None,
                     candidates: Optional[PointSet] = None, tol: float = DEFAULT_TOL) -> CoverSolution:
    """Minimum-size eps-cover of ``cell_points`` by centers drawn from ``candidates``.

    Sizes are tried in increasing order; each search branches on the uncovered
    point with the fewest possible centers. Indices refer to ``candidates``
    (the cell points themselves when omitted).
    """
    require_positive("eps", eps)
    n = len(cell_points)
    if n == 0:
        return CoverSolution([])
    centers = cell_points if candidates is None else candidates
    cap = n if cap is None else require_range("cap", cap, 1)
    covers = cdist(centers.coords, cell_points.coords) <= eps + tol
    masks = [int(sum(1 << int(j) for j in np.flatnonzero(row))) for row in covers]
    coverers = [np.flatnonzero(covers[:, j]).tolist() for j in range(n)]
    if any(not c for c in coverers):
        raise CapExceededError("some cell point has no candidate center within eps")
    widest = max(bin(m).count("1") for m in masks)
    full = (1 << n) - 1

    def search(covered: int, chosen: List[int], budget: int) -> Optional[List[int]]:
        if covered == full:
            return list(chosen)
        missing = bin(full & ~covered).count("1")
        if budget == 0 or math.ceil(missing / widest) > budget:
            return None
        pivot = min((j for j in range(n) if not (covered >> j) & 1),
                    key=lambda j: (len(coverers[j]), j))
        for c in coverers[pivot]:
            chosen.append(c)
            found = search(covered | masks[c], chosen, budget - 1)
            chosen.pop()
            if found is not None:
                return found
        return None

    start = max(1, _packing_lower_bound(cell_points.coords, eps, tol))
    for size in range(start, cap + 1):
        found = search(0, [], size)
        if found is not None:
            return CoverSolution(sorted(found))
    raise CapExceededError(f"no eps-cover of {n} points within cap {cap}")


def _near_cell(coords: np.ndarray, lo: np.ndarray, hi: np.ndarray, eps: float, tol: float) -> np.ndarray:
    gap = np.maximum(0.0, np.maximum(lo - coords, coords - hi))
    return np.flatnonzero(np.linalg.norm(gap, axis=1) <= eps + tol)


def ptas_cover(P: PointSet, eps: float, ell: int, tol: float = DEFAULT_TOL) -> CoverSolution:
    """Best union of exact per-cell covers over all ell^d shifts of a 2 ell eps grid."""
    require_positive("eps", eps)
    require_range("ell", ell, 1)
    if len(P) == 0:
        return CoverSolution([], (0,) * P.dim)
    coords = P.coords
    cache: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], List[int]] = {}
    best: Optional[CoverSolution] = None
    for part in shifted_partitions(P, eps, ell, 2 * ell * eps):
        union = set()
        for cell, members in part.cells.items():
            lo, hi = part.cell_bounds(cell)
            near = _near_cell(coords, lo, hi, eps, tol)
            key = (tuple(members), tuple(near.tolist()))
            if key not in cache:
                local = exact_cell_cover(P.subset(members), eps,
                                         candidates=P.subset(near.tolist()), tol=tol)
                cache[key] = [int(near[i]) for i in local.chosen]
            union.update(cache[key])
        logger.debug(f"cover shift {part.shift_index}: {len(union)} centers")
        if best is None or len(union) < best.size:
            best = CoverSolution(sorted(union), part.shift_index)
    return best


def ptas_packing(P: PointSet, eps: float, ell: int, tol: float = DEFAULT_TOL) -> PackingSolution:
    """Best union of exact per-cell packings of points at least eps/2 inside their cell."""
    require_positive("eps", eps)
    require_range("ell", ell, 1)
    if len(P) == 0:
        return PackingSolution([], (0,) * P.dim)
    coords = P.coords
    clash = cdist(coords, coords) < eps - tol
    np.fill_diagonal(clash, False)
    margin = eps / 2.0 - tol / 4.0
    best: Optional[PackingSolution] = None
    for part in shifted_partitions(P, eps, ell, ell * eps):
        union: List[int] = []
        for cell, members in part.cells.items():
            lo, hi = part.cell_bounds(cell)
            pts = coords[members]
            inner = ((pts - lo >= margin) & (hi - pts >= margin)).all(axis=1)
            keep = [m for m, ok in zip(members, inner) if ok]
            if not keep:
                continue
            adj = [int(sum(1 << b for b, other in enumerate(keep) if clash[a, other])) for a in keep]
            local = max_independent_subset(adj, (1 << len(keep)) - 1, len(keep))
            union.extend(keep[i] for i in local)
        logger.debug(f"packing shift {part.shift_index}: {len(union)} points")
        if best is None or len(union) > best.size:
            best = PackingSolution(sorted(union), part.shift_index)
    return best


def brute_force_opt(P: PointSet, eps: float, problem: Problem = Problem.COVER,
                    tol: float = DEFAULT_TOL):
    """Exact minimum eps-cover or maximum eps-packing of a small point set."""
    require_range("n", len(P), 0, BRUTE_FORCE_OPT_MAX_N)
    require_positive("eps", eps)
    problem = Problem(problem)
    if problem is Problem.COVER:
        return exact_cell_cover(P, eps, tol=tol)
    coords = P.coords
    clash = cdist(coords, coords) < eps - tol
    np.fill_diagonal(clash, False)
    adj = [int(sum(1 << int(j) for j in np.flatnonzero(row))) for row in clash]
    return PackingSolution(list(max_independent_subset(adj, (1 << len(P)) - 1, len(P))))


def verify_cover(P: PointSet, chosen: Sequence[int], eps: float, tol: float = DEFAULT_TOL) -> bool:
    return verify_net(P, chosen, eps, tol).is_covering


def verify_packing(P: PointSet, chosen: Sequence[int], eps: float, tol: float = DEFAULT_TOL) -> bool:
    return verify_net(P, chosen, eps, tol).is_packing

