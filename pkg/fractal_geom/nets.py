"""Epsilon-nets and the fractal, box-counting and doubling dimension estimators."""
from __future__ import annotations
import logging, math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple
import numpy as np
from scipy import stats
from scipy.spatial import cKDTree
from .constants import DEFAULT_DOUBLING_CENTERS, DEFAULT_TOL, FIT_R2_WARNING, MIN_SCALES
from .errors import ParameterError
from .models import PointSet
from .pointgen import rng_for
from .validators import require_positive

logger = logging.getLogger(__name__)


class DimensionMethod(str, Enum):
    FRACTAL_NET = "fractal-net"
    BOX_COUNTING = "box-counting"
    DOUBLING = "doubling"


@dataclass
class Net:
    indices: List[int]
    epsilon: float


@dataclass
class NetCheck:
    is_packing: bool
    is_covering: bool
    packing_witness: Optional[Tuple[int, int]] = None
    covering_witness: Optional[int] = None


@dataclass
class DimensionEstimate:
    delta_hat: float
    method: DimensionMethod
    fit_r2: float
    samples: List[Tuple[float, int]] = field(default_factory=list)
    n: int = 0

    @property
    def reliable(self) -> bool:
        return self.fit_r2 >= FIT_R2_WARNING

    def to_row(self) -> dict:
        return {"method": self.method.value, "delta_hat": self.delta_hat,
                "fit_r2": self.fit_r2, "n": self.n}


def lexicographic_order(coords: np.ndarray) -> np.ndarray:
    return np.lexsort(coords.T[::-1])


def build_epsilon_net(P: PointSet, eps: float, order: Optional[Sequence[int]] = None,
                      tol: float = DEFAULT_TOL) -> Net:
    """Greedy maximal eps-packing; admits a point iff it is >= eps from all admitted ones."""
    require_positive("eps", eps)
    if len(P) == 0:
        return Net([], eps)
    coords = P.coords
    order = lexicographic_order(coords) if order is None else np.asarray(order)
    tree = cKDTree(coords)
    blocked = np.zeros(len(coords), dtype=bool)
    chosen: List[int] = []
    for i in order:
        if blocked[i]:
            continue
        chosen.append(int(i))
        blocked[tree.query_ball_point(coords[i], r=max(eps - tol, 0.0))] = True
    logger.debug(f"Net at eps={eps}: {len(chosen)} of {len(coords)} points")
    return Net(chosen, eps)


def verify_net(P: PointSet, S: Sequence[int], eps: float, tol: float = DEFAULT_TOL) -> NetCheck:
    """Check packing and covering exhaustively; witnesses index into P."""
    S = sorted(int(i) for i in S)
    coords = P.coords
    result = NetCheck(is_packing=True, is_covering=True)
    if len(S) >= 2:
        sub = coords[S]
        pairs = cKDTree(sub).query_pairs(r=eps, output_type="ndarray")
        if len(pairs):
            gaps = np.linalg.norm(sub[pairs[:, 0]] - sub[pairs[:, 1]], axis=1)
            bad = pairs[gaps < eps - tol]
            if len(bad):
                bad = np.sort(bad, axis=1)
                first = bad[np.lexsort(bad.T[::-1])[0]]
                result.is_packing = False
                result.packing_witness = (S[first[0]], S[first[1]])
    if len(coords):
        if not S:
            result.is_covering, result.covering_witness = False, 0
        else:
            dist, _ = cKDTree(coords[S]).query(coords)
            uncovered = np.flatnonzero(dist > eps + tol)
            if len(uncovered):
                result.is_covering, result.covering_witness = False, int(uncovered[0])
    return result


def _fit(method: DimensionMethod, xs: List[float], counts: List[int],
         scales: List[float], n: int) -> DimensionEstimate:
    samples = list(zip(scales, counts))
    ys = np.log(np.asarray(counts, dtype=float))
    if len(set(counts)) == 1 or len(set(xs)) == 1:
        logger.debug(f"{method.value}: degenerate regression, reporting 0")
        return DimensionEstimate(0.0, method, 0.0, samples, n)
    fit = stats.linregress(xs, ys)
    delta = max(0.0, float(fit.slope))
    r2 = float(fit.rvalue ** 2)
    if r2 < FIT_R2_WARNING:
        logger.info(f"{method.value}: low fit quality r2={r2:.3f}")
    return DimensionEstimate(delta, method, r2, samples, n)


def nearest_neighbor_spacing(P: PointSet) -> float:
    if len(P) < 2:
        return 1.0
    dist, _ = cKDTree(P.coords).query(P.coords, k=2)
    return float(dist[:, 1].min())


def diameter_bound(P: PointSet) -> float:
    """Length of the bounding-box diagonal (>= the diameter)."""
    if len(P) == 0:
        return 0.0
    return float(np.linalg.norm(P.coords.max(axis=0) - P.coords.min(axis=0)))


def default_fractal_scales(P: PointSet) -> List[Tuple[float, float]]:
    """eps = minimum spacing, r = eps * 2^j for j >= 1 with r <= diameter / 4.

    Balls wider than a quarter of the diameter hold most of a bounded set and
    flatten the count curve.
    """
    eps = nearest_neighbor_spacing(P)
    quarter = diameter_bound(P) / 4.0
    scales = []
    j = 1
    while eps * 2 ** j <= quarter or len(scales) < MIN_SCALES:
        scales.append((eps, eps * 2 ** j))
        j += 1
    return scales


def estimate_fractal_dimension(P: PointSet, scales: Optional[Sequence[Tuple[float, float]]] = None,
                               order: Optional[Sequence[int]] = None,
                               tol: float = DEFAULT_TOL) -> DimensionEstimate:
    scales = list(default_fractal_scales(P) if scales is None else scales)
    if len(scales) < MIN_SCALES:
        raise ParameterError(f"need at least {MIN_SCALES} scale pairs, got {len(scales)}")
    xs, counts, radii = [], [], []
    for eps, r in scales:
        require_positive("eps", eps)
        if r < 2 * eps - tol:
            raise ParameterError(f"scale pair needs r >= 2 eps, got eps={eps}, r={r}")
        net = build_epsilon_net(P, eps, order, tol)
        pts = P.coords[net.indices]
        sizes = cKDTree(pts).query_ball_point(pts, r=r + tol, return_length=True)
        count = int(np.max(sizes)) if len(pts) else 0
        logger.debug(f"fractal scale eps={eps} r={r}: max ball count {count}")
        xs.append(math.log(r / eps)); counts.append(max(count, 1)); radii.append(r)
    return _fit(DimensionMethod.FRACTAL_NET, xs, counts, radii, len(P))


def default_box_scales(P: PointSet) -> List[float]:
    span = float(np.ptp(P.coords, axis=0).max()) if len(P) > 1 else 0.0
    if span <= 0:
        return [1.0, 0.5, 0.25]
    floor = nearest_neighbor_spacing(P)
    eps_list = []
    j = 1
    while span / 2 ** j >= floor or len(eps_list) < MIN_SCALES:
        eps_list.append(span / 2 ** j)
        j += 1
    return eps_list


def box_count(P: PointSet, eps: float) -> int:
    """Occupied cells of the width-eps grid anchored at the bounding-box corner."""
    if len(P) == 0:
        return 0
    cells = np.floor((P.coords - P.coords.min(axis=0)) / eps).astype(np.int64)
    return len(np.unique(cells, axis=0))


def estimate_box_counting_dimension(P: PointSet,
                                    eps_list: Optional[Sequence[float]] = None) -> DimensionEstimate:
    eps_list = list(default_box_scales(P) if eps_list is None else eps_list)
    if len(eps_list) < MIN_SCALES:
        raise ParameterError(f"need at least {MIN_SCALES} scales, got {len(eps_list)}")
    xs, counts = [], []
    for eps in eps_list:
        require_positive("eps", eps)
        count = box_count(P, eps)
        xs.append(math.log(1.0 / eps)); counts.append(max(count, 1))
    return _fit(DimensionMethod.BOX_COUNTING, xs, counts, list(eps_list), len(P))


def _greedy_half_cover(coords: np.ndarray, members: np.ndarray, candidates: np.ndarray,
                       half: float, tol: float) -> int:
    """Greedy max-coverage cover of ``members`` by balls of radius ``half``."""
    gaps = np.linalg.norm(coords[candidates][:, None, :] - coords[members][None, :, :], axis=2)
    covers = gaps <= half + tol
    uncovered = np.ones(len(members), dtype=bool)
    count = 0
    while uncovered.any():
        gain = (covers & uncovered).sum(axis=1)
        best = int(np.argmax(gain))
        uncovered &= ~covers[best]
        count += 1
    return count


def estimate_doubling_dimension(P: PointSet, centers_budget: int = DEFAULT_DOUBLING_CENTERS,
                                radii: Optional[Sequence[float]] = None, seed: int = 0,
                                tol: float = DEFAULT_TOL) -> DimensionEstimate:
    """log2 of the largest greedy half-radius cover count over sampled balls."""
    n = len(P)
    if n < 2:
        raise ParameterError(f"doubling estimate needs at least 2 points, got {n}")
    coords = P.coords
    if n <= centers_budget:
        centers = np.arange(n)
    else:
        centers = np.sort(rng_for(seed).choice(n, size=centers_budget, replace=False))
    if radii is None:
        diam, floor = diameter_bound(P), nearest_neighbor_spacing(P)
        radii = []
        r = diam
        while r >= floor:
            radii.append(r)
            r /= 2.0
    tree = cKDTree(coords)
    best, samples = 1, []
    for r in radii:
        worst = 1
        for x in centers:
            members = np.asarray(tree.query_ball_point(coords[x], r=r + tol), dtype=int)
            if len(members) < 2:
                continue
            candidates = np.asarray(tree.query_ball_point(coords[x], r=1.5 * r + tol), dtype=int)
            worst = max(worst, _greedy_half_cover(coords, members, candidates, r / 2.0, tol))
        samples.append((float(r), worst))
        best = max(best, worst)
    delta = math.log2(best)
    logger.debug(f"doubling: max half-cover count {best} over {len(radii)} radii")
    return DimensionEstimate(delta, DimensionMethod.DOUBLING, 1.0, samples, n)


def estimates_to_csv_rows(estimates: Sequence[DimensionEstimate]) -> List[dict]:
    return [e.to_row() for e in estimates]
