"""Exact rectilinear Steiner minimal trees on the Hanan grid, at small scale."""
from __future__ import annotations
import itertools, logging, math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import networkx as nx
import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist
from .constants import DEFAULT_TOL, RSMT_BATCH, RSMT_ENUMERATION_LIMIT, RSMT_MAX_N, TSP_BALANCE_FRACTION
from .errors import ParameterError
from .geometry import Point, Segment, l1_diamonds_overlap
from .models import PointSet
from .separator import SeparatorObjects, SphereSeparator, event_spheres, find_separator, separator_centers
from .validators import require_range

logger = logging.getLogger(__name__)

METHODS = ("auto", "enumerate", "dreyfus-wagner")


@dataclass
class RST:
    """Rectilinear Steiner tree: axis-parallel edges split at every vertex and junction."""
    vertices: List[Point]
    edges: List[Segment]
    length: float
    steiner: List[Point] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"length": self.length, "steiner": [list(p) for p in self.steiner],
                "vertices": [list(p) for p in self.vertices],
                "edges": [[list(e.a), list(e.b)] for e in self.edges]}


def _require_plane(P: PointSet) -> None:
    if P.dim != 2:
        raise ParameterError(f"rectilinear Steiner trees are computed in the plane, got d={P.dim}")


def hanan_grid(P: PointSet) -> PointSet:
    _require_plane(P)
    xs = np.unique(P.coords[:, 0])
    ys = np.unique(P.coords[:, 1])
    grid = np.asarray(list(itertools.product(xs, ys)), dtype=float).reshape(-1, 2)
    return PointSet.from_array(grid, label=f"hanan({P.label})")


def l1_mst_length(P: PointSet) -> float:
    if len(P) < 2:
        return 0.0
    return float(minimum_spanning_tree(cdist(P.coords, P.coords, "cityblock")).sum())


def _batch_prim(pts: np.ndarray) -> np.ndarray:
    """L1 MST lengths for a batch of point sets shaped (B, N, 2)."""
    B, N, _ = pts.shape
    if N < 2:
        return np.zeros(B)
    dist = np.abs(pts[:, :, None, :] - pts[:, None, :, :]).sum(axis=3)
    rows = np.arange(B)
    in_tree = np.zeros((B, N), dtype=bool)
    in_tree[:, 0] = True
    best = dist[:, 0, :].copy()
    total = np.zeros(B)
    for _ in range(N - 1):
        cand = np.where(in_tree, np.inf, best)
        j = np.argmin(cand, axis=1)
        total += cand[rows, j]
        in_tree[rows, j] = True
        best = np.minimum(best, dist[rows, j, :])
    return total


def _enumerate_steiner(coords: np.ndarray, extra: np.ndarray, budget: int,
                       tol: float) -> np.ndarray:
    n = len(coords)
    best, chosen = math.inf, np.zeros((0, 2))
    for k in range(budget + 1):
        combos = itertools.combinations(range(len(extra)), k)
        while True:
            chunk = list(itertools.islice(combos, RSMT_BATCH))
            if not chunk:
                break
            idx = np.asarray(chunk, dtype=int).reshape(len(chunk), k)
            pts = np.concatenate([np.broadcast_to(coords, (len(idx), n, 2)), extra[idx]], axis=1)
            totals = _batch_prim(pts)
            i = int(np.argmin(totals))
            if totals[i] < best - tol:
                best, chosen = float(totals[i]), extra[idx[i]]
        logger.debug(f"Steiner enumeration k={k}: best {best:.6f}")
    return chosen


def _dreyfus_wagner(coords: np.ndarray, grid: np.ndarray, tol: float) -> np.ndarray:
    """Steiner points of an optimal tree over the Hanan grid (grid distances are L1)."""
    t, V = len(coords), len(grid)
    term = [int(np.flatnonzero((np.abs(grid - p) <= tol).all(axis=1))[0]) for p in coords]
    dist = cdist(grid, grid, "cityblock")
    root, others = term[-1], term[:-1]
    full = (1 << len(others)) - 1
    dp = np.full((full + 1, V), math.inf)
    via: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for i, ti in enumerate(others):
        dp[1 << i] = dist[ti]
    for S in range(1, full + 1):
        if S & (S - 1) == 0:
            continue
        merged = np.full(V, math.inf)
        split = np.zeros(V, dtype=int)
        sub = (S - 1) & S
        while sub:
            if sub < S ^ sub:
                val = dp[sub] + dp[S ^ sub]
                better = val < merged - tol
                merged[better], split[better] = val[better], sub
            sub = (sub - 1) & S
        total = merged[None, :] + dist
        u = np.argmin(total, axis=1)
        dp[S] = total[np.arange(V), u]
        for v in range(V):
            via[(S, v)] = (int(u[v]), int(split[u[v]]))
    graph = nx.Graph()
    graph.add_nodes_from(term)

    def expand(S: int, v: int) -> None:
        if S & (S - 1) == 0:
            target = others[S.bit_length() - 1]
            if target != v:
                graph.add_edge(v, target, weight=float(dist[v, target]))
            return
        u, sub = via[(S, v)]
        if u != v:
            graph.add_edge(v, u, weight=float(dist[v, u]))
        expand(sub, u)
        expand(S ^ sub, u)

    if full:
        expand(full, root)
    tree = nx.minimum_spanning_tree(graph)
    terminals = set(term)
    leaves = [x for x in tree.nodes if tree.degree(x) <= 1 and x not in terminals]
    while leaves:
        tree.remove_nodes_from(leaves)
        leaves = [x for x in tree.nodes if tree.degree(x) <= 1 and x not in terminals]
    branch = sorted(x for x in tree.nodes if x not in terminals and tree.degree(x) >= 3)
    return grid[branch].reshape(-1, 2)


def _l_shape(a: Point, b: Point) -> List[Tuple[Point, Point]]:
    corner = min((a[0], b[1]), (b[0], a[1]), key=lambda c: (c[1], c[0]))
    return [(p, q) for p, q in ((a, corner), (corner, b)) if p != q]


def _merge(intervals: List[Tuple[float, float]], tol: float) -> List[Tuple[float, float]]:
    merged: List[List[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _realize(vertices: np.ndarray, tol: float) -> Tuple[List[Segment], float, List[Point]]:
    """MST edges drawn as lower L-shapes, overlaps merged, split at every junction."""
    pts = [tuple(float(c) for c in p) for p in vertices]
    mst = minimum_spanning_tree(cdist(vertices, vertices, "cityblock")).tocoo()
    pairs = sorted((min(i, j), max(i, j)) for i, j in zip(mst.row, mst.col))
    rows: Dict[float, List[Tuple[float, float]]] = defaultdict(list)
    cols: Dict[float, List[Tuple[float, float]]] = defaultdict(list)
    for i, j in pairs:
        for p, q in _l_shape(pts[i], pts[j]):
            if abs(p[1] - q[1]) <= tol:
                rows[p[1]].append((min(p[0], q[0]), max(p[0], q[0])))
            else:
                cols[p[0]].append((min(p[1], q[1]), max(p[1], q[1])))
    rows = {y: _merge(iv, tol) for y, iv in rows.items()}
    cols = {x: _merge(iv, tol) for x, iv in cols.items()}
    edges: List[Segment] = []
    length = 0.0
    for y, intervals in sorted(rows.items()):
        for lo, hi in intervals:
            length += hi - lo
            stops = {lo, hi}
            stops.update(p[0] for p in pts if abs(p[1] - y) <= tol and lo < p[0] < hi)
            stops.update(x for x, iv in cols.items() if lo <= x <= hi
                         and any(a - tol <= y <= b + tol for a, b in iv))
            xs = sorted(stops)
            edges.extend(Segment((a, y), (b, y)) for a, b in zip(xs, xs[1:]) if b - a > tol)
    for x, intervals in sorted(cols.items()):
        for lo, hi in intervals:
            length += hi - lo
            stops = {lo, hi}
            stops.update(p[1] for p in pts if abs(p[0] - x) <= tol and lo < p[1] < hi)
            stops.update(y for y, iv in rows.items() if lo <= y <= hi
                         and any(a - tol <= x <= b + tol for a, b in iv))
            ys = sorted(stops)
            edges.extend(Segment((x, a), (x, b)) for a, b in zip(ys, ys[1:]) if b - a > tol)
    nodes = sorted({e.a for e in edges} | {e.b for e in edges} | set(pts))
    return edges, float(length), nodes


def exact_rsmt(P: PointSet, steiner_budget: Optional[int] = None, method: str = "auto",
               tol: float = DEFAULT_TOL) -> RST:
    """Minimum rectilinear Steiner tree with Steiner points drawn from the Hanan grid.

    Small instances enumerate Steiner subsets in (size, lexicographic) order and
    keep the first strictly shorter L1 MST; larger ones run Dreyfus-Wagner on
    the grid. ``steiner_budget`` caps the subset size (default n - 2).
    """
    _require_plane(P)
    n = len(P)
    require_range("n", n, 1, RSMT_MAX_N)
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")
    limit = max(0, n - 2)
    budget = limit if steiner_budget is None else require_range("steiner_budget", steiner_budget, 0, limit)
    coords = P.coords
    if n == 1:
        return RST([P.points[0]], [], 0.0, [])
    grid = hanan_grid(P).coords
    on_p = (cdist(grid, coords) <= tol).any(axis=1)
    extra = grid[~on_p]
    count = sum(math.comb(len(extra), k) for k in range(budget + 1))
    if method == "auto":
        method = "enumerate" if count <= RSMT_ENUMERATION_LIMIT or budget < limit else "dreyfus-wagner"
    logger.debug(f"RSMT n={n}: {len(extra)} Hanan candidates, {count} subsets, method {method}")
    if method == "enumerate":
        steiner = _enumerate_steiner(coords, extra, budget, tol)
    else:
        steiner = _dreyfus_wagner(coords, grid, tol)
    vertices = np.vstack([coords, steiner]) if len(steiner) else coords
    edges, length, nodes = _realize(vertices, tol)
    return RST(nodes, edges, length, [tuple(float(c) for c in s) for s in steiner])


def rsmt_diamond_check(t: RST, tol: float = DEFAULT_TOL) -> bool:
    """True iff no two edge diamonds have intersecting interiors."""
    for e1, e2 in itertools.combinations(t.edges, 2):
        if l1_diamonds_overlap(e1, e2, tol):
            logger.debug(f"Diamonds of {e1} and {e2} overlap")
            return False
    return True


def rsmt_separator_stats(P: PointSet, tol: float = DEFAULT_TOL,
                         tree: Optional[RST] = None) -> SphereSeparator:
    """Best 1/8-balanced sphere separator of the exact RSMT's edges, balanced on P."""
    if len(P) < 2:
        raise ParameterError("separator statistics need at least 2 points")
    t = exact_rsmt(P, tol=tol) if tree is None else tree
    objects = SeparatorObjects.from_segments(t.edges, ref_points=P.coords)
    candidates = event_spheres(objects, separator_centers(P.coords, P.dim + 1, tol))
    return find_separator(objects, TSP_BALANCE_FRACTION, candidates, tol, fallback=True)
