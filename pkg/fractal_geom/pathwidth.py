"""Path decompositions of spanner graphs by recursive sphere separators."""
from __future__ import annotations
import logging, math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple
import networkx as nx
import numpy as np
from networkx.algorithms import bipartite
from .constants import (
    DEFAULT_SAMPLE_CENTERS, DEFAULT_TOL, MAX_RADII_PER_CENTER, PATH_BAG_BASE,
    TSP_BALANCE_FRACTION,
)
from .errors import InvalidDecompositionError, NoBalancedCandidateError
from .models import PointSet
from .separator import SeparatorObjects, SphereBatch, find_separator, sampled_centers
from .spanner import SpannerGraph

logger = logging.getLogger(__name__)

SEPARATOR, SWEEP = "separator", "sweep"


@dataclass
class PathDecomposition:
    bags: List[List[int]]
    source: str = SEPARATOR

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1

    def to_dict(self) -> dict:
        return {"width": self.width, "source": self.source, "bags": [list(b) for b in self.bags]}


@dataclass
class DecompositionCheck:
    valid: bool
    width: int
    violating_edge: Optional[Tuple[int, int]] = None
    violating_vertex: Optional[int] = None
    missing_vertex: Optional[int] = None


def verify_path_decomposition(G: SpannerGraph, pd: PathDecomposition,
                              strict: bool = False) -> DecompositionCheck:
    """Check vertex coverage, contiguity of each vertex's bags and edge coverage.

    Contiguous vertices are compared as bag intervals; an edge touching a
    non-contiguous vertex falls back to intersecting bag indices.
    """
    where: Dict[int, List[int]] = {}
    for i, bag in enumerate(pd.bags):
        for v in bag:
            where.setdefault(v, []).append(i)
    check = DecompositionCheck(True, pd.width)
    for v in range(G.n):
        if v not in where:
            check.valid, check.missing_vertex = False, v
            break
    broken: Set[int] = set()
    for v in sorted(where):
        idx = where[v]
        if idx[-1] - idx[0] + 1 != len(idx):
            broken.add(v)
            if check.violating_vertex is None:
                check.valid, check.violating_vertex = False, v
    for i, j in G.edges:
        if i not in where or j not in where:
            covered = False
        elif i in broken or j in broken:
            covered = bool(set(where[i]) & set(where[j]))
        else:
            covered = max(where[i][0], where[j][0]) <= min(where[i][-1], where[j][-1])
        if not covered:
            check.valid, check.violating_edge = False, (i, j)
            break
    if strict and not check.valid:
        raise InvalidDecompositionError(f"invalid path decomposition: {check}")
    return check


def _balanced_radii(coords: np.ndarray, center: np.ndarray, fraction: float) -> np.ndarray:
    """Gap midpoints between sorted point distances that leave a balanced split."""
    dist = np.sort(np.linalg.norm(coords - center, axis=1))
    n = len(dist)
    lo, hi = max(1, math.ceil(fraction * n)), min(n - 1, math.floor((1 - fraction) * n))
    if lo > hi:
        return np.zeros(0)
    mids = (dist[lo - 1:hi] + dist[lo:hi + 1]) / 2.0
    gaps = dist[lo:hi + 1] - dist[lo - 1:hi]
    mids = np.unique(mids[gaps > 0])
    if len(mids) > MAX_RADII_PER_CENTER:
        mids = mids[np.unique(np.linspace(0, len(mids) - 1, MAX_RADII_PER_CENTER).round().astype(int))]
    return mids


def boundary_cover(edges: Sequence[Tuple[int, int]], first: Set[int]) -> Set[int]:
    """Minimum vertex cover of the edges running between ``first`` and the rest.

    Edges with both endpoints on one side are ignored.
    """
    cut = [(i, j) for i, j in edges if (i in first) != (j in first)]
    if not cut:
        return set()
    g = nx.Graph(cut)
    top = {v for v in g if v in first}
    matching = bipartite.hopcroft_karp_matching(g, top_nodes=top)
    return set(bipartite.to_vertex_cover(g, matching, top_nodes=top))


@dataclass
class _Leaf:
    """Vertices of one recursion leaf and the separators of its ancestors."""
    vertices: List[int]
    carried: List[Set[int]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.vertices) + sum(len(S) for S in self.carried)

    def bag(self) -> List[int]:
        return sorted(set(self.vertices).union(*self.carried))


class _Decomposer:
    def __init__(self, G: SpannerGraph, P: PointSet, eps: float, tol: float, trace: Optional[list]):
        self.coords = P.coords
        self.eps, self.tol, self.trace = eps, tol, trace
        self.adj: Dict[int, Set[int]] = {v: set() for v in range(G.n)}
        for i, j in G.edges:
            self.adj[i].add(j)
            self.adj[j].add(i)

    def record(self, **entry) -> None:
        if self.trace is not None:
            self.trace.append(entry)

    def decompose(self, V: List[int], carried: List[Set[int]]) -> Tuple[List[_Leaf], List[int]]:
        """Leaves in bag order plus a vertex layout (inside, separator, outside)."""
        if not V:
            return [], []
        if len(V) <= PATH_BAG_BASE:
            return [_Leaf(sorted(V), carried)], sorted(V)
        members = set(V)
        edges = sorted((i, j) for i in V for j in self.adj[i] if j in members and i < j)
        if not edges:
            return [_Leaf([v], carried) for v in sorted(V)], sorted(V)
        split = self.sphere_split(V, edges)
        if split is None:
            split = self.median_split(V, edges)
        first, second, S = split
        below = carried + [S]
        leaves_a, order_a = self.decompose(first, below)
        leaves_b, order_b = self.decompose(second, below)
        leaves = leaves_a + leaves_b or [_Leaf([], below)]
        return leaves, order_a + sorted(S) + order_b

    def sphere_split(self, V: List[int], edges: List[Tuple[int, int]]):
        pts = self.coords[V]
        local = {v: k for k, v in enumerate(V)}
        objects = SeparatorObjects.from_edges(pts, [(local[i], local[j]) for i, j in edges])
        centers, radii = [], []
        for c in sampled_centers(pts, DEFAULT_SAMPLE_CENTERS):
            r = _balanced_radii(pts, c, TSP_BALANCE_FRACTION)
            centers.append(np.repeat(c[None, :], len(r), axis=0))
            radii.append(r)
        batch = SphereBatch(np.vstack(centers), np.concatenate(radii))
        try:
            sep = find_separator(objects, TSP_BALANCE_FRACTION, batch, self.tol)
        except NoBalancedCandidateError:
            return None
        crossing = [edges[e] for e in sep.crossing]
        inside_set = {V[k] for k in sep.inside}
        S = boundary_cover(edges, inside_set)
        diameter = 2.0 * sep.sphere.radius
        long = sum(1 for i, j in crossing if np.linalg.norm(self.coords[i] - self.coords[j]) > diameter)
        self.record(size=len(V), radius=sep.sphere.radius, balance=sep.balance,
                    short=len(crossing) - long, long=long, separator=len(S), fallback=False)
        inside = [V[k] for k in sep.inside if V[k] not in S]
        outside = [V[k] for k in sep.outside if V[k] not in S]
        return inside, outside, S

    def median_split(self, V: List[int], edges: List[Tuple[int, int]]):
        pts = self.coords[V]
        axis = int(np.argmax(np.ptp(pts, axis=0)))
        ranked = sorted(V, key=lambda v: (self.coords[v][axis], v))
        lower, upper = ranked[:len(V) // 2], ranked[len(V) // 2:]
        S = boundary_cover(edges, set(lower))
        self.record(size=len(V), radius=None, balance=None, short=0, long=0,
                    separator=len(S), fallback=True)
        return [v for v in lower if v not in S], [v for v in upper if v not in S], S


def _last_neighbor(order: Sequence[int], edges: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    pos = np.empty(n, dtype=np.int64)
    pos[np.asarray(order, dtype=np.int64)] = np.arange(n)
    last = pos.copy()
    if len(edges):
        np.maximum.at(last, edges[:, 0], pos[edges[:, 1]])
        np.maximum.at(last, edges[:, 1], pos[edges[:, 0]])
    return pos, last


def layout_width(order: Sequence[int], edges: np.ndarray, n: int) -> int:
    """Vertex separation of ``order``: the most earlier vertices still waiting on a later neighbour."""
    pos, last = _last_neighbor(order, edges, n)
    open_ = last > pos
    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, pos[open_] + 1, 1)
    np.add.at(diff, last[open_] + 1, -1)
    return int(np.cumsum(diff[:n]).max()) if n else 0


def layout_bags(order: Sequence[int], edges: np.ndarray, n: int) -> List[List[int]]:
    """Bag i holds order[i] and every earlier vertex with a neighbour at position i or later."""
    pos, last = _last_neighbor(order, edges, n)
    closing: Dict[int, List[int]] = {}
    for v in np.flatnonzero(last > pos):
        closing.setdefault(int(last[v]), []).append(int(v))
    active: Set[int] = set()
    bags = []
    for i, v in enumerate(order):
        bags.append(sorted(active | {int(v)}))
        for u in closing.get(i, ()):
            active.discard(u)
        if last[v] > i:
            active.add(int(v))
    return bags


def axis_orders(coords: np.ndarray) -> List[np.ndarray]:
    """One lexicographic order per coordinate, that coordinate most significant."""
    d = coords.shape[1]
    return [np.lexsort(tuple(coords[:, a] for a in list(range(d))[::-1] if a != axis) + (coords[:, axis],))
            for axis in range(d)]


def build_path_decomposition(G: SpannerGraph, P: PointSet, eps: float, tol: float = DEFAULT_TOL,
                             trace: Optional[list] = None, validate: bool = False) -> PathDecomposition:
    """Separate, remove a vertex cover S of the cut edges, recurse, and add S to every bag.

    Inside bags come before outside bags. Small or edgeless pieces end the
    recursion; a median split on the widest axis replaces the sphere when no
    balanced candidate exists. The recursion's vertex layout and the axis
    layouts are then swept; the narrowest of all candidates is returned.
    """
    n = len(P)
    leaves, order = _Decomposer(G, P, eps, tol, trace).decompose(list(range(n)), [])
    best_width = max((leaf.size for leaf in leaves), default=1) - 1
    edges = np.asarray(G.edges, dtype=np.int64).reshape(-1, 2)
    best_order = None
    for candidate in [order] + axis_orders(P.coords):
        w = layout_width(candidate, edges, n)
        if w < best_width:
            best_width, best_order = w, candidate
    if best_order is None:
        pd = PathDecomposition([leaf.bag() for leaf in leaves], SEPARATOR)
    else:
        pd = PathDecomposition(layout_bags(best_order, edges, n), SWEEP)
    logger.debug(f"Path decomposition: {len(pd.bags)} bags, width {pd.width} from {pd.source}")
    if validate:
        verify_path_decomposition(G, pd, strict=True)
    return pd
