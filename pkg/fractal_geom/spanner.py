"""Box tree, the (1+eps)-spanner built on it, shortcut pruning and dilation checks."""
from __future__ import annotations
import logging, math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial import cKDTree
from .constants import (
    CROSSING_LEMMA_EXPONENT, DEFAULT_THICKNESS_LAMBDA, DEFAULT_TOL, NEAR_FACTOR, SHORTCUT_DIVISOR,
)
from .errors import DisconnectedGraphError, ParameterError
from .geometry import Ball, Sphere, segments_intersect_sphere
from .models import PointSet
from .separator import ThicknessReport, measure_thickness
from .validators import require_positive

logger = logging.getLogger(__name__)

E1, E2 = "E1", "E2"


@dataclass(eq=False)
class BoxNode:
    """Cube ``[lower, lower + size]`` holding ``points``; leaves are single points of size 0."""
    lower: np.ndarray
    size: float
    points: List[int]
    father: Optional[int] = None
    children: List[int] = field(default_factory=list)
    rep: int = -1

    @property
    def center(self) -> np.ndarray:
        return self.lower + self.size / 2.0

    @property
    def is_leaf(self) -> bool:
        return len(self.points) == 1


@dataclass
class BoxTree:
    nodes: List[BoxNode]
    root: int = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def leaves(self) -> List[int]:
        return [i for i, b in enumerate(self.nodes) if b.is_leaf]

    def internal(self) -> List[int]:
        return [i for i, b in enumerate(self.nodes) if not b.is_leaf]

    def to_dict(self) -> dict:
        return {"root": self.root, "nodes": [
            {"lower": b.lower.tolist(), "size": b.size, "points": b.points,
             "father": b.father, "children": b.children, "rep": b.rep} for b in self.nodes]}


def _child_cube(coords: np.ndarray, lower: np.ndarray, size: float, code: int,
                d: int) -> Tuple[np.ndarray, float]:
    """Smallest cube holding ``coords`` placed inside orthant ``code`` of the parent cube."""
    half = size / 2.0
    bits = np.array([(code >> i) & 1 for i in range(d)], dtype=float)
    orth_lo = lower + bits * half
    orth_hi = orth_lo + half
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    side = float((hi - lo).max())
    return np.maximum(orth_lo, np.minimum(lo, orth_hi - side)), side


def build_box_tree(P: PointSet) -> BoxTree:
    """Recursive orthant split at the cube center, each nonempty child shrunk to its points."""
    if len(P) == 0:
        raise ParameterError("box tree needs at least one point")
    coords = P.coords
    d = P.dim
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    all_points = list(range(len(P)))
    nodes = [BoxNode(lo.copy(), float((hi - lo).max()) if len(P) > 1 else 0.0, all_points)]
    stack = [0]
    while stack:
        bid = stack.pop()
        b = nodes[bid]
        if b.is_leaf:
            continue
        pts = np.asarray(b.points)
        codes = ((coords[pts] >= b.center) * (1 << np.arange(d))).sum(axis=1)
        groups = [pts[codes == c].tolist() for c in np.unique(codes)]
        if len(groups) == 1:
            # unary chain: all points fell in one orthant, reshrink in place
            b.lower, b.size = _child_cube(coords[pts], b.lower, b.size, int(codes[0]), d)
            stack.append(bid)
            continue
        for c, members in zip(np.unique(codes), groups):
            if len(members) == 1:
                child = BoxNode(coords[members[0]].copy(), 0.0, members)
            else:
                cl, side = _child_cube(coords[members], b.lower, b.size, int(c), d)
                child = BoxNode(cl, side, members)
            child.father = bid
            nodes.append(child)
            b.children.append(len(nodes) - 1)
            stack.append(len(nodes) - 1)
    order = [0]
    nodes[0].rep = min(all_points)
    while order:
        b = nodes[order.pop()]
        for c in b.children:
            child = nodes[c]
            child.rep = b.rep if b.rep in child.points else min(child.points)
            order.append(c)
    logger.debug(f"Box tree: {len(nodes)} nodes over {len(P)} points")
    return BoxTree(nodes)


@dataclass
class SpannerGraph:
    n: int
    edges: List[Tuple[int, int]]
    lengths: List[float]
    tags: List[str]

    @classmethod
    def from_edges(cls, P: PointSet, edges: Sequence[Tuple[int, int]],
                   tags: Optional[Sequence[str]] = None) -> "SpannerGraph":
        pairs = [(min(i, j), max(i, j)) for i, j in edges]
        coords = P.coords
        lengths = [float(np.linalg.norm(coords[i] - coords[j])) for i, j in pairs]
        return cls(len(P), pairs, lengths, list(tags) if tags is not None else [E1] * len(pairs))

    def __len__(self) -> int:
        return len(self.edges)

    def edge_counts(self) -> Dict[str, int]:
        return {E1: self.tags.count(E1), E2: self.tags.count(E2), "total": len(self.edges)}

    def subgraph(self, keep: Sequence[int]) -> "SpannerGraph":
        return SpannerGraph(self.n, [self.edges[i] for i in keep],
                            [self.lengths[i] for i in keep], [self.tags[i] for i in keep])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        for (i, j), w, t in zip(self.edges, self.lengths, self.tags):
            g.add_edge(i, j, weight=w, tag=t)
        return g

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i, j, w, t] for (i, j), w, t in
                                       zip(self.edges, self.lengths, self.tags)]}


def _near_mask(tree: BoxTree, lowers: np.ndarray, sizes: np.ndarray, father_sizes: np.ndarray,
               F: int, eps: float, d: int) -> np.ndarray:
    b = tree.nodes[F]
    reach = NEAR_FACTOR * math.sqrt(d) / eps * b.size
    gap = np.maximum(0.0, np.maximum(lowers - (b.lower + b.size), b.lower - (lowers + sizes[:, None])))
    mask = (sizes < b.size) & (b.size <= father_sizes) & (np.linalg.norm(gap, axis=1) <= reach)
    mask[tree.root] = False
    return mask


def build_spanner(P: PointSet, eps: float, tree: Optional[BoxTree] = None) -> SpannerGraph:
    """E1 joins reps of a box and its children; E2 joins rep(b) to reps of Near(father(b))."""
    require_positive("eps", eps)
    tree = build_box_tree(P) if tree is None else tree
    nodes = tree.nodes
    lowers = np.asarray([b.lower for b in nodes])
    sizes = np.asarray([b.size for b in nodes])
    father_sizes = np.asarray([nodes[b.father].size if b.father is not None else np.inf for b in nodes])
    reps = np.asarray([b.rep for b in nodes])
    first: set = set()
    second: set = set()
    for b in nodes:
        for c in b.children:
            if b.rep != nodes[c].rep:
                first.add((min(b.rep, nodes[c].rep), max(b.rep, nodes[c].rep)))
    for F in tree.internal():
        near = reps[np.flatnonzero(_near_mask(tree, lowers, sizes, father_sizes, F, eps, P.dim))]
        for c in nodes[F].children:
            r = nodes[c].rep
            for other in np.unique(near):
                if other != r:
                    second.add((min(r, int(other)), max(r, int(other))))
    pairs = sorted(first | second)
    tags = [E1 if p in first else E2 for p in pairs]
    G = SpannerGraph.from_edges(P, pairs, tags)
    logger.debug(f"Spanner eps={eps}: {G.edge_counts()}")
    return G


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    cos = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(max(-1.0, min(1.0, cos)))


def prune_shortcuts(G: SpannerGraph, P: PointSet, eps: float) -> SpannerGraph:
    """Drop each edge (ascending length) that an already-kept edge shortcuts in either direction.

    (z, w) shortcuts x->y when |x - z| <= eps |zw| / 20 and the angle between
    y - x and w - z is at most eps / 20.
    """
    require_positive("eps", eps)
    coords = P.coords
    kd = cKDTree(coords)
    slack = eps / SHORTCUT_DIVISOR
    order = sorted(range(len(G)), key=lambda e: (G.lengths[e], G.edges[e]))
    incident: Dict[int, List[int]] = {}
    kept: List[int] = []

    def shortcut(x: int, y: int, length: float) -> bool:
        direction = coords[y] - coords[x]
        for z in kd.query_ball_point(coords[x], r=slack * length):
            for e in incident.get(z, ()):
                a, b = G.edges[e]
                w = b if a == z else a
                if (np.linalg.norm(coords[x] - coords[z]) <= slack * G.lengths[e]
                        and _angle(direction, coords[w] - coords[z]) <= slack):
                    return True
        return False

    for e in order:
        x, y = G.edges[e]
        if shortcut(x, y, G.lengths[e]) or shortcut(y, x, G.lengths[e]):
            continue
        kept.append(e)
        incident.setdefault(x, []).append(e)
        incident.setdefault(y, []).append(e)
    pruned = G.subgraph(sorted(kept))
    logger.debug(f"Pruned {len(G) - len(pruned)} of {len(G)} edges")
    return pruned


def _graph_distances(G: SpannerGraph) -> np.ndarray:
    if not G.edges:
        dist = np.full((G.n, G.n), np.inf)
        np.fill_diagonal(dist, 0.0)
        return dist
    e = np.asarray(G.edges)
    m = csr_matrix((np.asarray(G.lengths), (e[:, 0], e[:, 1])), shape=(G.n, G.n))
    return shortest_path(m, method="D", directed=False)


def verify_dilation(G: SpannerGraph, P: PointSet) -> float:
    """Maximum over point pairs of graph distance over Euclidean distance."""
    n = len(P)
    if n < 2:
        return 1.0
    dist = _graph_distances(G)
    iu = np.triu_indices(n, k=1)
    graph = dist[iu]
    if not np.isfinite(graph).all():
        k = int(np.flatnonzero(~np.isfinite(graph))[0])
        raise DisconnectedGraphError(f"points {iu[0][k]} and {iu[1][k]} are not connected")
    euclid = np.linalg.norm(P.coords[iu[0]] - P.coords[iu[1]], axis=1)
    return float((graph / euclid).max())


def long_edge_crossings(G: SpannerGraph, P: PointSet, sphere: Sphere,
                        tol: float = DEFAULT_TOL) -> List[int]:
    """Edges longer than the sphere's diameter that meet it."""
    long = [e for e, w in enumerate(G.lengths) if w > 2.0 * sphere.radius]
    if not long:
        return []
    e = np.asarray([G.edges[i] for i in long])
    hit = segments_intersect_sphere(np.asarray(sphere.center), sphere.radius,
                                    P.coords[e[:, 0]], P.coords[e[:, 1]], tol)
    return [long[i] for i in np.flatnonzero(hit)]


def crossing_lemma_bound(d: int, eps: float) -> float:
    """(d / eps)^(c d): the cap on long edges of G' that meet any one sphere."""
    require_positive("eps", eps)
    return (d / eps) ** (CROSSING_LEMMA_EXPONENT * d)


def circumball_thickness(G: SpannerGraph, P: PointSet, lam: float = DEFAULT_THICKNESS_LAMBDA
                         ) -> Dict[str, ThicknessReport]:
    """Thickness of the edge circumballs, for the E1 edges, the E2 edges and all edges."""
    coords = P.coords
    balls = {E1: [], E2: []}
    for (i, j), w, t in zip(G.edges, G.lengths, G.tags):
        balls[t].append(Ball(tuple((coords[i] + coords[j]) / 2.0), w / 2.0))
    return {E1: measure_thickness(balls[E1], lam), E2: measure_thickness(balls[E2], lam),
            "all": measure_thickness(balls[E1] + balls[E2], lam)}
