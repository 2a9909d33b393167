"""Exact Euclidean TSP: a Held-Karp oracle and recursive separator divide-and-conquer."""
from __future__ import annotations
import logging, math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist
from .constants import (
    DEFAULT_TOL, HELD_KARP_MAX_N, HELD_KARP_MIN_N, INITIAL_CROSSING_BUDGET,
    SEPARATOR_TSP_MAX_N, SEPARATOR_TSP_MIN_N, TSP_BALANCE_FRACTION, TSP_BASE_CASE_SIZE,
)
from .errors import BudgetExhaustedError, ParameterError
from .geometry import Segment
from .models import PointSet
from .separator import SeparatorObjects, SphereSeparator, event_spheres, find_separator, separator_centers
from .validators import require_range

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass
class Tour:
    order: List[int]
    length: float

    def to_dict(self, P: Optional[PointSet] = None) -> dict:
        data = {"order": list(self.order), "length": self.length}
        if P is not None:
            data["points"] = [list(P.points[i]) for i in self.order]
        return data


@dataclass
class BoundaryCondition:
    """Edges of a tour between the two sides of a separator, oriented in traversal order."""
    edges: List[Tuple[int, int]]
    segments: List[Segment] = field(default_factory=list)


@dataclass
class SeparatorTourTrace:
    tour: Tour
    separator: SphereSeparator
    boundary: BoundaryCondition
    crossing_budget: int
    lower_bound: float
    outer: List[int]
    inner: List[int]
    depth: int = 1
    subproblems: int = 0


def tour_length(coords: np.ndarray, order: Sequence[int]) -> float:
    pts = np.asarray(coords, dtype=float)[list(order)]
    return float(np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1).sum())


def _canonical(order: List[int]) -> List[int]:
    """Rotate to start at 0 and orient so the second vertex is the smaller neighbour."""
    k = order.index(0)
    order = order[k:] + order[:k]
    if len(order) > 2 and order[1] > order[-1]:
        order = [order[0]] + order[1:][::-1]
    return order


def _masks_by_popcount(bits: int) -> List[np.ndarray]:
    masks = np.arange(1 << bits)
    counts = np.array([bin(m).count("1") for m in masks])
    return [masks[counts == c] for c in range(bits + 1)]


def held_karp_tsp(P: PointSet) -> Tour:
    """Optimal tour by subset dynamic programming over tours starting at point 0."""
    n = len(P)
    require_range("n", n, HELD_KARP_MIN_N, HELD_KARP_MAX_N)
    D = cdist(P.coords, P.coords)
    if n == 2:
        return Tour([0, 1], 2.0 * float(D[0, 1]))
    m = n - 1
    dp = np.full((1 << m, m), INF)
    parent = np.full((1 << m, m), -1, dtype=np.int8)
    for j in range(m):
        dp[1 << j, j] = D[0, j + 1]
    inner = D[1:, 1:]
    for layer in _masks_by_popcount(m)[2:]:
        for j in range(m):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            vals = dp[prev] + inner[:, j][None, :]
            best = np.argmin(vals, axis=1)
            dp[sel, j] = vals[np.arange(len(sel)), best]
            parent[sel, j] = best
    full = (1 << m) - 1
    last = int(np.argmin(dp[full] + D[1:, 0]))
    path, mask, j = [], full, last
    while j >= 0:
        path.append(j + 1)
        prev_j = int(parent[mask, j])
        mask ^= 1 << j
        j = prev_j if mask else -1
    order = _canonical([0] + path[::-1])
    length = tour_length(P.coords, order)
    logger.debug(f"Held-Karp n={n}: length {length:.6f}")
    return Tour(order, length)


def _path_cover_table(D: np.ndarray, kmax: int) -> np.ndarray:
    """pc[k] = minimum total length of k vertex-disjoint paths covering all vertices of D."""
    s = len(D)
    pc = np.full(kmax + 1, INF)
    if s == 0:
        pc[0] = 0.0
        return pc
    g = np.full((kmax + 1, 1 << s, s), INF)
    if kmax >= 1:
        for u in range(s):
            g[1, 1 << u, u] = 0.0
    for layer in _masks_by_popcount(s)[1:s]:
        for u in range(s):
            sel = layer[(layer >> u) & 1 == 0]
            cur = g[:, sel, :]
            tgt = sel | (1 << u)
            ext = (cur + D[:, u][None, None, :]).min(axis=2)
            g[:, tgt, u] = np.minimum(g[:, tgt, u], ext)
            if kmax >= 1:
                fresh = cur.min(axis=2)[:-1]
                g[1:, tgt, u] = np.minimum(g[1:, tgt, u], fresh)
    pc[:] = g[:, (1 << s) - 1, :].min(axis=1)
    return pc


def path_cover_lower_bound(D: np.ndarray, subset: Sequence[int], m: int) -> float:
    """Exact minimum cost of covering ``subset`` by ``m`` vertex-disjoint paths."""
    idx = list(subset)
    return float(_path_cover_table(np.asarray(D)[np.ix_(idx, idx)], m)[m])


def _hamiltonian_paths(DX: np.ndarray) -> np.ndarray:
    """H[T, c, e]: shortest path through exactly the vertices of T from c to e."""
    x = len(DX)
    H = np.full((1 << x, x, x), INF)
    for c in range(x):
        H[1 << c, c, c] = 0.0
    for layer in _masks_by_popcount(x)[2:]:
        for T in layer:
            for e in range(x):
                if not (T >> e) & 1:
                    continue
                prev = H[T ^ (1 << e)]
                vals = (prev + DX[:, e][None, :]).min(axis=1)
                vals[e] = INF
                H[T, :, e] = vals
    return H


def _hamiltonian_walk(H: np.ndarray, DX: np.ndarray, T: int, c: int, e: int, tol: float) -> List[int]:
    """Vertices of the path behind H[T, c, e], from c to e."""
    walk = [e]
    while T != (1 << c) or e != c:
        value, prev = H[T, c, e], T ^ (1 << e)
        for f in range(len(DX)):
            if (prev >> f) & 1 and abs(value - H[prev, c, f] - DX[f, e]) <= tol * max(1.0, abs(value)):
                T, e = prev, f
                walk.append(f)
                break
        else:
            raise RuntimeError("path reconstruction failed")
    return walk[::-1]


def _tour_separator(coords: np.ndarray, balance_fraction: float, tol: float) -> SphereSeparator:
    """Balanced sphere crossing the fewest MST edges of ``coords``; raises if none is balanced."""
    mst = minimum_spanning_tree(cdist(coords, coords)).tocoo()
    edges = sorted((min(i, j), max(i, j)) for i, j in zip(mst.row, mst.col))
    objects = SeparatorObjects.from_edges(coords, edges)
    candidates = event_spheres(objects, separator_centers(coords, coords.shape[1] + 1, tol))
    return find_separator(objects, balance_fraction, candidates, tol)


Pair = Tuple[int, int]
Pairs = Tuple[Pair, ...]
Paths = Dict[Pair, Tuple[int, ...]]


@dataclass
class _Split:
    inside: FrozenSet[int]
    outside: FrozenSet[int]
    separator: SphereSeparator
    edges: List[Tuple[float, int, int]]
    prefix: np.ndarray


class _SeparatorTourSolver:
    """Exact tours by recursive sphere separation.

    A subproblem is a vertex set U with terminal pairs and asks for disjoint
    paths covering U, one joining each pair. Above the base size U is split
    by a balanced sphere; every choice of crossing edges within the budget,
    together with a pairing of the port ends on each side, yields one child
    subproblem per side. Results are memoized on (U, pairs). The root is the
    same construction with no pairs and a single closed cycle.
    """

    def __init__(self, coords: np.ndarray, tol: float, balance_fraction: float,
                 base_size: int, max_budget: Optional[int]):
        self.coords, self.tol = coords, tol
        self.balance_fraction, self.base_size, self.max_budget = balance_fraction, base_size, max_budget
        self.D = cdist(coords, coords)
        self.splits: Dict[FrozenSet[int], _Split] = {}
        self.memo: Dict[Tuple[FrozenSet[int], Pairs], Tuple[float, Paths]] = {}
        self.covers: Dict[FrozenSet[int], np.ndarray] = {}
        self.hamiltonian: Dict[FrozenSet[int], np.ndarray] = {}
        self.depth = 0
        self.root_budget, self.root_bound = INITIAL_CROSSING_BUDGET, INF

    def tour(self) -> Tuple[float, List[int]]:
        self.depth = 1
        cost, paths = self._divide(frozenset(range(len(self.coords))), (), 1)
        return cost, list(paths.get((), ()))

    def split(self, U: FrozenSet[int]) -> _Split:
        if U not in self.splits:
            verts = sorted(U)
            sep = _tour_separator(self.coords[verts], self.balance_fraction, self.tol)
            inside = frozenset(verts[k] for k in sep.inside)
            outside = U - inside
            edges = sorted((float(self.D[a, b]), a, b) for a in sorted(inside) for b in sorted(outside))
            prefix = np.concatenate([[0.0], np.cumsum([w for w, _, _ in edges])])
            self.splits[U] = _Split(inside, outside, sep, edges, prefix)
        return self.splits[U]

    def cover_table(self, U: FrozenSet[int]) -> np.ndarray:
        if U not in self.covers:
            idx = sorted(U)
            self.covers[U] = _path_cover_table(self.D[np.ix_(idx, idx)], len(idx))
        return self.covers[U]

    def solve(self, U: FrozenSet[int], pairs: Pairs, depth: int) -> Tuple[float, Paths]:
        key = (U, pairs)
        if key not in self.memo:
            self.depth = max(self.depth, depth)
            self.memo[key] = self._solve(U, pairs, depth)
        return self.memo[key]

    def _solve(self, U: FrozenSet[int], pairs: Pairs, depth: int) -> Tuple[float, Paths]:
        singles = {s for s, t in pairs if s == t}
        if singles:
            cost, paths = self.solve(U - singles, tuple(p for p in pairs if p[0] != p[1]), depth)
            return cost, {**paths, **{(v, v): (v,) for v in singles}}
        if not pairs:
            return (INF, {}) if U else (0.0, {})
        if 2 * len(pairs) > len(U):
            return INF, {}
        if len(U) <= self.base_size:
            return self._base(U, pairs)
        return self._divide(U, pairs, depth)

    def _base(self, U: FrozenSet[int], pairs: Pairs) -> Tuple[float, Paths]:
        """Held-Karp over the free vertices, assigning a subset to each pair in turn."""
        verts = sorted(U)
        local = {v: k for k, v in enumerate(verts)}
        if U not in self.hamiltonian:
            self.hamiltonian[U] = _hamiltonian_paths(self.D[np.ix_(verts, verts)])
        H = self.hamiltonian[U]
        ends = [(local[s], local[t]) for s, t in pairs]
        free = (1 << len(verts)) - 1
        for s, t in ends:
            free &= ~((1 << s) | (1 << t))
        table: Dict[Tuple[int, int], Tuple[float, int]] = {}

        def best(j: int, remaining: int) -> float:
            if (j, remaining) in table:
                return table[j, remaining][0]
            s, t = ends[j]
            own = (1 << s) | (1 << t)
            if j == len(ends) - 1:
                table[j, remaining] = (float(H[remaining | own, s, t]), remaining)
                return table[j, remaining][0]
            found, pick = INF, 0
            sub = remaining
            while True:
                value = H[sub | own, s, t]
                if value < found:
                    value += best(j + 1, remaining ^ sub)
                    if value < found:
                        found, pick = float(value), sub
                if sub == 0:
                    break
                sub = (sub - 1) & remaining
            table[j, remaining] = (found, pick)
            return found

        cost = best(0, free)
        if cost == INF:
            return INF, {}
        DX = self.D[np.ix_(verts, verts)]
        paths: Paths = {}
        remaining = free
        for j, ((s, t), pair) in enumerate(zip(ends, pairs)):
            pick = table[j, remaining][1]
            walk = _hamiltonian_walk(H, DX, pick | (1 << s) | (1 << t), s, t, self.tol)
            paths[pair] = tuple(verts[k] for k in walk)
            remaining ^= pick
        return cost, paths

    def _divide(self, U: FrozenSet[int], pairs: Pairs, depth: int):
        """Enumerate crossing sets under a doubling budget until a path-cover bound certifies the best."""
        sp = self.split(U)
        A, B = sp.inside, sp.outside
        cycle = not pairs
        tau_a = sum((s in A) + (t in A) for s, t in pairs)
        tau_b = 2 * len(pairs) - tau_a
        cap = min(2 * len(A) - tau_a, 2 * len(B) - tau_b, len(sp.edges))
        low = 2 if cycle else 0
        pc_a, pc_b = self.cover_table(A), self.cover_table(B)

        def sides_bound(c: int) -> float:
            ka, kb = (tau_a + c) // 2, (tau_b + c) // 2
            if ka > len(A) or kb > len(B):
                return INF
            return float(pc_a[ka] + pc_b[kb])

        def counts(lo: int, hi: int):
            return [c for c in range(max(lo, low), hi + 1) if (c - tau_a) % 2 == 0]

        best: list = [INF, None]
        budget, done = INITIAL_CROSSING_BUDGET, -1
        while True:
            for c in counts(done + 1, min(budget, cap)):
                self._enumerate(pairs, sp, c, sides_bound(c), depth, best)
            done = max(done, min(budget, cap))
            beyond = min((sides_bound(c) + sp.prefix[c] for c in counts(budget + 1, cap)), default=INF)
            logger.debug(f"|U|={len(U)} pairs={len(pairs)} budget {budget}: best {best[0]:.6f}, "
                         f"bound beyond {beyond:.6f}")
            if best[0] <= beyond + self.tol * max(1.0, best[0]):
                break
            if self.max_budget is not None and budget * 2 > self.max_budget:
                raise BudgetExhaustedError(f"no certified solution within crossing budget {self.max_budget}")
            budget *= 2
        if cycle:
            self.root_budget, self.root_bound = budget, beyond
        if best[1] is None:
            return INF, {}
        return best[0], self._assemble(pairs, *best[1])

    def _enumerate(self, pairs: Pairs, sp: _Split, c: int, side_bound: float,
                   depth: int, best: list) -> None:
        if side_bound + sp.prefix[c] >= best[0] - self.tol:
            return
        load: Dict[int, int] = {}
        for s, t in pairs:
            load[s] = load.get(s, 0) + 1
            load[t] = load.get(t, 0) + 1
        chosen: List[int] = []

        def grow(start: int, total: float) -> None:
            left = c - len(chosen)
            if left == 0:
                self._pair_ports(pairs, sp, chosen, total, depth, best)
                return
            for idx in range(start, len(sp.edges) - left + 1):
                w, a, b = sp.edges[idx]
                if total + w * left + side_bound >= best[0] - self.tol:
                    break
                if load.get(a, 0) >= 2 or load.get(b, 0) >= 2:
                    continue
                load[a] = load.get(a, 0) + 1
                load[b] = load.get(b, 0) + 1
                chosen.append(idx)
                grow(idx + 1, total + w)
                chosen.pop()
                load[a] -= 1
                load[b] -= 1

        grow(0, 0.0)

    @staticmethod
    def _matchings(ports: List[int], vertex: List[int]):
        """Pairings of ``ports``; two ports on one vertex are always joined to each other."""
        by_vertex: Dict[int, List[int]] = {}
        for p in ports:
            by_vertex.setdefault(vertex[p], []).append(p)
        forced = [tuple(ps) for ps in by_vertex.values() if len(ps) == 2]
        loose = sorted(ps[0] for ps in by_vertex.values() if len(ps) == 1)

        def extend(rest: List[int]):
            if not rest:
                yield []
                return
            head = rest[0]
            for k in range(1, len(rest)):
                for tail in extend(rest[1:k] + rest[k + 1:]):
                    yield [(head, rest[k])] + tail

        for links in extend(loose):
            yield forced + links

    def _pair_ports(self, pairs: Pairs, sp: _Split, chosen: List[int], total: float,
                    depth: int, best: list) -> None:
        m = len(pairs)
        vertex = [v for pair in pairs for v in pair]
        for idx in chosen:
            _, a, b = sp.edges[idx]
            vertex.extend((a, b))
        across = {}
        for k in range(len(chosen)):
            pa, pb = 2 * m + 2 * k, 2 * m + 2 * k + 1
            across[pa], across[pb] = pb, pa
        side_a = [p for p in range(len(vertex)) if vertex[p] in sp.inside]
        side_b = [p for p in range(len(vertex)) if vertex[p] in sp.outside]
        pc_b = self.cover_table(sp.outside)
        kb = len(side_b) // 2
        for links_a in self._matchings(side_a, vertex):
            key_a = self._key(links_a, vertex)
            for links_b in self._matchings(side_b, vertex):
                if not self._glues(m, links_a + links_b, across):
                    continue
                cost_a, _ = self.solve(sp.inside, key_a, depth + 1)
                if total + cost_a + pc_b[kb] >= best[0] - self.tol:
                    break
                key_b = self._key(links_b, vertex)
                cost_b, _ = self.solve(sp.outside, key_b, depth + 1)
                value = total + cost_a + cost_b
                if value < best[0] - self.tol:
                    best[0] = value
                    best[1] = (sp, key_a, key_b, vertex, links_a + links_b, across)

    @staticmethod
    def _key(links, vertex: List[int]) -> Pairs:
        return tuple(sorted((min(vertex[p], vertex[q]), max(vertex[p], vertex[q])) for p, q in links))

    @staticmethod
    def _glues(m: int, links, across: Dict[int, int]) -> bool:
        """True when segments and crossing edges join every pair end to end, leaving no cycle."""
        mate = {}
        for p, q in links:
            mate[p], mate[q] = q, p
        seen = 0
        if m == 0:
            start = cur = 0
            while True:
                nxt = across[mate[cur]]
                seen += 2
                if nxt == start:
                    return seen == len(across)
                cur = nxt
        for j in range(m):
            cur = 2 * j
            while True:
                q = mate[cur]
                if q < 2 * m:
                    if q != 2 * j + 1:
                        return False
                    break
                seen += 2
                cur = across[q]
        return seen == len(across)

    def _assemble(self, pairs: Pairs, sp: _Split, key_a: Pairs, key_b: Pairs,
                  vertex: List[int], links, across: Dict[int, int]):
        """Stitch child paths along the glued ports; the root returns its cycle under the key ()."""
        _, paths_a = self.solve(sp.inside, key_a, 0)
        _, paths_b = self.solve(sp.outside, key_b, 0)
        mate = {}
        for p, q in links:
            mate[p], mate[q] = q, p

        def segment(p: int, q: int) -> Tuple[int, ...]:
            u, v = vertex[p], vertex[q]
            if u == v:
                return (u,)
            found = (paths_a if u in sp.inside else paths_b)[min(u, v), max(u, v)]
            return found if found[0] == u else found[::-1]

        m = len(pairs)
        if m == 0:
            walk: List[int] = []
            cur = 0
            while True:
                q = mate[cur]
                walk.extend(segment(cur, q))
                cur = across[q]
                if cur == 0:
                    return {(): tuple(walk)}
        result: Paths = {}
        for j, pair in enumerate(pairs):
            walk, cur = [], 2 * j
            while True:
                q = mate[cur]
                walk.extend(segment(cur, q))
                if q < 2 * m:
                    break
                cur = across[q]
            result[pair] = tuple(walk)
        return result


def _boundary(order: List[int], inner: set, coords: np.ndarray) -> BoundaryCondition:
    edges = []
    for a, b in zip(order, order[1:] + order[:1]):
        if (a in inner) != (b in inner):
            edges.append((a, b))
    return BoundaryCondition(edges, [Segment(tuple(coords[a]), tuple(coords[b])) for a, b in edges])


def separator_tsp_trace(P: PointSet, tol: float = DEFAULT_TOL, max_budget: Optional[int] = None,
                        balance_fraction: float = TSP_BALANCE_FRACTION,
                        base_size: int = TSP_BASE_CASE_SIZE) -> SeparatorTourTrace:
    """Optimal tour by recursive separation, with the root split exposed.

    Every subproblem larger than ``base_size`` is split again; each split
    starts with a crossing budget of 2 and doubles it until no solution with
    more crossings can beat the best found, certified by path-cover bounds.
    Raises NoBalancedCandidateError when some subproblem has no sphere
    meeting ``balance_fraction``.
    """
    n = len(P)
    require_range("n", n, SEPARATOR_TSP_MIN_N, SEPARATOR_TSP_MAX_N)
    require_range("base_size", base_size, 2, SEPARATOR_TSP_MAX_N)
    if not 0.0 < balance_fraction <= 0.5:
        raise ParameterError(f"balance_fraction must be in (0, 0.5], got {balance_fraction}")
    coords = P.coords
    solver = _SeparatorTourSolver(coords, tol, balance_fraction, base_size, max_budget)
    root = solver.split(frozenset(range(n)))
    cost, cycle = solver.tour()
    if cost == INF:
        raise RuntimeError("separator recursion found no tour")
    order = _canonical(cycle)
    tour = Tour(order, tour_length(coords, order))
    sides = sorted([sorted(root.inside), sorted(root.outside)], key=len)
    inner, outer = sides[0], sides[1]
    logger.debug(f"Separator TSP n={n}: length {tour.length:.6f}, depth {solver.depth}, "
                 f"{len(solver.memo)} subproblems")
    return SeparatorTourTrace(tour, root.separator, _boundary(order, set(inner), coords),
                              solver.root_budget, solver.root_bound, outer, inner,
                              solver.depth, len(solver.memo))


def separator_tsp(P: PointSet, tol: float = DEFAULT_TOL, balance_fraction: float = TSP_BALANCE_FRACTION,
                  base_size: int = TSP_BASE_CASE_SIZE) -> Tour:
    return separator_tsp_trace(P, tol, balance_fraction=balance_fraction, base_size=base_size).tour
