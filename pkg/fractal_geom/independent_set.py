"""k-independent set of unit balls: brute-force oracle and separator divide and conquer."""
from __future__ import annotations
import itertools, logging, math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
import numpy as np
from scipy.spatial.distance import cdist
from .constants import (
    DEFAULT_ALLOW_TANGENT, DEFAULT_TOL, IS_BASE_CASE_SIZE, IS_BRUTE_MAX_N,
    IS_SEPARATOR_MAX_K, IS_SEPARATOR_MAX_N,
)
from .errors import ParameterError
from .models import PointSet
from .separator import SeparatorObjects, SphereSeparator, balance_fraction, event_spheres, find_separator, separator_centers
from .validators import require_range

logger = logging.getLogger(__name__)


@dataclass
class UnitBallInstance:
    """Closed unit balls around ``centers``; tangent balls count as disjoint when allowed."""
    centers: PointSet
    allow_tangent: bool = DEFAULT_ALLOW_TANGENT
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.centers.dim < 2:
            raise ParameterError(f"unit-ball instances need d >= 2, got {self.centers.dim}")

    def __len__(self) -> int:
        return len(self.centers)

    def conflicts(self) -> np.ndarray:
        D = cdist(self.centers.coords, self.centers.coords)
        clash = D < 2.0 - self.tol if self.allow_tangent else D <= 2.0 + self.tol
        np.fill_diagonal(clash, False)
        return clash

    def adjacency(self) -> List[int]:
        return [int(sum(1 << int(j) for j in np.flatnonzero(row))) for row in self.conflicts()]


@dataclass
class ISolution:
    chosen: List[int]

    def is_valid(self, inst: UnitBallInstance) -> bool:
        clash = inst.conflicts()
        return not any(clash[i, j] for i, j in itertools.combinations(self.chosen, 2))


@dataclass
class SearchStats:
    nodes: int = 0
    memo_hits: int = 0
    max_crossing_guess: int = 0
    fallbacks: int = 0
    balances: List[float] = field(default_factory=list)


def max_independent_subset(adj: Sequence[int], mask: int, cap: int) -> Tuple[int, ...]:
    """Largest independent set inside ``mask`` (at most ``cap`` vertices), by branch and bound."""
    best: List[int] = []
    chosen: List[int] = []

    def branch(mask: int) -> None:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        if len(best) >= cap or mask == 0:
            return
        if len(chosen) + bin(mask).count("1") <= len(best):
            return
        v = (mask & -mask).bit_length() - 1
        chosen.append(v)
        branch(mask & ~adj[v] & ~(1 << v))
        chosen.pop()
        if len(best) < cap:
            branch(mask & ~(1 << v))

    if cap > 0:
        branch(mask)
    return tuple(sorted(best[:cap]))


def brute_force_independent_set(inst: UnitBallInstance, k: int) -> Optional[ISolution]:
    """First pairwise-disjoint k-subset in lexicographic order, or None."""
    n = len(inst)
    require_range("n", n, 0, IS_BRUTE_MAX_N)
    require_range("k", k, 0)
    if k > n:
        return None
    adj = inst.adjacency()
    chosen: List[int] = []

    def extend(start: int, allowed: int) -> bool:
        if len(chosen) == k:
            return True
        for i in range(start, n):
            if bin(allowed >> i).count("1") < k - len(chosen):
                return False
            if not (allowed >> i) & 1:
                continue
            chosen.append(i)
            if extend(i + 1, allowed & ~adj[i] & ~((1 << (i + 1)) - 1)):
                return True
            chosen.pop()
        return False

    return ISolution(list(chosen)) if extend(0, (1 << n) - 1) else None


class _SeparatorSearch:
    """Maximum independent set (capped) by guessing the solution balls a separator crosses."""

    def __init__(self, inst: UnitBallInstance, stats: SearchStats):
        self.inst, self.stats = inst, stats
        self.coords = inst.centers.coords
        self.d = inst.centers.dim
        self.adj = inst.adjacency()
        self.fraction = balance_fraction(self.d)
        self.side = (2.0 - 2.0 * inst.tol) / math.sqrt(self.d)
        self.memo: Dict[Tuple[FrozenSet[int], int], Tuple[int, ...]] = {}
        self.separators: Dict[FrozenSet[int], SphereSeparator] = {}

    def cell_bound(self, V: FrozenSet[int]) -> int:
        """Balls whose centers share a grid cell of side (2-2tol)/sqrt(d) all intersect."""
        if not V:
            return 0
        cells = np.floor(self.coords[sorted(V)] / self.side).astype(np.int64)
        return len(np.unique(cells, axis=0))

    def separator(self, members: List[int]) -> SphereSeparator:
        key = frozenset(members)
        if key not in self.separators:
            pts = self.coords[members]
            objects = SeparatorObjects.from_ball_arrays(pts, np.ones(len(members)))
            candidates = event_spheres(objects, separator_centers(pts, self.d + 1, self.inst.tol))
            self.separators[key] = find_separator(objects, self.fraction, candidates,
                                                  self.inst.tol, fallback=True)
        return self.separators[key]

    def base(self, V: FrozenSet[int], cap: int) -> Tuple[int, ...]:
        mask = sum(1 << i for i in V)
        return max_independent_subset(self.adj, mask, cap)

    def solve(self, V: FrozenSet[int], cap: int) -> Tuple[int, ...]:
        key = (V, cap)
        if key in self.memo:
            self.stats.memo_hits += 1
            return self.memo[key]
        self.stats.nodes += 1
        cap = min(cap, len(V), self.cell_bound(V))
        if cap <= 0:
            result: Tuple[int, ...] = ()
        elif len(V) <= IS_BASE_CASE_SIZE:
            result = self.base(V, cap)
        else:
            result = self.split(V, cap)
        self.memo[key] = result
        return result

    def split(self, V: FrozenSet[int], cap: int) -> Tuple[int, ...]:
        members = sorted(V)
        sep = self.separator(members)
        if sep.balance >= 1.0:
            self.stats.fallbacks += 1
            return self.base(V, cap)
        if sep.balance > 1.0 - self.fraction:
            self.stats.fallbacks += 1
        self.stats.balances.append(sep.balance)
        inside = [members[i] for i in sep.inside]
        outside = [members[i] for i in sep.outside]
        crossing = [members[i] for i in sep.crossing]
        best: Tuple[int, ...] = ()
        for q in range(min(cap, len(crossing)) + 1):
            for Q in itertools.combinations(crossing, q):
                if any((self.adj[a] >> b) & 1 for a, b in itertools.combinations(Q, 2)):
                    continue
                self.stats.max_crossing_guess = max(self.stats.max_crossing_guess, q)
                blocked = 0
                for a in Q:
                    blocked |= self.adj[a]
                vin = frozenset(i for i in inside if not (blocked >> i) & 1)
                vout = frozenset(i for i in outside if not (blocked >> i) & 1)
                if q + self.cell_bound(vin) + self.cell_bound(vout) <= len(best):
                    continue
                a = self.solve(vin, cap - q)
                b = self.solve(vout, cap - q - len(a))
                if q + len(a) + len(b) > len(best):
                    best = tuple(sorted(Q + a + b))
                if len(best) >= cap:
                    return best
        return best


def separator_independent_set(inst: UnitBallInstance, k: int,
                              stats: Optional[SearchStats] = None) -> Optional[ISolution]:
    """k pairwise-disjoint unit balls, or None, by separator-guided divide and conquer.

    Each node guesses which solution balls the separator sphere crosses (in
    increasing number) and recurses on the strictly inside and strictly
    outside balls not touching the guess.
    """
    n = len(inst)
    require_range("n", n, 0, IS_SEPARATOR_MAX_N)
    require_range("k", k, 0, IS_SEPARATOR_MAX_K)
    if k > n:
        return None
    if k == 0:
        return ISolution([])
    stats = SearchStats() if stats is None else stats
    search = _SeparatorSearch(inst, stats)
    found = search.solve(frozenset(range(n)), k)
    logger.debug(f"Independent set n={n} k={k}: best {len(found)}, nodes {stats.nodes}, "
                 f"memo hits {stats.memo_hits}, max guess {stats.max_crossing_guess}")
    return ISolution(list(found[:k])) if len(found) >= k else None
