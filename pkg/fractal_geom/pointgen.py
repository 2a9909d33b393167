"""Deterministic point-set generators and the point-set JSON format."""
from __future__ import annotations
import itertools, json, logging
from pathlib import Path
import numpy as np
from .models import GeneratorSpec, PointSet

logger = logging.getLogger(__name__)


def rng_for(seed: int) -> np.random.Generator:
    """The one random generator used everywhere: numpy PCG64."""
    return np.random.Generator(np.random.PCG64(seed))


def carpet_coordinates(k: int) -> np.ndarray:
    """Lattice points of the level-k discrete carpet, lexicographic order.

    A point survives iff no base-3 digit position has both coordinates equal
    to 1, which is the same as recursively deleting the central subgrid.
    """
    side = 3 ** k
    xs, ys = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    xs, ys = xs.ravel(), ys.ravel()
    keep = np.ones(xs.shape, dtype=bool)
    x, y = xs.copy(), ys.copy()
    for _ in range(k):
        keep &= ~((x % 3 == 1) & (y % 3 == 1))
        x //= 3; y //= 3
    return np.column_stack([xs[keep], ys[keep]]).astype(float)


def cantor_values(k: int) -> np.ndarray:
    """Integers in [0, 3^k) whose base-3 digits are all 0 or 2."""
    values = [0]
    for level in range(k):
        step = 2 * 3 ** level
        values = sorted(values + [v + step for v in values])
    return np.asarray(values, dtype=float)


def generate(spec: GeneratorSpec) -> PointSet:
    kind = spec.kind
    if kind == "carpet":
        coords = carpet_coordinates(spec.k)
        label = f"carpet(k={spec.k})"
    elif kind == "cantor":
        values = cantor_values(spec.k)
        coords = np.asarray(list(itertools.product(values, repeat=spec.d)), dtype=float)
        label = f"cantor(k={spec.k},d={spec.d})"
    elif kind == "grid":
        coords = np.asarray(list(itertools.product(range(spec.m), repeat=spec.d)), dtype=float)
        label = f"grid(m={spec.m},d={spec.d})"
    elif kind == "line":
        coords = np.column_stack([np.arange(spec.n, dtype=float), np.zeros(spec.n)])
        label = f"line(n={spec.n})"
    elif kind == "random":
        coords = rng_for(spec.seed).random((spec.n, spec.d))
        label = f"random(n={spec.n},d={spec.d},seed={spec.seed})"
    else:
        full = carpet_coordinates(spec.k)
        picked = np.sort(rng_for(spec.seed).choice(len(full), size=spec.n, replace=False))
        coords = full[picked]
        label = f"carpet-subsample(k={spec.k},n={spec.n},seed={spec.seed})"
    coords = coords * spec.scale
    logger.debug(f"Generated {len(coords)} points for {label}")
    return PointSet.from_array(coords, label=label)


def save_pointset(ps: PointSet, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump({"dim": ps.dim, "points": [list(p) for p in ps.points], "label": ps.label}, f)
        f.write("\n")


def load_pointset(path: Path) -> PointSet:
    with Path(path).open("r", encoding="utf-8") as f:
        data = json.load(f)
    return PointSet(dim=data["dim"], points=[tuple(p) for p in data["points"]],
                    label=data.get("label", ""))
