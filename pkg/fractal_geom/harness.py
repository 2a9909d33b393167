"""Experiment runner: dispatch a command over seeded instances, write CSV and JSON, fit exponents."""
from __future__ import annotations
import csv, json, logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple
import numpy as np
from joblib import Parallel, delayed
from joblib.parallel import cpu_count
from scipy import stats
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist
from .approx import Problem, brute_force_opt, ptas_cover, ptas_packing
from .constants import (
    BRUTE_FORCE_OPT_MAX_N, CSV_COLUMNS, DEFAULT_SAMPLE_CENTERS, MAX_RADII_PER_CENTER,
    MIN_SCALES, SEPARATOR_TSP_MAX_N,
)
from .errors import ParameterError
from .independent_set import UnitBallInstance, brute_force_independent_set, separator_independent_set
from .models import ExperimentConfig, GeneratorSpec, PointSet
from .nets import (
    estimate_box_counting_dimension, estimate_doubling_dimension, estimate_fractal_dimension,
    estimates_to_csv_rows,
)
from .pathwidth import build_path_decomposition, verify_path_decomposition
from .pointgen import generate, save_pointset
from .rsmt import exact_rsmt, l1_mst_length, rsmt_diamond_check, rsmt_separator_stats
from .separator import (
    SeparatorObjects, SphereSeparator, balance_fraction, event_spheres, find_separator,
    sampled_centers, separator_centers,
)
from .settings import env_threads
from .spanner import build_spanner, circumball_thickness, prune_shortcuts, verify_dilation
from .tsp import held_karp_tsp, separator_tsp_trace

logger = logging.getLogger(__name__)

DEFAULT_EPS = {"cover": 1.0, "pack": 1.0, "spanner": 0.5, "pathwidth": 1.0, "scaling": 1.0}
DEFAULT_ELL = 4
DEFAULT_K = 2
SIZE_FIELD = {"carpet": "k", "cantor": "k", "grid": "m", "line": "n",
              "random": "n", "carpet-subsample": "n"}

Row = Dict[str, object]


@dataclass
class ScalingReport:
    pairs: List[Tuple[float, float]]
    fitted_exponent: float
    fit_r2: float


@dataclass
class ExperimentReport:
    command: str
    rows: List[Row]
    columns: List[str]
    csv_path: Optional[Path] = None
    json_path: Optional[Path] = None
    scaling: Optional[ScalingReport] = None
    artifacts: List[dict] = field(default_factory=list)
    pointset_paths: List[Path] = field(default_factory=list)


def fit_scaling_exponent(pairs: Sequence[Tuple[float, float]]) -> ScalingReport:
    """Least-squares slope of log(value) against log(n)."""
    pairs = [(float(n), float(v)) for n, v in pairs]
    if len(pairs) < MIN_SCALES:
        raise ParameterError(f"need at least {MIN_SCALES} (n, value) pairs, got {len(pairs)}")
    if any(n <= 0 or v <= 0 for n, v in pairs):
        raise ParameterError("sizes and values must be positive")
    xs = np.log([n for n, _ in pairs])
    ys = np.log([v for _, v in pairs])
    if np.ptp(xs) == 0:
        raise ParameterError("need at least two distinct sizes")
    if np.ptp(ys) == 0:
        return ScalingReport(pairs, 0.0, 1.0)
    fit = stats.linregress(xs, ys)
    return ScalingReport(pairs, float(fit.slope), float(fit.rvalue ** 2))


def resolve_threads(configured: int) -> int:
    threads = env_threads()
    return threads if threads is not None else max(1, configured)


def parallel_computation(function: Callable, inputs: Sequence, n_jobs: int) -> list:
    if n_jobs == 1:
        return [function(inp) for inp in inputs]
    return Parallel(n_jobs=min(cpu_count(), n_jobs))(delayed(function)(inp) for inp in inputs)


def mst_separator(P: PointSet, tol: float, trace: Optional[list] = None) -> SphereSeparator:
    """Balanced sphere separator of the Euclidean MST edges of P, balanced on P."""
    coords = P.coords
    if len(P) < 2:
        raise ParameterError("a separator needs at least 2 points")
    mst = minimum_spanning_tree(cdist(coords, coords)).tocoo()
    edges = sorted((min(i, j), max(i, j)) for i, j in zip(mst.row, mst.col))
    objects = SeparatorObjects.from_edges(coords, edges)
    if len(P) <= SEPARATOR_TSP_MAX_N:
        candidates = event_spheres(objects, separator_centers(coords, P.dim + 1, tol))
    else:
        candidates = event_spheres(objects, sampled_centers(coords, DEFAULT_SAMPLE_CENTERS),
                                   MAX_RADII_PER_CENTER)
    return find_separator(objects, balance_fraction(P.dim), candidates, tol, trace=trace, fallback=True)


def _eps(cfg: ExperimentConfig) -> float:
    return cfg.eps if cfg.eps is not None else DEFAULT_EPS.get(cfg.command, 1.0)


def _ratio(a: Optional[float], b: Optional[float]) -> Optional[float]:
    return None if a is None or not b else float(a) / float(b)


def _generate(cfg: ExperimentConfig, P: PointSet, seed: int):
    return [{"dim": P.dim, "label": P.label}], {"dim": P.dim, "points": [list(p) for p in P.points],
                                               "label": P.label}


def _estimate_dim(cfg: ExperimentConfig, P: PointSet, seed: int):
    estimates = [estimate_fractal_dimension(P, tol=cfg.tol),
                 estimate_box_counting_dimension(P, cfg.eps_list),
                 estimate_doubling_dimension(P, seed=seed, tol=cfg.tol)]
    return estimates_to_csv_rows(estimates), {"samples": {e.method.value: e.samples for e in estimates}}


def _separator(cfg: ExperimentConfig, P: PointSet, seed: int):
    trace = [] if cfg.trace else None
    sep = mst_separator(P, cfg.tol, trace)
    row = {"radius": sep.sphere.radius, "inside": sep.inside_count, "outside": sep.outside_count,
           "crossing": len(sep.crossing), "balance": sep.balance}
    return [row], {**sep.to_dict(), "trace": trace}


def _tsp(cfg: ExperimentConfig, P: PointSet, seed: int):
    trace = separator_tsp_trace(P, cfg.tol)
    row = {"length": trace.tour.length, "crossing_budget": trace.crossing_budget,
           "separator_crossings": len(trace.separator.crossing)}
    return [row], {"tour": trace.tour.to_dict(P), "separator": trace.separator.to_dict(),
                   "boundary": [list(e) for e in trace.boundary.edges],
                   "depth": trace.depth, "subproblems": trace.subproblems}


def _tsp_compare(cfg: ExperimentConfig, P: PointSet, seed: int):
    hk = held_karp_tsp(P)
    sep = separator_tsp_trace(P, cfg.tol).tour
    row = {"hk_length": hk.length, "sep_length": sep.length, "length_ratio": _ratio(sep.length, hk.length)}
    return [row], {"held_karp": hk.to_dict(), "separator": sep.to_dict()}


def _rsmt(cfg: ExperimentConfig, P: PointSet, seed: int):
    tree = exact_rsmt(P, tol=cfg.tol)
    sep = rsmt_separator_stats(P, cfg.tol, tree=tree)
    row = {"length": tree.length, "mst_length": l1_mst_length(P), "steiner_points": len(tree.steiner),
           "diamonds_disjoint": rsmt_diamond_check(tree, cfg.tol),
           "sep_crossing": len(sep.crossing), "sep_balance": sep.balance}
    return [row], tree.to_dict()


def _independent_set(cfg: ExperimentConfig, P: PointSet, seed: int):
    k = cfg.k if cfg.k is not None else DEFAULT_K
    inst = UnitBallInstance(P, tol=cfg.tol)
    found = separator_independent_set(inst, k)
    oracle = brute_force_independent_set(inst, k)
    row = {"k": k, "found": found is not None, "oracle_found": oracle is not None,
           "agree": (found is None) == (oracle is None)}
    return [row], {"chosen": found.chosen if found else None}


def _cover_or_pack(cfg: ExperimentConfig, P: PointSet, seed: int):
    eps, ell = _eps(cfg), cfg.ell or DEFAULT_ELL
    if cfg.command == "cover":
        sol, problem = ptas_cover(P, eps, ell, cfg.tol), Problem.COVER
    else:
        sol, problem = ptas_packing(P, eps, ell, cfg.tol), Problem.PACKING
    opt = brute_force_opt(P, eps, problem, cfg.tol).size if len(P) <= BRUTE_FORCE_OPT_MAX_N else None
    row = {"eps": eps, "ell": ell, "size": sol.size, "opt": opt, "ratio": _ratio(sol.size, opt)}
    return [row], {"chosen": sol.chosen, "shift": list(sol.shift_index or ())}


def _spanner(cfg: ExperimentConfig, P: PointSet, seed: int):
    eps = _eps(cfg)
    G = build_spanner(P, eps)
    pruned = prune_shortcuts(G, P, eps)
    row = {"eps": eps, "edges_g": len(G), "edges_pruned": len(pruned),
           "dilation_g": verify_dilation(G, P), "dilation_pruned": verify_dilation(pruned, P)}
    thickness = {tag: asdict(r) for tag, r in circumball_thickness(pruned, P).items()}
    return [row], {"spanner": G.to_dict(), "pruned": pruned.to_dict(), "thickness": thickness}


def _pathwidth(cfg: ExperimentConfig, P: PointSet, seed: int):
    eps = _eps(cfg)
    pruned = prune_shortcuts(build_spanner(P, eps), P, eps)
    trace = [] if cfg.trace else None
    pd = build_path_decomposition(pruned, P, eps, cfg.tol, trace)
    check = verify_path_decomposition(pruned, pd)
    return [{"eps": eps, "width": pd.width, "valid": check.valid}], {**pd.to_dict(), "trace": trace}


def scaling_quantity(quantity: str, P: PointSet, eps: float, tol: float) -> float:
    if quantity == "separator":
        return float(len(mst_separator(P, tol).crossing))
    pruned = prune_shortcuts(build_spanner(P, eps), P, eps)
    if quantity == "spanner-edges":
        return float(len(pruned))
    return float(build_path_decomposition(pruned, P, eps, tol).width)


HANDLERS = {
    "generate": _generate, "estimate-dim": _estimate_dim, "separator": _separator,
    "tsp": _tsp, "tsp-compare": _tsp_compare, "rsmt": _rsmt, "is": _independent_set,
    "cover": _cover_or_pack, "pack": _cover_or_pack, "spanner": _spanner,
    "pathwidth": _pathwidth,
}


def _instance(spec: GeneratorSpec, seed: int, size: Optional[int] = None) -> PointSet:
    update = {"seed": seed}
    if size is not None:
        update[SIZE_FIELD[spec.kind]] = size
    return generate(GeneratorSpec(**{**spec.model_dump(), **update}))


def _run_one(task: Tuple[ExperimentConfig, int]) -> Tuple[List[Row], dict]:
    cfg, seed = task
    P = _instance(cfg.generator, seed)
    logger.info(f"{cfg.command}: seed {seed}, {len(P)} points ({P.label})")
    rows, artifact = HANDLERS[cfg.command](cfg, P, seed)
    return [{"seed": seed, "n": len(P), **row} for row in rows], {"seed": seed, "n": len(P), **artifact}


def _run_scaling(task: Tuple[ExperimentConfig, int, int]) -> Tuple[List[Row], dict]:
    cfg, seed, size = task
    P = _instance(cfg.generator, seed, size)
    value = scaling_quantity(cfg.quantity, P, _eps(cfg), cfg.tol)
    logger.info(f"scaling {cfg.quantity}: seed {seed}, size {size}, n={len(P)} -> {value}")
    return [{"seed": seed, "n": len(P), "quantity": cfg.quantity, "value": value}], {}


def _clean(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def write_rows(f: TextIO, columns: Sequence[str], rows: Sequence[Row]) -> None:
    writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if v is None else v for k, v in row.items()})


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Row]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        write_rows(f, columns, rows)


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None) -> ExperimentReport:
    """Run ``cfg.command`` for seeds seed..seed+repetitions-1 and write ``<out>.csv`` / ``<out>.json``."""
    n_jobs = threads if threads is not None else resolve_threads(cfg.threads)
    seeds = [cfg.seed + r for r in range(cfg.repetitions)]
    if cfg.command == "scaling":
        if not cfg.sizes:
            raise ParameterError("scaling needs --sizes")
        results = parallel_computation(_run_scaling, [(cfg, s, z) for s in seeds for z in cfg.sizes], n_jobs)
    else:
        results = parallel_computation(_run_one, [(cfg, s) for s in seeds], n_jobs)
    rows = [{k: _clean(v) for k, v in row.items()} for chunk, _ in results for row in chunk]
    rows.sort(key=lambda r: (r["seed"], r["n"]))
    artifacts = sorted((a for _, a in results if a), key=lambda a: (a["seed"], a["n"]))
    report = ExperimentReport(cfg.command, rows, CSV_COLUMNS[cfg.command], artifacts=artifacts)
    if cfg.command == "scaling":
        by_n: Dict[int, List[float]] = {}
        for row in rows:
            by_n.setdefault(row["n"], []).append(row["value"])
        pairs = [(n, float(np.mean(v))) for n, v in sorted(by_n.items())]
        try:
            report.scaling = fit_scaling_exponent(pairs)
        except ParameterError as e:
            logger.info(f"No scaling fit: {e}")
    if cfg.out:
        report.csv_path = Path(f"{cfg.out}.csv")
        report.json_path = Path(f"{cfg.out}.json")
        write_csv(report.csv_path, report.columns, rows)
        payload = {"command": cfg.command, "config": cfg.model_dump(mode="json", exclude={"threads"}),
                   "rows": rows, "artifacts": artifacts,
                   "scaling": asdict(report.scaling) if report.scaling else None}
        with report.json_path.open("w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=_clean)
            f.write("\n")
        if cfg.command == "generate":
            for a in artifacts:
                path = Path(f"{cfg.out}-{a['seed']}.points.json")
                save_pointset(PointSet(dim=a["dim"], points=[tuple(p) for p in a["points"]],
                                       label=a["label"]), path)
                report.pointset_paths.append(path)
        logger.info(f"Wrote {len(rows)} rows to {report.csv_path}")
    return report
