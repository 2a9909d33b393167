from __future__ import annotations
import argparse, json, os, sys, logging
from pathlib import Path
from typing import List, Optional
from pydantic import ValidationError
from .constants import (
    COMMANDS, ERROR_EXIT_CODE, GENERATOR_KINDS, PROJECT_DIR_ENV, SCALING_QUANTITIES, SETTINGS_DIR,
)
from .errors import FractalGeomError
from .harness import SIZE_FIELD, run_experiment, write_rows
from .models import ExperimentConfig, GeneratorSpec
from .settings import (
    load_and_merge_settings, get_solver_config, ensure_solver_config, write_settings, _read_json
)
from . import tui

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    "generate": "Generate a point set (carpet, cantor, grid, line, random)",
    "estimate-dim": "Fractal, box-counting and doubling dimension estimates",
    "separator": "Balanced sphere separator of the point set's MST",
    "tsp": "Exact TSP tour by separator divide and conquer",
    "tsp-compare": "Separator TSP against Held-Karp",
    "rsmt": "Exact rectilinear Steiner minimal tree (d=2)",
    "is": "k-independent set of unit balls, checked against brute force",
    "cover": "Shifted-grid eps-cover",
    "pack": "Shifted-grid eps-packing",
    "spanner": "Box-tree spanner, shortcut pruning and dilation",
    "pathwidth": "Path decomposition of the pruned spanner",
    "scaling": "Fit the growth exponent of a quantity over instance sizes",
}

def _int_list(raw: str) -> List[int]:
    return [int(x) for x in raw.split(",") if x.strip()]

def _float_list(raw: str) -> List[float]:
    return [float(x) for x in raw.split(",") if x.strip()]

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance")
    g.add_argument("--family", choices=GENERATOR_KINDS, default="carpet")
    g.add_argument("--level", type=int, help="Recursion level k (carpet, cantor)")
    g.add_argument("--n", type=int, help="Number of points (line, random, carpet-subsample)")
    g.add_argument("--dim", type=int, help="Ambient dimension (cantor, grid, random)")
    g.add_argument("--m", type=int, help="Grid side length")
    g.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--ell", type=int)
    p.add_argument("--k", type=int, help="Independent set size")
    p.add_argument("--out", help="Output prefix; writes <out>.csv and <out>.json")
    p.add_argument("--tol", type=float)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--threads", type=int)
    p.add_argument("--trace", action="store_true", help="Keep separator search traces in the JSON")
    p.add_argument("--verbose", action="store_true", help="Show verbose debug output")

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fractal-geom",
                                 description="Fractal dimension and separator algorithms for point sets")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("init", help="Write solver settings (project/global)")
    p.add_argument("--scope", choices=["project","global"])
    p.add_argument("--tol", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--log-level")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_init_or_tui)

    for command in COMMANDS:
        p = sub.add_parser(command, help=COMMAND_HELP[command])
        _add_run_flags(p)
        if command == "estimate-dim":
            p.add_argument("--eps-list", type=_float_list, help="Comma-separated box widths")
        if command == "scaling":
            p.add_argument("--sizes", type=_int_list, required=True,
                           help="Comma-separated size parameters (k, m or n by family)")
            p.add_argument("--quantity", choices=SCALING_QUANTITIES, default="pathwidth")
        p.set_defaults(func=cmd_run)
    return ap

def main(argv: Optional[List[str]] = None) -> None:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        _tui_entry(); return
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FractalGeomError, ValidationError) as e:
        _fail(e, getattr(args, "cmd", None))

def _fail(e: Exception, command: Optional[str]) -> None:
    record = {"error": type(e).__name__, "message": str(e), "command": command}
    print(json.dumps(record), file=sys.stderr)
    sys.exit(ERROR_EXIT_CODE)

def _tui_entry() -> None:
    act = tui.main_menu()
    if act == "Run experiment":
        argv = tui.experiment_menu()
        if argv: main(argv)
    elif act == "Init": cmd_init_or_tui(argparse.Namespace())
    else: sys.exit(0)

def _configure_logging(verbose: bool, level: str) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else getattr(logging, level, logging.WARNING),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

def _generator_spec(args: argparse.Namespace, seed: int) -> GeneratorSpec:
    fields = {"k": args.level, "d": args.dim, "m": args.m, "n": args.n}
    sizes = getattr(args, "sizes", None)
    size_field = SIZE_FIELD[args.family]
    # scaling sweeps the size field, so the first size stands in when it is unset
    if sizes and fields[size_field] is None:
        fields[size_field] = sizes[0]
    return GeneratorSpec(kind=args.family, seed=seed, scale=args.scale, **fields)

def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Flags first, then the merged settings files, then defaults."""
    settings, _ = load_and_merge_settings()
    solver = get_solver_config(settings)
    seed = args.seed if args.seed is not None else solver.seed
    out = args.out
    if out is None and solver.outDir:
        out = str(Path(solver.outDir) / args.cmd)
    return ExperimentConfig(
        command=args.cmd, generator=_generator_spec(args, seed),
        eps=args.eps, ell=args.ell, k=args.k, seed=seed, repetitions=args.repetitions, out=out,
        tol=args.tol if args.tol is not None else solver.tol,
        threads=args.threads if args.threads is not None else solver.threads,
        sizes=getattr(args, "sizes", None), quantity=getattr(args, "quantity", "pathwidth"),
        eps_list=getattr(args, "eps_list", None), trace=args.trace,
    )

def cmd_run(args: argparse.Namespace) -> None:
    settings, _ = load_and_merge_settings()
    _configure_logging(getattr(args, "verbose", False), get_solver_config(settings).logLevel)
    cfg = experiment_config(args)
    logger.debug(f"Running {cfg.command} with {cfg.model_dump()}")
    # an explicit --threads beats the environment variable
    report = run_experiment(cfg, threads=cfg.threads if args.threads is not None else None)
    if report.csv_path is None:
        write_rows(sys.stdout, report.columns, report.rows)
    else:
        print(f"Wrote {len(report.rows)} rows to {report.csv_path} and {report.json_path}")
        for path in report.pointset_paths:
            print(f"Wrote point set to {path}")
    if report.scaling is not None:
        print(f"Fitted exponent {report.scaling.fitted_exponent:.4f} (r2 {report.scaling.fit_r2:.4f})",
              file=sys.stderr)

def cmd_init_or_tui(args: argparse.Namespace) -> None:
    need_tui = getattr(args, "scope", None) is None
    sel = tui.init_menu() if need_tui else {
        "scope": args.scope, "tol": args.tol, "threads": args.threads,
        "seed": args.seed, "log_level": args.log_level, "out_dir": args.out_dir,
    }
    _run_init(**sel)

def _run_init(scope, tol=None, threads=None, seed=None, log_level=None, out_dir=None):
    proj = os.environ.get(PROJECT_DIR_ENV) or os.getcwd()

    if scope == "global":
        path = Path.home() / SETTINGS_DIR / "settings.json"
    else:  # project scope
        path = Path(proj) / SETTINGS_DIR / "settings.json"
    settings = _read_json(path) or {}

    settings = ensure_solver_config(settings, tol=tol, threads=threads, seed=seed,
                                    log_level=log_level, out_dir=out_dir)
    write_settings(settings, path)
    print(f"Initialized settings at {path}")
