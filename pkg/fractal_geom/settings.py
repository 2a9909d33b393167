from __future__ import annotations
import os, json, logging
from pathlib import Path
from typing import Optional, Tuple, Dict, Any
from pydantic import ValidationError
from .constants import PROJECT_DIR_ENV, SETTINGS_DIR, SETTINGS_KEY, THREADS_ENV
from .models import SolverConfig

logger = logging.getLogger(__name__)

def _read_json(p: Path) -> Optional[dict]:
    try:
        with p.open("r", encoding="utf-8") as f:
            return json.load(f)
    except (FileNotFoundError, json.JSONDecodeError, IOError) as e:
        logger.debug(f"Failed to read JSON file {p}: {e}")
        return None

def _write_json(p: Path, data: dict) -> None:
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False); f.write("\n")

def settings_paths(project_dir: Optional[str] = None) -> Tuple[Path, Path, Path]:
    project_dir = project_dir or os.environ.get(PROJECT_DIR_ENV) or os.getcwd()
    proj = Path(project_dir)
    return (proj/SETTINGS_DIR/"settings.local.json",
            proj/SETTINGS_DIR/"settings.json",
            Path.home()/SETTINGS_DIR/"settings.json")

def load_and_merge_settings(project_dir: Optional[str] = None) -> Tuple[Dict[str, Any], Path]:
    """Load and merge settings from global → project → local."""
    local_path, project_path, global_path = settings_paths(project_dir)

    global_settings = _read_json(global_path) or {}
    project_settings = _read_json(project_path) or {}
    local_settings = _read_json(local_path) or {}

    merged: Dict[str, Any] = {}
    for layer in (global_settings, project_settings, local_settings):
        if isinstance(layer, dict):
            _deep_merge(merged, layer)

    # Path returned is the most specific file that exists
    if local_settings:
        return merged, local_path
    elif project_settings:
        return merged, project_path
    elif global_settings:
        return merged, global_path
    else:
        return {}, project_path

def _deep_merge(base: dict, override: dict) -> None:
    """Deep merge override into base dict (modifies base in-place)."""
    for key, value in override.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value

def ensure_solver_config(settings: dict, *,
                         tol: float | None = None, threads: int | None = None,
                         seed: int | None = None, log_level: str | None = None,
                         out_dir: str | None = None) -> dict:
    cfg = settings.setdefault(SETTINGS_KEY, {})
    # Only write fields that were explicitly provided
    if tol is not None: cfg["tol"] = tol
    if threads is not None: cfg["threads"] = threads
    if seed is not None: cfg["seed"] = seed
    if log_level is not None: cfg["logLevel"] = log_level
    if out_dir is not None: cfg["outDir"] = out_dir
    return settings

def env_threads() -> Optional[int]:
    """Thread count from the environment, or None when unset or not an integer."""
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        logger.debug(f"Ignoring non-integer {THREADS_ENV}={raw!r}")
        return None

def get_solver_config(settings: dict) -> SolverConfig:
    """Solver settings from the merged file layers; the threads variable wins over files."""
    raw = dict(settings.get(SETTINGS_KEY) or {})
    threads = env_threads()
    if threads is not None:
        raw["threads"] = threads
    try:
        return SolverConfig(**raw)
    except ValidationError as e:
        logger.warning(f"Invalid {SETTINGS_KEY} settings, using defaults: {e}")
        return SolverConfig(**({"threads": threads} if threads is not None else {}))

def write_settings(settings: dict, path: Path) -> None:
    _write_json(path, settings)
