from __future__ import annotations
import os
from pathlib import Path
from typing import List, Optional
import questionary as q
from .constants import COMMANDS, GENERATOR_KINDS, PROJECT_DIR_ENV, SETTINGS_DIR

# size flags each family needs, with the menu default
FAMILY_FIELDS = {
    "carpet": [("--level", "2")],
    "cantor": [("--level", "3"), ("--dim", "1")],
    "grid": [("--m", "8"), ("--dim", "2")],
    "line": [("--n", "64")],
    "random": [("--n", "10"), ("--dim", "2")],
    "carpet-subsample": [("--level", "2"), ("--n", "10")],
}

def detect_scope_default() -> str:
    here = os.environ.get(PROJECT_DIR_ENV) or os.getcwd()
    return "project" if (Path(here)/SETTINGS_DIR).exists() else "global"

def main_menu():
    return q.select("What do you want to do?", choices=["Run experiment", "Init", "Exit"]).ask()

def experiment_menu() -> Optional[List[str]]:
    """Ask for a command and its instance; returns the equivalent command-line arguments."""
    command = q.select("Command?", choices=list(COMMANDS), default="estimate-dim").ask()
    if command is None:
        return None
    family = q.select("Point family?", choices=list(GENERATOR_KINDS), default="carpet").ask()
    argv = [command, "--family", family]
    for flag, default in FAMILY_FIELDS[family]:
        argv += [flag, q.text(f"{flag[2:]}:", default=default).ask() or default]
    seed = q.text("Seed:", default="0").ask()
    argv += ["--seed", seed or "0"]
    if command in ("cover", "pack", "spanner", "pathwidth", "scaling"):
        eps = q.text("eps:", default="1.0" if command != "spanner" else "0.5").ask()
        if eps: argv += ["--eps", eps]
    if command in ("cover", "pack"):
        argv += ["--ell", q.text("ell:", default="4").ask() or "4"]
    if command == "is":
        argv += ["--k", q.text("k:", default="2").ask() or "2"]
    if command == "scaling":
        argv += ["--sizes", q.text("Sizes (comma-separated):", default="1,2,3").ask() or "1,2,3",
                 "--quantity", q.select("Quantity?", choices=["pathwidth", "separator", "spanner-edges"],
                                        default="pathwidth").ask()]
    out = q.text("Output prefix (empty = print CSV):", default="").ask()
    if out: argv += ["--out", out]
    return argv

def init_menu():
    scope = q.select("Scope?", choices=["project","global"], default=detect_scope_default()).ask()
    tol = q.text("Geometric tolerance:", default="1e-9").ask()
    threads = q.text("Worker threads:", default="1").ask()
    seed = q.text("Default seed:", default="0").ask()
    log_level = q.select("Log level?", choices=["DEBUG","INFO","WARNING","ERROR"], default="WARNING").ask()
    out_dir = q.text("Default output directory (empty = none):", default="").ask()
    return {
        "scope": scope,
        "tol": float(tol or "1e-9"),
        "threads": int(threads or "1"),
        "seed": int(seed or "0"),
        "log_level": log_level,
        "out_dir": out_dir or None,
    }
