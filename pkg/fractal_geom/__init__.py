__all__ = ["geometry", "pointgen", "nets", "separator", "tsp", "rsmt", "independent_set",
           "approx", "spanner", "pathwidth", "harness", "settings", "cli", "tui"]
__version__ = "0.1.0"
