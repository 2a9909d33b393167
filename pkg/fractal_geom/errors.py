"""Exception types raised by fractal_geom."""


class FractalGeomError(Exception):
    """Base class for domain failures reported by the toolkit."""


class DimensionMismatchError(FractalGeomError, ValueError):
    """Two geometric values live in different ambient dimensions."""


class ParameterError(FractalGeomError, ValueError):
    """A parameter is outside the range an operation accepts."""


class NoBalancedCandidateError(FractalGeomError):
    """No candidate sphere meets the requested balance."""


class BudgetExhaustedError(FractalGeomError):
    """Iterative deepening reached its maximum crossing budget."""


class CapExceededError(FractalGeomError):
    """An exact per-cell search found nothing within its cardinality cap."""


class DisconnectedGraphError(FractalGeomError):
    """A graph expected to be connected has unreachable vertex pairs."""


class InvalidDecompositionError(FractalGeomError):
    """A path decomposition violates edge coverage or contiguity."""
