"""Exception types shared across the solver modules."""


class MCFlowError(Exception):
    """Base class for solver errors."""


class GridMismatchError(MCFlowError, ValueError):
    """Two fields (or a field and a grid) do not share a discretization."""


class ConfigError(MCFlowError, ValueError):
    """A run configuration is malformed or violates a precondition."""


class ConvergenceError(MCFlowError):
    """An iterative solver did not reach its tolerance.

    Carries the solver's report object (linear solve report, Newton state
    or minimization report) so callers can inspect what happened.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class VanishedInterfaceError(MCFlowError):
    """A diagnostic needed an interface but the field has none."""


class _IndefiniteOperator(Exception):
    """Internal: CG met a direction of non-positive curvature."""

    def __init__(self, iterate=None, iterations=0):
        super().__init__("operator is not positive definite")
        self.iterate = iterate
        self.iterations = iterations
