"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for every error raised by the package."""


class ComputeError(LabError):
    """A numerical operation could not produce a trustworthy value."""


class ParseError(LabError):
    """A job or spec file failed validation."""


class DomainError(ComputeError, ValueError):
    pass


class PoleError(ComputeError, ValueError):
    pass


class BranchCutError(ComputeError, ValueError):
    pass


class NumericOverflowError(ComputeError, OverflowError):
    pass


class CapacityError(ComputeError):
    pass


class TableRangeError(ComputeError):
    pass


class NonMonotoneError(ComputeError):
    pass


class DivergenceError(ComputeError):
    pass


class ZeroGapError(ComputeError):
    pass


class HypothesisError(ComputeError):
    """A sampled hypothesis check failed.

    ``condition`` names the violated hypothesis and ``witness`` is a point
    where the violation was observed.
    """

    def __init__(self, condition, witness=None):
        self.condition = condition
        self.witness = witness
        msg = condition if witness is None else f"{condition} (witness u={witness!r})"
        super().__init__(msg)


class EmptyIntervalError(ComputeError):
    def __init__(self, x, interval=None):
        self.x = x
        self.interval = interval
        super().__init__(f"no frequency in interval starting at x={x!r}")


class ResolutionError(ComputeError):
    pass


class NotFoundError(ComputeError):
    """No witness was found; ``best_tau``/``best_error`` report the closest miss."""

    def __init__(self, message, best_tau=None, best_error=None):
        self.best_tau = best_tau
        self.best_error = best_error
        super().__init__(message)


class ZeroFactorError(ComputeError):
    pass
