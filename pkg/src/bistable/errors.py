"""Exception hierarchy shared by the solvers and the verification harness."""


class BistableError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(BistableError, ValueError):
    """Vector lengths do not match the spectrum."""


class ParameterError(BistableError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DomainError(BistableError, ValueError):
    """An unbounded operator was applied outside its domain."""


class ModelError(BistableError, ValueError):
    """The spectral model cannot support the requested computation."""


class CertificationError(BistableError, ValueError):
    """A certified bound (Lipschitz constant, contraction factor) is violated."""


class DivergenceError(BistableError, RuntimeError):
    """Fixed-point iteration failed to converge."""

    def __init__(self, message, iterations=None, rate=None):
        super().__init__(message)
        self.iterations = iterations
        self.rate = rate


class PreconditionError(BistableError, ValueError):
    """Inputs to a verification check do not satisfy its hypotheses."""
