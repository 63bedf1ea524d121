"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class MomentDivergenceError(ArithmeticError):
    """A requested moment (or moment-based quantity) is infinite."""


class MeanSignError(ValueError):
    """Lorenz/Gini quantities need a strictly positive mean."""


class NoPowerTailError(ValueError):
    """The distribution has no Pareto upper tail (kappa == 0)."""


class AtomError(ValueError):
    """Density requested at the atom; use ``MixtureParams.atom_mass``."""


class ImpossibleLikelihoodError(ValueError):
    """Observations fall where the model puts zero probability mass."""


class InsufficientDataError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Optimizer gave up. ``last_iterate`` holds the final parameter vector."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class BoundaryError(ValueError):
    """Model CDF equals 0 or 1 at an observation."""


class DegenerateComparisonError(ValueError):
    pass


class UnreliablePValueError(RuntimeError):
    pass


class IngestError(ValueError):
    pass


class ZeroVarianceError(ValueError):
    """Standardized moments of a constant sample are undefined."""


class IndexBaseError(ValueError):
    """Base point for index numbers is missing or zero."""


class NoDataError(IngestError):
    """Input parsed, but no usable rows remain."""
