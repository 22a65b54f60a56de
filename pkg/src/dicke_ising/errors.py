"""Exception and warning types raised across the package."""


class DickeIsingError(Exception):
    """Base class for all package errors."""


class InvalidParameters(DickeIsingError, ValueError):
    pass


class GaplessDispersion(DickeIsingError):
    """The effective Ising dispersion closes its gap (|omega_x_tilde| == 2J)."""


class NonConverged(DickeIsingError):
    pass


class NoCrossing(DickeIsingError):
    pass


class MultipleCrossings(DickeIsingError):
    pass


class OmegaInsideBand(DickeIsingError, ValueError):
    pass


class DimensionBudgetExceeded(DickeIsingError):
    pass


class EigenNonConverged(DickeIsingError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class PoleOnGrid(RuntimeWarning):
    """|1 + V_ind chi0| fell below 1e-12 at some frequency sample."""


class NegativeDiscriminantForLowerBranch(RuntimeWarning):
    """The two-oscillator lower branch has a negative squared frequency."""


class KrylovBreakdown(RuntimeWarning):
    """Lanczos recursion hit an invariant subspace before the requested depth."""


class UsageError(DickeIsingError):
    """Bad command line or config file; the CLI exits with status 2."""


class IoError(DickeIsingError, OSError):
    """A data file could not be written or does not match the expected schema."""
