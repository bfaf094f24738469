"""Exception types raised by the physics and runner layers."""


class RecollideError(Exception):
    """Base class for package errors."""


class ConfigError(RecollideError):
    """Invalid or inconsistent run configuration."""


class ConvergenceError(RecollideError):
    """A numerical convergence check failed (e.g. partial-wave sum not converged)."""


class NoBoundStates(RecollideError):
    """The potential well supports no bound states on the given grid."""


class GridTooCoarse(RecollideError):
    """Node counting is inconsistent under grid refinement."""


class EnergyBelowAsymptote(RecollideError):
    """Requested continuum energy lies below the dissociation asymptote."""


class GridMismatch(RecollideError):
    """Operands were sampled on different radial grids."""


class NoReturn(RecollideError):
    """Birth phase admits no real recollision solution."""


class TravelTooShort(RecollideError):
    """Excursion time below the validity cutoff of the spreading prefactor."""


class ZeroField(RecollideError):
    """Instantaneous field magnitude is zero where a finite value is required."""


class ClosedChannel(RecollideError):
    """Energy-shell incident momentum is imaginary (channel closed)."""


class SliceOutOfRange(RecollideError):
    """Requested coincidence slice lies outside the computed grids."""
