"""Exception hierarchy shared by the numerical modules."""


class TransonicError(Exception):
    """Base class for all errors raised by transonic_lab."""


class VacuumLimitError(TransonicError, ValueError):
    """Speed at or beyond the vacuum limit q_max of the gas model."""


class DegenerateDirectionError(TransonicError, ValueError):
    """c**2 - u1**2 vanishes: the chosen time axis is characteristic."""


class MultiplicityError(TransonicError, ValueError):
    """Matrix is (nearly) defective; eigenvalues are not distinct."""


class SeriesError(TransonicError, ArithmeticError):
    """Invalid truncated-series operation (e.g. division by a series with zero constant term)."""


class FrameTooLargeError(TransonicError, ValueError):
    """Eigenvalues collide, or ellipticity is lost, somewhere inside the problem frame."""


class QuadratureError(TransonicError, RuntimeError):
    """Quadrature did not reach the requested tolerance."""


class FBIOverflowError(TransonicError, OverflowError):
    """Unweighted FBI transform exceeds the floating-point range."""
