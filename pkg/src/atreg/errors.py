"""Exception hierarchy shared by all atreg modules."""


class ATRegError(Exception):
    """Base class for every error raised by atreg."""


class DimensionMismatch(ATRegError, ValueError):
    pass


class InvalidSize(ATRegError, ValueError):
    pass


class SizeLimit(ATRegError, ValueError):
    """Dense materialization requested beyond the configured cap."""


class InvalidNoise(ATRegError, ValueError):
    pass


class InvalidReference(ATRegError, ValueError):
    pass


class FormatError(ATRegError, ValueError):
    """Malformed PGM file."""


class NumericalFailure(ATRegError, ArithmeticError):
    pass


class RankDeficient(NumericalFailure):
    """Least-squares matrix is numerically rank deficient.

    The detected numerical rank is available as ``rank``.
    """

    def __init__(self, msg, rank):
        super().__init__(msg)
        self.rank = rank


class Singular(NumericalFailure):
    pass


class ZeroStartVector(ATRegError, ValueError):
    pass


class BreakdownError(ATRegError, RuntimeError):
    """Arnoldi step requested after an invariant subspace was found."""


class MonotonicityViolation(NumericalFailure):
    """GMRES residual increased between steps; orthogonality was lost."""
