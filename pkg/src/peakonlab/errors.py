"""Exception types shared across the package."""


class PeakonLabError(Exception):
    """Base class for all package errors."""


class SignError(PeakonLabError):
    """Peakon/antipeakon strengths violate the sign convention c1 > 0 > c2."""


class RangeError(PeakonLabError):
    """A scalar parameter is outside its admissible range."""


class SymmetricCaseError(PeakonLabError):
    """The fully symmetric collision c1 + c2 = 0 is not supported."""


class AtBreakingError(PeakonLabError):
    """Peakon pair parameters requested inside the blow-up window around t0."""


class BranchError(PeakonLabError):
    """Operation called on the wrong solution branch (e.g. alpha mismatch)."""


class BranchArgumentError(PeakonLabError):
    """A logarithm/denominator in a closed-form branch left its valid range."""


class DomainError(PeakonLabError):
    """Argument outside the domain of the requested quantity."""


class MonotonicityError(PeakonLabError):
    """A map required to be strictly increasing is not."""


class ConvergenceError(PeakonLabError):
    """An iterative inversion failed to bracket or converge."""


class BlowupError(PeakonLabError):
    """A numerically integrated field exceeded the blow-up bound."""


class NoBreakingError(PeakonLabError):
    """Breaking modification requested on a profile without a collapsed set."""
