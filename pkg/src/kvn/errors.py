"""Exception hierarchy shared by every kvn module."""


class KvnError(Exception):
    """Base class for all library errors."""


class ParseError(KvnError, ValueError):
    """Input file is not well-formed."""


class ValidationError(KvnError, ValueError):
    """Input parsed but violates a structural invariant."""


class InvalidParams(ValidationError):
    pass


class SolverError(KvnError, ArithmeticError):
    """Base class for numerical failures."""


class NotPositiveDefinite(SolverError):
    pass


class ConvergenceError(SolverError):
    pass


class TolTooCoarse(SolverError):
    """The spectral gap around the kernel threshold is too small to decide."""


class NotStrictlyPositive(SolverError):
    pass


class RankDeficient(SolverError):
    pass


class KernelMismatch(SolverError):
    pass


class NegativeTime(KvnError, ValueError):
    pass


class RootBracketFailure(SolverError):
    pass


class DegenerateDifference(SolverError):
    pass
