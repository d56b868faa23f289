"""Exception hierarchy shared by every module."""


class ZFError(Exception):
    """Base class for all errors raised by zfcert."""


class DegenerateInput(ZFError, ValueError):
    pass


class PoleOnAxis(ZFError, ValueError):
    """Denominator vanishes on the imaginary axis at the requested frequency."""


class NotInRHInf(ZFError, ValueError):
    """Plant is improper or has poles in the closed right half plane."""


class EmptyGrid(ZFError, ValueError):
    pass


class BudgetExceeded(ZFError, ValueError):
    """Multiplier kernel L1 budget exceeds one."""


class InfiniteB(ZFError, ValueError):
    """Slope form requested with b = inf; use the monotone form instead."""


class PreconditionViolation(ZFError, ValueError):
    pass


class SolverFailure(ZFError, RuntimeError):
    """The LP solver broke down numerically or hit its iteration cap."""


class NonpositiveMargin(ZFError, ValueError):
    pass


class LengthMismatch(ZFError, ValueError):
    pass


class NoDecreasingPair(ZFError, ValueError):
    """Nonlinearity is monotone, so the alternating-block construction cannot falsify it."""


class ParameterOutOfRange(ZFError, ValueError):
    pass
