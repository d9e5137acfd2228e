"""Exception hierarchy shared by every module."""


class AITError(Exception):
    """Base class for all library errors."""


class DivisionByZeroInterval(AITError, ZeroDivisionError):
    pass


class NonPositiveArgument(AITError, ValueError):
    pass


class TailUnbounded(AITError):
    """A rule spectrum has no certified tail majorant for the Kraft sum."""


class NoConvergenceCertificate(AITError):
    """No tail majorant certifies convergence at the requested temperature."""


class ZoneError(AITError, ValueError):
    pass


class BudgetExhausted(AITError):
    """Raised by searches that ran out of their configured budget.

    ``certificate`` optionally carries a proof-like explanation (for instance a
    certified upper bound showing the search could never have succeeded).
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class EmptyDomain(AITError, ValueError):
    pass


class PredicateFailed(AITError, ValueError):
    pass


class UnknownMachine(AITError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown machine"


class NotFound(AITError):
    pass


class PrecisionExhausted(AITError):
    pass


class Undefined(AITError):
    pass


class SpecParseError(AITError, ValueError):
    pass
