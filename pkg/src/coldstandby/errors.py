"""Exception hierarchy.

The three top-level classes map onto the CLI exit codes: parameter problems
exit with 2, numerical-domain failures with 3 and internal-consistency
failures with 4.
"""


class ReliabilityError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ReliabilityError, ValueError):
    """An input violates an operation's precondition."""


class NumericalDomainError(ReliabilityError, ArithmeticError):
    """The requested evaluation path is undefined or unreliable for the input."""


class ConsistencyError(ReliabilityError, RuntimeError):
    """A computed result broke an invariant that should hold by construction."""


class NonPositiveLambda(ParameterError):
    pass


class NegativeMu(ParameterError):
    pass


class ElementCountTooSmall(ParameterError):
    pass


class ElementCountTooLarge(ParameterError):
    pass


class NonFiniteInput(ParameterError):
    pass


class ZeroMu(ParameterError):
    pass


class NegativeS(ParameterError):
    pass


class GridEmpty(ParameterError):
    pass


class ToleranceOutOfRange(ParameterError):
    pass


class TimeNotOnGrid(ParameterError):
    pass


class ResolutionTooSmall(ParameterError):
    pass


class EmptyGrid(ParameterError):
    pass


class EmptySamples(ParameterError):
    pass


class UnsortedSamples(ParameterError):
    pass


class InvalidTrials(ParameterError):
    pass


class EpsilonNotSmall(ParameterError):
    """Raised when a sweep is asked for mu <= lambda (epsilon >= 1)."""


class DegenerateRoots(NumericalDomainError):
    pass


class ElementCountTooLargeForClosedForm(NumericalDomainError):
    pass


class EventBudgetExceeded(ConsistencyError):
    pass
