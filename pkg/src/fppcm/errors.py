"""Exception types raised across the package."""


class FppError(Exception):
    """Base class for all package errors."""


class OddStubTotal(FppError):
    pass


class DeadProcess(FppError):
    """A tree-flow degree vector leaves no alive vertex before the requested step."""


class Exhausted(FppError):
    """The shortest-weight graph ran out of allowed stubs before the requested step."""


class NotConnected(FppError):
    """Source and target lie in different components."""


class InfiniteNu(FppError):
    """The operation needs a finite mean forward degree larger than one."""


class FiniteNuMisuse(FppError):
    """The operation is only defined for the infinite-variance regime 2 < tau < 3."""


class IntegrationFailure(FppError):
    pass


class EmptyInput(FppError):
    pass


class InsufficientData(FppError):
    pass


class CriticalTau(FppError):
    """tau == 3 has no limit theory."""


class ConfigError(FppError):
    pass
