"""Exception types raised by the simulator."""


class AtomOPOError(Exception):
    """Base class for all simulator errors."""


class NumericalError(AtomOPOError):
    """A computation could not be completed to the requested accuracy."""


class DimensionMismatch(AtomOPOError, ValueError):
    pass


class NonUniqueSteadyState(NumericalError):
    pass


class IntegrationFailure(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class SingularResolvent(NumericalError):
    pass


class InsufficientGrid(AtomOPOError, ValueError):
    pass


class GridMismatch(AtomOPOError, ValueError):
    pass


class ChannelUnavailable(AtomOPOError, ValueError):
    pass


class TruncationOverflow(NumericalError):
    """The top total-quanta shell carries more population than allowed."""


class DecayIncomplete(NumericalError):
    """A time-domain correlation has not decayed by the end of its window."""


class ConfigError(AtomOPOError, ValueError):
    pass
