"""Exception hierarchy shared by every radonlab module."""


class RadonlabError(Exception):
    """Base class for all library errors."""


class IntegerOverflow(RadonlabError):
    """An exact integer left the 128-bit signed range."""


class DegenerateInput(RadonlabError):
    pass


class InvalidExponent(RadonlabError):
    pass


class NonIntegerValued(RadonlabError):
    pass


class WindowTooLarge(RadonlabError):
    """A dense window would exceed the configured cell budget."""


class NegativeInput(RadonlabError):
    pass


class ZeroInput(RadonlabError):
    pass


class NonInjective(RadonlabError):
    pass


class BudgetExceeded(RadonlabError):
    pass


class DegenerateFit(RadonlabError):
    pass


class InvalidCollection(RadonlabError):
    pass


class TruncationNotExact(UserWarning):
    """Emitted when a user-supplied truncation drops nonzero terms."""
