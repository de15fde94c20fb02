"""Exception hierarchy shared by every hyft module."""


class HyftError(Exception):
    """Base class for emulator errors."""


class InvalidInputError(HyftError, ValueError):
    """An operand or input vector is outside the domain of an operation."""


class ContractViolationError(HyftError, ValueError):
    """A caller broke a precondition that the hardware never sees in practice."""


class FloatOverflowError(HyftError, OverflowError):
    """Exponent exceeds the largest normal exponent of the target format."""


class InternalOverflowError(HyftError, OverflowError):
    """A fixed-point accumulator saturated; the configuration is too narrow."""
