"""Exception hierarchy.

Every error raised for a violated precondition derives from ``ContractError``
so callers (and the CLI) can tell contract violations apart from bugs.
"""


class ContractError(ValueError):
    """A documented precondition or input contract was violated."""


class DegenerateRay(ContractError):
    pass


class DegenerateScale(ContractError):
    pass


class InvalidRotation(ContractError):
    pass


class InvalidIntrinsics(ContractError):
    pass


class PoseFormatError(ContractError):
    pass


class ShapeMismatch(ContractError):
    pass


class TensorFormatError(ContractError):
    pass


class InvalidSigma(ContractError):
    pass


class InvalidSchedule(ContractError):
    pass


class InsufficientFrames(ContractError):
    pass


class EmptyInput(ContractError):
    pass


class LengthMismatch(ContractError):
    pass


class DegenerateBaseline(ContractError):
    pass


class DimensionMismatch(ContractError):
    pass


class NotPSD(ContractError):
    pass
