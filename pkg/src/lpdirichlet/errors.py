"""Exception types shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(ValueError):
    """Inputs are well formed but violate an operation's precondition."""


class HorizonError(RuntimeError):
    """Not enough digits, crossings or samples to answer."""


class TruncationError(HorizonError):
    """A finite expansion ran out of digits.

    ``attained`` is the number of digits that were available.
    """

    def __init__(self, message, attained):
        super().__init__(message)
        self.attained = attained


class PrecisionError(RuntimeError):
    """Two evaluations at different working precisions disagree."""


class ResourceError(RuntimeError):
    """An enumeration bound exceeded its budget."""
