"""Exception types shared by all sfkit modules."""


class InputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class NumericalFailure(RuntimeError):
    """Raised when an algorithm cannot certify its result at the requested
    tolerance (refinement budget exhausted, non-stabilized integer, ...)."""
