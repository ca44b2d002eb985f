"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class NumericError(ArithmeticError):
    """A computed quantity is non-finite or violates a structural invariant."""


class CapacityError(ValueError):
    """The problem size exceeds what an exhaustive check can enumerate."""


class ScenarioNotFound(KeyError):
    pass
