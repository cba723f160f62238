"""Exception types shared across the package."""


class StableSdeError(Exception):
    """Base class for all library errors."""


class AlphaOutOfRange(StableSdeError, ValueError):
    pass


class NegativeIntensity(StableSdeError, ValueError):
    pass


class ZeroMeasure(StableSdeError, ValueError):
    pass


class Overflow(StableSdeError, OverflowError):
    pass


class WrongRegime(StableSdeError, ValueError):
    pass


class DomainError(StableSdeError, ValueError):
    pass


class NonConvergence(StableSdeError, ArithmeticError):
    pass


class InsufficientPoints(StableSdeError, ValueError):
    pass


class DivergentSequence(StableSdeError, ArithmeticError):
    pass


class BudgetExceeded(StableSdeError, ValueError):
    pass


class EmptySample(StableSdeError, ValueError):
    pass


class RegimeMismatch(StableSdeError, ValueError):
    pass


class StreamPathMismatch(StableSdeError, ValueError):
    pass


class Blowup(StableSdeError, ArithmeticError):
    """Solver state exceeded the overflow guard (step too coarse or bad coefficients)."""

    def __init__(self, message, t=None, value=None):
        super().__init__(message)
        self.t = t
        self.value = value


class DominationExceeded(StableSdeError, ArithmeticError):
    """The thinning band left the generated u-range; carries the |gamma| high-water mark."""

    def __init__(self, message, high_water=None):
        super().__init__(message)
        self.high_water = high_water


class InsufficientPaths(StableSdeError, ValueError):
    pass


class ScenarioAssumptionViolation(StableSdeError, ValueError):
    pass


class ExprSyntaxError(StableSdeError, ValueError):
    """Parse failure with byte offset and the token set that would have been accepted."""

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = tuple(expected)


class UnknownIdentifier(StableSdeError, ValueError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class EvalError(StableSdeError, ArithmeticError):
    """Evaluation hit a partial built-in (division by zero, log domain, bad pow)."""

    def __init__(self, kind, location=""):
        super().__init__(f"{kind}{f' in {location}' if location else ''}")
        self.kind = kind
        self.location = location


class ConfigError(StableSdeError, ValueError):
    pass
