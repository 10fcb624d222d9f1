"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class DegenerateError(ArithmeticError):
    """A state, signal or measurement branch has (numerically) zero weight."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""
