"""Exception types shared across the package."""


class FaultContainError(Exception):
    """Base class for all package errors."""


class ParameterError(FaultContainError, ValueError):
    """A generator or constructor received an invalid parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class CapacityError(FaultContainError):
    """An exact search was asked to handle more than its configured cap."""


class ContractError(FaultContainError):
    """A caller violated an operation's precondition."""


class StructuralError(FaultContainError):
    """An absorbing chain cannot be solved (absorbing state unreachable)."""


class ConstructionError(FaultContainError):
    """A built-in chain failed its own consistency check."""


class DivergenceError(FaultContainError):
    """A run did not reach a legitimate configuration within max_rounds."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(FaultContainError):
    """An experiment configuration is malformed; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
