"""Exception types shared across the package."""


class FiberflowError(Exception):
    """Base class for all package errors."""


class GeometryError(FiberflowError, ValueError):
    """Malformed geometric input (empty fiber, bad shape, ...)."""


class ScenarioFormatError(FiberflowError, ValueError):
    """Scenario file failed to parse or violates the documented schema."""


class ScenarioValidationError(FiberflowError, ValueError):
    """Scenario parsed fine but the geometry or the section is invalid."""


class PreconditionError(FiberflowError, RuntimeError):
    """An operation refused to run because its preconditions do not hold."""
