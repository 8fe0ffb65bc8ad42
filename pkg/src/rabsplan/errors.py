"""Exception types shared across the package."""


class RabsPlanError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(RabsPlanError, ValueError):
    """A scenario, model or experiment parameter is out of range."""


class InvalidInputError(RabsPlanError, ValueError):
    """Input data is malformed or inconsistent with the instance it refers to."""


class DomainError(RabsPlanError, ValueError):
    """A numeric argument lies outside the domain of a model function."""


class RefusedInstanceError(RabsPlanError):
    """The exact solver declined an instance that exceeds its limits."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class PlannerError(RabsPlanError, RuntimeError):
    """Internal planner failure (an LP that must be solvable was not)."""
