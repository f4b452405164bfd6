"""Exception types shared across the package."""


class StochparityError(Exception):
    """Base class for all package-specific errors."""


class GameFormatError(StochparityError, ValueError):
    """A game, strategy, or solution file is syntactically malformed."""


class GameValidationError(StochparityError, ValueError):
    """A parsed object violates structural invariants.

    Carries the full violation list so callers can report every problem
    at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class StrategyError(StochparityError, ValueError):
    """A strategy is malformed or does not fit the game it is used with."""


class IllegalPlayError(StochparityError, ValueError):
    """A play prefix or ultimately periodic play does not follow game edges."""


class CapExceededError(StochparityError, RuntimeError):
    """An enumeration would exceed the configured cap."""

    def __init__(self, needed: int, cap: int, what: str = "enumeration"):
        self.needed = needed
        self.cap = cap
        super().__init__(f"{what} needs {needed} cases, cap is {cap}")


class DeterminacyError(StochparityError, RuntimeError):
    """Dual enumerations disagree, or no uniformly optimal policy exists.

    Either condition signals an implementation bug, not a property of the
    input game.
    """


class StaleValuesError(StochparityError, ValueError):
    """A value map does not satisfy the local value equations of the game."""


class InconsistentGameError(StochparityError, ValueError):
    """An operation requiring a consistent game received an inconsistent one."""


class InvalidThresholdError(StochparityError, ValueError):
    """The deviation threshold m is nonpositive or infinite."""


class SimulationError(StochparityError, RuntimeError):
    """A sampling run produced no usable samples."""
