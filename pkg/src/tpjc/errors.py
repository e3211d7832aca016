"""Exception types raised across the package."""


class TPJCError(Exception):
    pass


class ParameterError(TPJCError, ValueError):
    """Inconsistent, missing or singular model parameters."""


class TruncationError(TPJCError):
    """The Fock truncation leaves more probability mass than allowed."""


class DispersiveError(TPJCError):
    """Dispersive-limit formulas requested outside their validity range."""


class StepSizeError(TPJCError):
    """RK4 step-halving gate failed."""

    def __init__(self, message, max_change=None, step=None):
        super().__init__(message)
        self.max_change = max_change
        self.step = step
