from dataclasses import dataclass
from typing import Any


class PulseCoolError(Exception):
    pass


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which field, what value, and why it is wrong."""
    field: str
    value: Any
    message: str

    def __str__(self):
        return f"{self.field}={self.value!r}: {self.message}"


class ValidationError(PulseCoolError):

    def __init__(self, violations, context: str | None = None):
        self.violations = list(violations)
        self.context = context
        head = f"{context}: " if context else ""
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{head}{len(self.violations)} violation(s): {detail}")

    @property
    def fields(self):
        return [v.field for v in self.violations]


class ConfigError(ValidationError):
    pass


class NoEquilibriumError(PulseCoolError):
    """Detuning at or above resonance: the pulses heat, no finite temperature."""

    def __init__(self, delta):
        self.delta = delta
        super().__init__(f"no cooling equilibrium for detuning {delta!r} rad/s (requires delta < 0)")


class SimulationError(PulseCoolError):

    def __init__(self, message, pulse_index=None, state=None):
        self.pulse_index = pulse_index
        self.state = state
        if pulse_index is not None:
            message = f"{message} (pulse {pulse_index})"
        super().__init__(message)


class InsufficientRangeError(PulseCoolError):
    pass


class UnresolvableError(PulseCoolError):
    """Imaged width does not exceed the resolution of the optics."""
    pass


class GeometryError(PulseCoolError):
    pass


class CrossectionError(PulseCoolError):
    pass


class FitError(PulseCoolError):

    def __init__(self, message, initial=None):
        self.initial = initial
        if initial is not None:
            message = f"{message} (initial values {initial})"
        super().__init__(message)


class PulseCoolWarning(UserWarning):
    pass
