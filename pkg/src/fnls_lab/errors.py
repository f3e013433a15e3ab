"""Exception types shared across the lab.

Everything numeric-facing derives from ValueError or RuntimeError so
callers can stay coarse, but each failure mode keeps its own class so
tests and the CLI can tell them apart.
"""
from __future__ import annotations


class DimensionError(ValueError):
    """Array shape does not match the grid it claims to live on."""


class ResolutionError(ValueError):
    """Requested operation needs more Fourier modes than the grid has."""


class SingularMultiplierError(ValueError):
    """Negative-order multiplier applied to a field with nonzero mean."""


class DomainError(ValueError):
    """Parameter outside the mathematical domain of the operation."""


class HalfWaveError(DomainError):
    """alpha = 1 (half-wave) is excluded: the symbol |k| is non-dispersive."""


class PreconditionError(ValueError):
    """Sampled hypothesis of a lemma-check failed (e.g. derivative lower bound)."""


class ToleranceError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance.

    Carries the achieved estimate so callers can decide whether to accept it.
    """

    def __init__(self, message, estimate=None, achieved_error=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_error = achieved_error


class BlowUpError(RuntimeError):
    """Time stepping produced non-finite values or a mass jump.

    Carries the last time reached and any partial diagnostics record.
    """

    def __init__(self, message, t_reached, record=None):
        super().__init__(message)
        self.t_reached = t_reached
        self.record = record


class PicardDivergenceError(RuntimeError):
    """Fixed-point iteration failed to contract; carries the gap history."""

    def __init__(self, message, gaps):
        super().__init__(message)
        self.gaps = list(gaps)


class StiffnessError(RuntimeError):
    """Adaptive ODE step size underflowed; the driver is too stiff."""


class SpanError(ValueError):
    """Sample set too small or too narrow for a meaningful power-law fit."""


class RecordError(KeyError):
    """A diagnostics record is missing a column an analysis needs."""


class ConfigError(ValueError):
    """Config file violates the schema; message carries the field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


def require_dispersive(alpha):
    """Reject non-dispersive symbols: alpha <= 0 and the half-wave alpha = 1."""
    if alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if alpha == 1.0:
        raise HalfWaveError(
            "alpha = 1 excluded: the half-wave symbol |k| is non-dispersive "
            "on the torus")
