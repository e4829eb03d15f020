"""Physical parameters and the reduced unit system."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import ValidationError

DEFAULT_VALIDITY_BOUND = 1e-2


@dataclass(frozen=True)
class OscillatorParams:
    """Constants of a charged harmonic oscillator (Gaussian units).

    ``valid`` records whether the damping ratio gamma/omega0 is below
    ``validity_bound``; exceeding it only warns.
    """

    mass: float
    omega0: float
    charge: float
    hbar: float = 1.0
    c: float = 1.0
    k: float = 1.0
    validity_bound: float = DEFAULT_VALIDITY_BOUND
    valid: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("mass", "omega0", "hbar", "c", "k"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v!r}")
        if not math.isfinite(self.charge):
            raise ValidationError("charge must be finite")
        ok = self.gamma_ratio < self.validity_bound
        object.__setattr__(self, "valid", ok)
        if not ok:
            warnings.warn(
                f"gamma/omega0 = {self.gamma_ratio:.3g} exceeds {self.validity_bound:g}; "
                "narrow-resonance approximations degrade",
                stacklevel=3,
            )

    @property
    def tau(self) -> float:
        """Radiation-reaction time 2e^2/(3 m c^3)."""
        return 2.0 * self.charge**2 / (3.0 * self.mass * self.c**3)

    @property
    def gamma(self) -> float:
        return self.tau * self.omega0**2

    @property
    def gamma_ratio(self) -> float:
        return self.tau * self.omega0

    @property
    def length_scale(self) -> float:
        return math.sqrt(self.hbar / (self.mass * self.omega0))

    @property
    def variance_scale(self) -> float:
        """hbar/(m omega0), the unit of all reduced position variances."""
        return self.hbar / (self.mass * self.omega0)


@dataclass(frozen=True)
class ReducedParams:
    gamma_ratio: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma_ratio) and self.gamma_ratio >= 0):
            raise ValidationError(f"gamma_ratio must be >= 0, got {self.gamma_ratio!r}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise ValidationError(f"theta must be >= 0, got {self.theta!r}")

    def to_params(self, validity_bound: float = math.inf) -> OscillatorParams:
        """Oscillator in reduced units: hbar = m = omega0 = c = k = 1."""
        return OscillatorParams(
            mass=1.0,
            omega0=1.0,
            charge=math.sqrt(1.5 * self.gamma_ratio),
            validity_bound=validity_bound,
        )


def reduce(p: OscillatorParams, temperature: float = 0.0) -> ReducedParams:
    if not (math.isfinite(temperature) and temperature >= 0):
        raise ValidationError(f"temperature must be >= 0, got {temperature!r}")
    gamma_ratio = (2.0 / 3.0) * p.charge**2 * p.omega0**2 / (p.mass * p.c**3 * p.omega0)
    theta = p.k * temperature / (p.hbar * p.omega0)
    return ReducedParams(gamma_ratio, theta)


def restore(r: ReducedParams, reference: OscillatorParams) -> OscillatorParams:
    """Physical parameters with the scales of ``reference`` and the damping of ``r``.

    The charge is fixed by inverting gamma/omega0 = 2 e^2 omega0 / (3 m c^3);
    the restored charge is non-negative.
    """
    e2 = 3.0 * reference.mass * reference.c**3 * r.gamma_ratio / (2.0 * reference.omega0)
    return OscillatorParams(
        mass=reference.mass,
        omega0=reference.omega0,
        charge=math.sqrt(e2),
        hbar=reference.hbar,
        c=reference.c,
        k=reference.k,
        validity_bound=reference.validity_bound,
    )


def temperature(r: ReducedParams, reference: OscillatorParams) -> float:
    """Absolute temperature corresponding to ``r.theta`` at the reference scales."""
    return r.theta * reference.hbar * reference.omega0 / reference.k
