"""Spectral densities of the zero-point and thermal radiation baths."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import OscillatorParams

ZERO_POINT = "zero-point"
THERMAL = "thermal"
COMBINED = "zero-point+thermal"
KINDS = (ZERO_POINT, THERMAL, COMBINED)

_LAURENT_CUTOFF = 1e-8


@dataclass(frozen=True)
class SpectrumKind:
    """Which radiation bath drives the oscillator.

    ``theta`` is kT/(hbar omega0).  A thermal bath at theta = 0 is allowed and
    carries no energy.
    """

    name: str = ZERO_POINT
    theta: float = 0.0

    def __post_init__(self):
        if self.name not in KINDS:
            raise ValidationError(f"unknown spectrum kind {self.name!r}; expected one of {KINDS}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise ValidationError(f"theta must be >= 0, got {self.theta!r}")
        if self.name == ZERO_POINT and self.theta != 0:
            raise ValidationError("zero-point spectrum takes no temperature")

    @classmethod
    def zero_point(cls) -> "SpectrumKind":
        return cls(ZERO_POINT)

    @classmethod
    def thermal(cls, theta: float) -> "SpectrumKind":
        return cls(THERMAL, theta)

    @classmethod
    def combined(cls, theta: float) -> "SpectrumKind":
        return cls(COMBINED, theta)

    @classmethod
    def parse(cls, name: str, theta: float = 0.0) -> "SpectrumKind":
        name = name.strip().lower().replace("_", "-")
        aliases = {"zp": ZERO_POINT, "zeropoint": ZERO_POINT, "t": THERMAL,
                   "combined": COMBINED, "zp+t": COMBINED}
        name = aliases.get(name, name)
        if name == ZERO_POINT:
            return cls(ZERO_POINT)
        return cls(name, theta)

    @property
    def has_zero_point(self) -> bool:
        return self.name in (ZERO_POINT, COMBINED)

    @property
    def has_thermal(self) -> bool:
        return self.name in (THERMAL, COMBINED) and self.theta > 0

    @property
    def is_empty(self) -> bool:
        return not (self.has_zero_point or self.has_thermal)

    def bath_factor(self, omega, omega0: float = 1.0):
        """Weight of the bath relative to zero-point: 1, coth(x) - 1 or coth(x).

        Here x = hbar omega / (2 k T).
        """
        omega = np.asarray(omega, dtype=float)
        if self.name == ZERO_POINT:
            return np.ones_like(omega)
        if self.theta == 0:
            out = np.zeros_like(omega)
            return out + 1.0 if self.name == COMBINED else out
        x = omega / (2.0 * omega0 * self.theta)
        if self.name == THERMAL:
            return coth_minus_one(x)
        return coth(x)


def coth_minus_one(x):
    """coth(x) - 1 = 2/(e^{2x} - 1), with +inf at x = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return 2.0 / np.expm1(2.0 * x)


def coth(x):
    """coth evaluated through the exponential identity, Laurent series near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) <= _LAURENT_CUTOFF
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        big = coth_minus_one(np.where(small, 1.0, x)) + 1.0
        lau = 1.0 / x + x / 3.0
    return np.where(small, lau, big)


def bose(x):
    """Occupation 1/(e^x - 1); 0 at x = +inf."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return 1.0 / np.expm1(x)


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0) or np.any(np.isnan(omega)):
        raise ValidationError("frequencies must be non-negative")
    return omega


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def zero_point_density(omega, p: OscillatorParams):
    """rho_0(omega) = hbar omega^3 / (2 pi^2 c^3)."""
    omega = _check_omega(omega)
    return _ret(p.hbar * omega**3 / (2.0 * math.pi**2 * p.c**3))


def thermal_density(omega, theta: float, p: OscillatorParams):
    """Planck spectral density hbar omega^3/(pi^2 c^3) / (e^{hbar omega/kT} - 1).

    Continuous at omega = 0 (quadratic zero) and identically zero at theta = 0.
    """
    omega = _check_omega(omega)
    if theta < 0:
        raise ValidationError("theta must be >= 0")
    out = np.zeros_like(omega)
    if theta > 0:
        pos = omega > 0
        w = omega[pos]
        out[pos] = p.hbar * w**3 / (math.pi**2 * p.c**3) * bose(w / (p.omega0 * theta))
    return _ret(out)


def thermal_amplitude(omega, theta: float, p: OscillatorParams):
    """h(omega, T) = sqrt((hbar omega/2) [coth(hbar omega/2kT) - 1])."""
    omega = _check_omega(omega)
    if np.any(omega == 0):
        raise ValidationError("thermal amplitude needs omega > 0")
    if theta == 0:
        return _ret(np.zeros_like(omega))
    h2 = 0.5 * p.hbar * omega * coth_minus_one(omega / (2.0 * p.omega0 * theta))
    return _ret(np.sqrt(h2))


def effective_field_psd(omega, kind: SpectrumKind, p: OscillatorParams):
    """One-sided PSD of the scalar driving field along the oscillator axis.

    Normalized so that (e/m)^2 times the integral of psd |chi|^2 reproduces
    the phase-averaged squared displacement; for the zero-point bath this is
    2 hbar omega^3 / (3 pi c^3) = (4 pi / 3) rho_0.
    """
    omega = _check_omega(omega)
    base = 2.0 * p.hbar * omega**3 / (3.0 * math.pi * p.c**3)
    with np.errstate(invalid="ignore"):
        out = base * kind.bath_factor(omega, p.omega0)
    # omega^3 kills the 1/omega pole of the thermal factor
    out = np.where(omega == 0, 0.0, out)
    return _ret(out)
