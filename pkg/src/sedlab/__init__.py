"""Charged harmonic oscillator driven by random zero-point and thermal fields.

Every result is available three ways: closed form, numerical quadrature and
Monte Carlo over random phases.  Internal computations use reduced units
(hbar = m = omega0 = c = 1) in which the only free parameters are the damping
ratio ``gamma/omega0`` and the temperature ``kT/(hbar omega0)``.
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, InstabilityError, SedError, ValidationError
from .model import OscillatorParams, ReducedParams, reduce, restore
from .spectra import SpectrumKind

__all__ = [
    "__version__",
    "ConvergenceError",
    "InstabilityError",
    "OscillatorParams",
    "ReducedParams",
    "SedError",
    "SpectrumKind",
    "ValidationError",
    "reduce",
    "restore",
]
