"""Finite random-phase realizations of the radiation baths.

A bath is replaced by a sum of cosines,

    E(t) = sum_j a_j cos(omega_j t + phi_j),

with deterministic amplitudes a_j = sqrt(2 S_E(omega_j) d omega_j) and
independent uniform phases.  Frequencies are the midpoints of cells whose
edges combine a uniform grid with Lorentzian quantiles around omega0, so a
resonance of width gamma << omega0 is resolved with a few thousand modes.

Seeds: realization ``i`` of base seed ``s`` uses the 64-bit word produced by
``numpy.random.SeedSequence([s, i]).generate_state(1, uint64)``; phases come
from ``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import OscillatorParams
from .spectra import SpectrumKind, effective_field_psd

RNG_ALGORITHM = "numpy PCG64; realization seed = SeedSequence([base_seed, index]).generate_state(1, uint64)[0]"

STRATIFIED = "stratified"
UNIFORM = "uniform"

_CHUNK = 1 << 22  # elements per (time x mode) block


@dataclass(frozen=True)
class GridSpec:
    strategy: str = STRATIFIED
    omega_max: float | None = None
    resonant_fraction: float = 0.7

    def __post_init__(self):
        if self.strategy not in (STRATIFIED, UNIFORM):
            raise ValidationError(f"unknown grid strategy {self.strategy!r}")
        if self.omega_max is not None and not self.omega_max > 0:
            raise ValidationError("omega_max must be positive")
        if not 0 < self.resonant_fraction < 1:
            raise ValidationError("resonant_fraction must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "omega_max": self.omega_max,
                "resonant_fraction": self.resonant_fraction}


def default_omega_max(kind: SpectrumKind, omega0: float = 1.0) -> float:
    if kind.has_thermal:
        return omega0 * max(10.0, 20.0 * kind.theta)
    return 10.0 * omega0


def realization_seed(base_seed: int, index: int) -> int:
    ss = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def frequency_grid(n_modes: int, p: OscillatorParams, grid: GridSpec, omega_max: float):
    """Cell midpoints and widths covering [0, omega_max]."""
    if n_modes < 2:
        raise ValidationError("n_modes must be >= 2")
    w0, g = p.omega0, p.gamma
    if grid.strategy == UNIFORM or g == 0:
        edges = np.linspace(0.0, omega_max, n_modes + 1)
    else:
        n_res = int(round(grid.resonant_fraction * n_modes))
        n_res = min(max(n_res, 1), n_modes - 1)
        n_tail = n_modes + 2 - n_res  # endpoints are shared with res
        half = 0.5 * g
        lo = math.atan((0.0 - w0) / half)
        hi = math.atan((omega_max - w0) / half)
        res = w0 + half * np.tan(np.linspace(lo, hi, n_res + 1))
        res[0], res[-1] = 0.0, omega_max
        tail = np.linspace(0.0, omega_max, n_tail)
        edges = np.unique(np.concatenate([res, tail]))
    widths = np.diff(edges)
    keep = widths > 0
    omega = 0.5 * (edges[:-1] + edges[1:])[keep]
    return omega, widths[keep]


def check_resolution(omega, p: OscillatorParams, minimum: int = 10):
    if p.gamma == 0:
        return
    inside = np.count_nonzero(np.abs(omega - p.omega0) <= 5.0 * p.gamma)
    if inside < minimum:
        raise ValidationError(
            f"grid resolves the resonance with {inside} modes in omega0 +/- 5 gamma; "
            f"need at least {minimum} (raise n_modes or use the stratified grid)"
        )


@dataclass(frozen=True, eq=False)
class ModeEnsemble:
    omega: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    kind: SpectrumKind
    seed: int
    omega_max: float
    grid: GridSpec

    def __post_init__(self):
        for a in (self.omega, self.amplitude, self.phase):
            a.setflags(write=False)

    def __len__(self):
        return self.omega.size

    @property
    def variance(self) -> float:
        """sum a_j^2 / 2, the phase-averaged mean square field."""
        return float(0.5 * np.sum(self.amplitude**2))

    def with_phases(self, phase, seed: int) -> "ModeEnsemble":
        return ModeEnsemble(self.omega, self.amplitude, np.asarray(phase, dtype=float).copy(),
                            self.kind, seed, self.omega_max, self.grid)

    def to_dict(self) -> dict:
        return {
            "kind": {"name": self.kind.name, "theta": self.kind.theta},
            "seed": self.seed,
            "omega_max": self.omega_max,
            "grid": self.grid.to_dict(),
            "rng": RNG_ALGORITHM,
            "omega": self.omega.tolist(),
            "amplitude": self.amplitude.tolist(),
            "phase": self.phase.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ModeEnsemble":
        return cls(
            omega=np.array(d["omega"], dtype=float),
            amplitude=np.array(d["amplitude"], dtype=float),
            phase=np.array(d["phase"], dtype=float),
            kind=SpectrumKind(d["kind"]["name"], d["kind"]["theta"]),
            seed=int(d["seed"]),
            omega_max=float(d["omega_max"]),
            grid=GridSpec(**d["grid"]),
        )

    @classmethod
    def from_json(cls, s: str) -> "ModeEnsemble":
        return cls.from_dict(json.loads(s))


def draw_phases(seed: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(0.0, 2.0 * math.pi, n)


def sample_modes(kind: SpectrumKind, p: OscillatorParams, n_modes: int,
                 grid: GridSpec | None = None, seed: int = 0) -> ModeEnsemble:
    grid = grid or GridSpec()
    omega_max = grid.omega_max or default_omega_max(kind, p.omega0)
    omega, dw = frequency_grid(n_modes, p, grid, omega_max)
    check_resolution(omega, p)
    amp = np.sqrt(2.0 * effective_field_psd(omega, kind, p) * dw)
    return ModeEnsemble(omega, amp, draw_phases(seed, omega.size), kind, int(seed), omega_max, grid)


def mode_sum(omega, coeff, t, deriv: int = 0):
    """Re sum_j coeff_j (-i omega_j)^deriv exp(-i omega_j t) for scalar or array t.

    With coeff_j = a_j exp(-i phi_j) this is the cosine series and its time
    derivatives.
    """
    t = np.asarray(t, dtype=float)
    c = np.asarray(coeff, dtype=complex)
    if deriv:
        c = c * (-1j * omega) ** deriv
    flat = t.reshape(-1)
    h = _uniform_step(flat)
    if h is not None:
        out = _uniform_sum(omega, c, flat, h)
    else:
        out = np.empty(flat.size)
        step = max(1, _CHUNK // max(1, omega.size))
        for s in range(0, flat.size, step):
            ph = np.outer(flat[s:s + step], omega)
            out[s:s + step] = np.cos(ph) @ c.real + np.sin(ph) @ c.imag
    out = out.reshape(t.shape)
    return float(out) if out.ndim == 0 else out


def _uniform_step(flat):
    if flat.size < 256:
        return None
    d = np.diff(flat)
    h = d[0]
    if h > 0 and np.all(np.abs(d - h) <= 1e-9 * h):
        return float(h)
    return None


def _uniform_sum(omega, c, flat, h):
    """Mode sum on t_0 + h k: exp(-i w t) factored into block start and in-block offset."""
    n = flat.size
    K = int(math.ceil(math.sqrt(n)))
    starts = flat[::K]
    inner = np.exp(-1j * np.outer(omega, h * np.arange(K)))  # (modes, K)
    out = np.empty(starts.size * K)
    step = max(1, _CHUNK // max(1, omega.size))
    for s in range(0, starts.size, step):
        lead = c * np.exp(-1j * np.outer(starts[s:s + step], omega))
        out[s * K:(s + lead.shape[0]) * K] = (lead @ inner).real.reshape(-1)
    return out[:n]


def field_coefficients(ens: ModeEnsemble) -> np.ndarray:
    return ens.amplitude * np.exp(-1j * ens.phase)


def field_at(ens: ModeEnsemble, t):
    """E(t) = sum_j a_j cos(omega_j t + phi_j)."""
    return mode_sum(ens.omega, field_coefficients(ens), t)


def field_derivative_at(ens: ModeEnsemble, t):
    return mode_sum(ens.omega, field_coefficients(ens), t, deriv=1)


def vector_potential_at(ens: ModeEnsemble, t, c: float = 1.0):
    """Bath part of A_x with -(1/c) dA/dt = E: -c sum_j (a_j/omega_j) sin(omega_j t + phi_j)."""
    if np.any(ens.omega == 0):
        raise ValidationError("vector potential undefined for a zero-frequency mode")
    # -c * a/w * sin(x) = Re[-c * a/w * (-i) e^{-ix}] with x = w t + phi
    coeff = -c * field_coefficients(ens) / ens.omega * 1j
    return mode_sum(ens.omega, coeff, t)
