"""Quantum-mechanical outputs: wavefunction, position moments, thermal density."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import factorial2

from .errors import ValidationError
from .fieldgen import ModeEnsemble, field_at, vector_potential_at
from .model import OscillatorParams, ReducedParams
from .response import (
    EXACT,
    RESONANT,
    QuadSpec,
    Trajectory,
    integrate_resonance,
    stationary_position,
    variance_closed_form,
    variance_quadrature,
)
from .spectra import SpectrumKind, coth, coth_minus_one

CLOSED = "closed"
QUADRATURE = "quadrature"


def ground_gaussian(x, p: OscillatorParams):
    """phi_0(x) = (m w0 / pi hbar)^(1/4) exp(-m w0 x^2 / 2 hbar)."""
    a = p.mass * p.omega0 / p.hbar
    x = np.asarray(x, dtype=float)
    out = (a / math.pi) ** 0.25 * np.exp(-0.5 * a * x * x)
    return float(out) if out.ndim == 0 else out


@dataclass(eq=False)
class WavefunctionSample:
    x: np.ndarray
    psi: np.ndarray
    t: float
    q_c: float
    kinetic_phase: float  # p_c + (e/c) A_x
    g: float
    p_c: float = 0.0
    vector_potential: float = 0.0

    @property
    def density(self):
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        return _trapz(self.density, self.x)

    def to_csv(self, path):
        from .io import write_csv
        write_csv(path, ["x", "re_psi", "im_psi", "abs2_psi"],
                  [self.x, self.psi.real, self.psi.imag, self.density])


def _trapz(y, x):
    fn = getattr(np, "trapezoid", None) or np.trapz
    return float(fn(y, x))


def radiation_reaction_potential(p: OscillatorParams, qdd):
    """A_RR with -(1/c) dA_RR/dt = E_RR = (2e/3c^3) q''', i.e. -(2e/3c^2) q''."""
    return -(2.0 * p.charge / (3.0 * p.c**2)) * qdd


def _phase_integral(q, qd, times, p: OscillatorParams):
    """g(t) = hbar w0 t/2 + (m/2) int_0^t (q'^2 - w0^2 q^2) dt', cumulative trapezoid."""
    integrand = qd**2 - p.omega0**2 * q**2
    return 0.5 * p.hbar * p.omega0 * (times - times[0]) + 0.5 * p.mass * cumulative_trapezoid(
        integrand, times, initial=0.0)


def _stationary_state(t, ens, p, g_step):
    if ens is None or p.charge == 0:
        # no bath or no coupling: q_c = 0 solves the equation of motion
        return 0.0, 0.0, 0.0, 0.5 * p.hbar * p.omega0 * t
    n = max(1, int(math.ceil(abs(t) / g_step - 1e-9)))
    grid = np.linspace(0.0, t, n + 1)
    q = stationary_position(ens, p, grid)
    qd = stationary_position(ens, p, grid, deriv=1)
    g = _phase_integral(q, qd, grid, p)[-1]
    qdd = stationary_position(ens, p, t, deriv=2)
    a_rr = radiation_reaction_potential(p, qdd)
    return float(q[-1]), float(qd[-1]), float(a_rr), float(g)


def _trajectory_state(t, traj: Trajectory, p):
    k = int(np.argmin(np.abs(traj.times - t)))
    dt = traj.times[1] - traj.times[0] if len(traj.times) > 1 else 1.0
    if abs(traj.times[k] - t) > 1e-9 * max(1.0, abs(dt)):
        raise ValidationError("t must be one of the trajectory sample times")
    qd_all = traj.p / p.mass
    g = _phase_integral(traj.q[:k + 1], qd_all[:k + 1], traj.times[:k + 1], p)[-1]
    ens = traj.ensemble
    # order-reduced: q''' ~ -w0^2 q' + (e/m) E', so int E_RR dt uses -w0^2 q + (e/m) E
    e_bath = field_at(ens, t) if ens is not None else 0.0
    qdd_eff = -p.omega0**2 * traj.q[k] + (p.charge / p.mass) * e_bath
    return float(traj.q[k]), float(qd_all[k]), float(radiation_reaction_potential(p, qdd_eff)), float(g)


def wavefunction(xgrid, t: float, ens: ModeEnsemble | None, p: OscillatorParams,
                 traj_source="stationary", g_step: float = 1e-3,
                 norm_tol: float = 1e-6) -> WavefunctionSample:
    """Exact displaced-Gaussian solution of the Schrodinger equation with A_x(t).

    ``traj_source`` is ``"stationary"`` (analytic mode sums, exact damping)
    or a :class:`Trajectory` from the order-reduced integrator, in which case
    ``t`` must be a sample time and g(t) is accumulated from the first sample.
    A_x is the bath potential plus the radiation-reaction potential.
    """
    x = np.asarray(xgrid, dtype=float)
    if isinstance(traj_source, Trajectory):
        q, qd, a_rr, g = _trajectory_state(t, traj_source, p)
        ens = traj_source.ensemble if ens is None else ens
    elif traj_source == "stationary":
        q, qd, a_rr, g = _stationary_state(t, ens, p, g_step)
    else:
        raise ValidationError(f"unknown trajectory source {traj_source!r}")
    a_bath = vector_potential_at(ens, t, p.c) if ens is not None else 0.0
    a_x = a_bath + a_rr
    p_c = p.mass * qd
    kin = p_c + p.charge / p.c * a_x
    psi = ground_gaussian(x - q, p) * np.exp(1j / p.hbar * (kin * x - g))
    out = WavefunctionSample(x, psi, float(t), q, kin, g, p_c, a_x)
    if x.size > 1:
        norm = _trapz(out.density, x)
        if abs(norm - 1.0) > norm_tol:
            raise ValidationError(f"grid does not resolve the wavefunction (norm {norm:.9f})")
    return out


def schrodinger_rhs(psi, x, a_x: float, p: OscillatorParams):
    """H psi with 4th-order central differences; the two edge points on each side are zero."""
    dx = x[1] - x[0]
    d1 = np.zeros_like(psi)
    d2 = np.zeros_like(psi)
    d1[2:-2] = (-psi[4:] + 8 * psi[3:-1] - 8 * psi[1:-3] + psi[:-4]) / (12 * dx)
    d2[2:-2] = (-psi[4:] + 16 * psi[3:-1] - 30 * psi[2:-2] + 16 * psi[1:-3] - psi[:-4]) / (12 * dx * dx)
    b = p.charge / p.c * a_x
    # (1/2m)(-i hbar d/dx - b)^2 = (1/2m)(-hbar^2 d2 + 2 i hbar b d1 + b^2)
    kinetic = (-p.hbar**2 * d2 + 2j * p.hbar * b * d1 + b * b * psi) / (2 * p.mass)
    out = kinetic + 0.5 * p.mass * p.omega0**2 * x * x * psi
    out[:2] = out[-2:] = 0
    return out


def schrodinger_residual(xgrid, t: float, ens, p: OscillatorParams, h: float = 1e-3,
                         g_step: float = 1e-4) -> float:
    """max |i hbar psi_t - H psi| / max |H psi| for the stationary solution.

    psi_t uses a five-point stencil in t; ``h`` should be a multiple of ``g_step``
    so that the phase integrals at neighbouring times share nodes.
    """
    x = np.asarray(xgrid, dtype=float)
    samples = [wavefunction(x, t + k * h, ens, p, g_step=g_step) for k in (-2, -1, 0, 1, 2)]
    psis = [s.psi for s in samples]
    dpsi = (psis[0] - 8 * psis[1] + 8 * psis[3] - psis[4]) / (12 * h)
    h_psi = schrodinger_rhs(psis[2], x, samples[2].vector_potential, p)
    res = 1j * p.hbar * dpsi - h_psi
    res[:2] = res[-2:] = 0
    return float(np.max(np.abs(res)) / np.max(np.abs(h_psi)))


def shifted_ground_density(x, q_c: float, p: OscillatorParams):
    a = p.mass * p.omega0 / p.hbar
    return math.sqrt(a / math.pi) * np.exp(-a * (np.asarray(x) - q_c) ** 2)


def mean_square_x(kind: SpectrumKind, r: ReducedParams, route: str = CLOSED,
                  model: str = RESONANT, quad: QuadSpec = QuadSpec()) -> float:
    """<x^2> = hbar/(2 m w0) + <q_c^2>, in units hbar/(m w0).

    With the zero-point bath this is close to 1 rather than 1/2.
    """
    if route == CLOSED:
        return 0.5 + variance_closed_form(kind, r)
    if route == QUADRATURE:
        return 0.5 + variance_quadrature(kind, r, quad, model)
    raise ValidationError(f"unknown route {route!r}")


def thermal_variance(theta: float) -> float:
    """hbar [coth(hbar w0/2kT) - 1] / (2 m w0) in reduced units."""
    if theta == 0:
        return 0.0
    return 0.5 * float(coth_minus_one(0.5 / theta))


def gaussian_moment(n: int, variance: float) -> float:
    """<q^{2n}> = (2n)!/(n! 2^n) sigma^{2n} for a centred Gaussian."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    return float(factorial2(2 * n - 1, exact=True)) * variance**n if n else 1.0


def characteristic_function(k, variance: float, method: str = "closed", n_terms: int | None = None):
    """<exp(i k q)> for a centred Gaussian q: exp(-k^2 sigma^2 / 2).

    ``method="series"`` sums (-1)^n k^{2n} <q^{2n}>/(2n)! term by term, stopping
    after ``n_terms`` terms or once a term drops below 1e-16.
    """
    k = np.asarray(k, dtype=float)
    if method == "closed":
        out = np.exp(-0.5 * k * k * variance)
    elif method == "series":
        # ratio of consecutive terms: -(k^2 s^2 / 2) / n
        y = -0.5 * k * k * variance
        term = np.ones_like(k)
        out = np.ones_like(k)
        n = 1
        limit = n_terms if n_terms is not None else 10_000
        while n < limit:
            term = term * y / n
            out = out + term
            if n_terms is None and np.all(np.abs(term) < 1e-16):
                break
            n += 1
    else:
        raise ValidationError(f"unknown method {method!r}")
    return float(out) if out.ndim == 0 else out


def thermal_density(x, r: ReducedParams):
    """P_T(x), the phase-averaged |psi|^2 in a thermal bath (reduced units).

    Gaussian of variance coth(1/(2 theta))/2; the oscillator frequency is
    used in both the prefactor and the exponent.
    """
    ct = 1.0 if r.theta == 0 else float(coth(0.5 / r.theta))
    x = np.asarray(x, dtype=float)
    out = np.sqrt(1.0 / (math.pi * ct)) * np.exp(-x * x / ct)
    return float(out) if out.ndim == 0 else out


def commutator_integrand(gamma_ratio: float, model: str = RESONANT):
    """(e^2/m)(8 pi/3) omega rho_0 / |denominator|^2 in units of hbar, vs u = omega - 1."""
    g = gamma_ratio
    pre = 2.0 * g / math.pi
    if model == EXACT:
        def f(u):
            om = 1.0 + u
            if om <= 0:
                return 0.0
            d = u * (2.0 + u)
            if om > 2.0:
                s = om**3
                return pre / (om * om * ((d / s) ** 2 + g * g))
            return pre * om**4 / (d * d + g * g * om**6)
    elif model == RESONANT:
        def f(u):
            return pre / (4.0 * u * u + g * g)
    else:
        raise ValidationError("commutator models: 'resonant' or 'exact'")
    return f


def commutator_integral(r: ReducedParams, quad: QuadSpec = QuadSpec(), model: str = RESONANT) -> float:
    """Magnitude of [x, p]/i in units of hbar.

    The resonant model gives 1 - g/(2 pi) + ...  The exact ω^3 damping keeps
    a high-frequency plateau that contributes another unit as g -> 0.
    """
    if r.gamma_ratio <= 0:
        raise ValidationError("commutator needs gamma_ratio > 0")
    return integrate_resonance(commutator_integrand(r.gamma_ratio, model), r.gamma_ratio, None, quad)


def commutator_raw(p: OscillatorParams, quad: QuadSpec = QuadSpec(), model: str = RESONANT) -> float:
    """The commutator integral in physical units (action), linear in hbar."""
    from .model import reduce
    return p.hbar * commutator_integral(reduce(p), quad, model)


@dataclass
class VarianceReport:
    label: str
    closed_form: float
    quadrature: float
    monte_carlo: float | None = None
    stderr: float | None = None
    gamma_ratio: float = 0.0
    theta: float = 0.0
    formula: str = ""
    consistent: bool | None = None
    extras: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def check(self, n_se: float = 4.0, rel_tol: float | None = None) -> bool:
        """MC within ``n_se`` standard errors of quadrature; closed vs quadrature within ``rel_tol``."""
        ok = True
        if rel_tol is not None:
            ok &= abs(self.closed_form - self.quadrature) <= rel_tol * abs(self.quadrature) + 1e-15
        if self.monte_carlo is not None:
            se = self.stderr or 0.0
            ok &= abs(self.monte_carlo - self.quadrature) <= n_se * se + 1e-12 * max(1.0, abs(self.quadrature))
        self.consistent = bool(ok)
        return self.consistent

    def to_dict(self) -> dict:
        return {
            "label": self.label, "formula": self.formula,
            "closed_form": self.closed_form, "quadrature": self.quadrature,
            "monte_carlo": self.monte_carlo, "stderr": self.stderr,
            "gamma_ratio": self.gamma_ratio, "theta": self.theta,
            "consistent": self.consistent, "extras": self.extras, "metadata": self.metadata,
        }
