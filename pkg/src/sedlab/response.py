"""Driven, radiation-damped oscillator.

Three models of the phase-averaged squared displacement are provided:

``exact``
    Susceptibility 1/(omega0^2 - omega^2 - i tau omega^3), integrated over
    the whole half line.  For the zero-point bath the integrand decays only
    as 1/omega until omega ~ 1/tau, which adds a term of order
    gamma ln(omega0/gamma) to the result.
``lorentzian``
    Susceptibility 1/(omega0^2 - omega^2 - i gamma omega).  Converges for
    thermal baths; diverges logarithmically for the zero-point bath unless an
    upper cutoff is given.
``resonant``
    Sharp-peak form: spectral weight frozen at omega0 and the denominator
    replaced by 4 omega0^2 (omega - omega0)^2 + gamma^2 omega0^2.  Its
    integral is the arctan closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
from scipy.signal import lfilter

from .errors import ConvergenceError, InstabilityError, ValidationError
from .fieldgen import ModeEnsemble, field_coefficients, mode_sum
from .model import OscillatorParams, ReducedParams
from .spectra import SpectrumKind, bose, coth

EXACT = "exact"
LORENTZIAN = "lorentzian"
ORDER_REDUCED = "order-reduced"
RESONANT = "resonant"
MODELS = (EXACT, LORENTZIAN, RESONANT)


@dataclass(frozen=True)
class QuadSpec:
    epsrel: float = 1e-10
    epsabs: float = 0.0
    limit: int = 500


def susceptibility(omega, p: OscillatorParams, variant: str = EXACT):
    """Complex response chi(omega) of the damped oscillator.

    ``order-reduced`` is the response of the integrator's equation,
    (1 - i tau omega) / (omega0^2 - omega^2 - i gamma omega).
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValidationError("frequencies must be non-negative")
    w0, tau, g = p.omega0, p.tau, p.gamma
    diff = (w0 - omega) * (w0 + omega)
    if variant == EXACT:
        den = diff - 1j * tau * omega**3
        num = 1.0
    elif variant == LORENTZIAN:
        den = diff - 1j * g * omega
        num = 1.0
    elif variant == ORDER_REDUCED:
        den = diff - 1j * g * omega
        num = 1.0 - 1j * tau * omega
    else:
        raise ValidationError(f"unknown susceptibility variant {variant!r}")
    if np.any(den == 0):
        raise ValidationError("undamped oscillator has a pole at omega = omega0")
    out = num / den
    return complex(out) if out.ndim == 0 else out


def _position_coefficients(ens: ModeEnsemble, p: OscillatorParams, variant: str):
    if p.charge == 0:
        raise ValidationError("no stationary solution for an uncharged oscillator")
    return (p.charge / p.mass) * field_coefficients(ens) * susceptibility(ens.omega, p, variant)


def stationary_position(ens: ModeEnsemble, p: OscillatorParams, t, variant: str = EXACT, deriv: int = 0):
    """Stationary q_c(t) (or its ``deriv``-th time derivative) for one realization."""
    return mode_sum(ens.omega, _position_coefficients(ens, p, variant), t, deriv)


def stationary_momentum(ens: ModeEnsemble, p: OscillatorParams, t, variant: str = EXACT):
    return p.mass * stationary_position(ens, p, t, variant, deriv=1)


def discrete_variance(ens: ModeEnsemble, p: OscillatorParams, variant: str = EXACT) -> float:
    """Phase-averaged q_c^2 of the finite mode set, sum |c_j|^2 / 2."""
    c = _position_coefficients(ens, p, variant)
    return float(0.5 * np.sum(np.abs(c) ** 2))


# -- quadrature ---------------------------------------------------------------

def _bath(kind: SpectrumKind):
    """Bath factor relative to zero-point as a scalar function of omega (reduced units)."""
    if kind.name == "zero-point":
        return lambda omega: 1.0
    th = kind.theta
    if kind.name == "thermal":
        # coth(w/2th) - 1 = 2/(e^{w/th} - 1)
        return lambda omega: 2.0 * float(bose(omega / th))
    return lambda omega: float(coth(omega / (2.0 * th))) if th > 0 else 1.0


def variance_integrand(kind: SpectrumKind, gamma_ratio: float, model: str = RESONANT):
    """Integrand of <q_c^2> in units hbar/(m omega0), as a function of u = omega - 1."""
    g = gamma_ratio
    b = _bath(kind)
    pre = g / math.pi
    if model == EXACT:
        def f(u):
            om = 1.0 + u
            if om <= 0.0:
                return 0.0
            d = u * (2.0 + u)
            if om > 2.0:
                s = om**3
                return pre * b(om) / (s * ((d / s) ** 2 + g * g))
            return pre * b(om) * om**3 / (d * d + g * g * om**6)
    elif model == LORENTZIAN:
        def f(u):
            om = 1.0 + u
            if om <= 0.0:
                return 0.0
            d = u * (2.0 + u)
            if om > 2.0:
                s = om * om
                return pre * b(om) / (om * ((d / s) ** 2 + g * g / s))
            return pre * b(om) * om**3 / (d * d + g * g * om * om)
    elif model == RESONANT:
        w1 = b(1.0)
        def f(u):
            return pre * w1 / (4.0 * u * u + g * g)
    else:
        raise ValidationError(f"unknown integrand model {model!r}; expected one of {MODELS}")
    return f


def _breakpoints(gamma_ratio: float, u_max: float):
    """Decade-spaced points out from the resonance in both directions."""
    g = gamma_ratio
    pts = {-1.0, 0.0, 1.0, 9.0}
    w = g
    while w < 1.0:
        pts.update((-w, w))
        w *= 10.0
    if g < 1:
        w = 10.0
        while w < 100.0 / g:
            pts.add(w)
            w *= 10.0
    pts = sorted({min(max(x, -1.0), u_max) for x in pts})
    if math.isfinite(u_max):
        pts.append(u_max)
    return sorted(set(pts))


def integrate_resonance(f, gamma_ratio: float, omega_max: float | None = None,
                        quad: QuadSpec = QuadSpec()):
    """Integrate f(u), u = omega - omega0, over omega in [0, omega_max].

    Breakpoints sit at decades of the width gamma on both sides of the peak.
    """
    u_max = math.inf if omega_max is None else omega_max - 1.0
    pts = _breakpoints(gamma_ratio, u_max)
    if not math.isfinite(u_max):
        pts.append(math.inf)
    total = 0.0
    err = 0.0
    tol = max(1e3 * quad.epsrel, 1e-8)
    notes = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b <= a:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
            res = scipy.integrate.quad(f, a, b, epsabs=quad.epsabs, epsrel=quad.epsrel,
                                       limit=quad.limit, full_output=1)
        val, e = res[0], res[1]
        if not math.isfinite(val) or not math.isfinite(e):
            raise ConvergenceError(f"quadrature on [{a:g}, {b:g}] produced a non-finite value")
        if len(res) > 3:
            # scipy flagged this piece; judged against the total below
            notes.append(f"[{a:g}, {b:g}]: {res[3].splitlines()[0]}")
        total += val
        err += e
    if err > tol * abs(total) + quad.epsabs:
        raise ConvergenceError(f"quadrature error estimate {err:.3g} too large for value "
                               f"{total:.6g}; " + "; ".join(notes))
    return total


def variance_quadrature(kind: SpectrumKind, r: ReducedParams, quad: QuadSpec = QuadSpec(),
                        model: str = RESONANT, omega_max: float | None = None) -> float:
    """Phase-averaged <q_c^2> by adaptive quadrature, in units hbar/(m omega0).

    ``kind.theta`` sets the bath temperature; ``r.theta`` is ignored here.
    ``omega_max`` truncates the frequency integral (reduced units).
    """
    if r.gamma_ratio <= 0:
        raise ValidationError("quadrature needs gamma_ratio > 0")
    if model not in MODELS:
        raise ValidationError(f"unknown integrand model {model!r}; expected one of {MODELS}")
    if kind.is_empty:
        return 0.0
    if model == LORENTZIAN and kind.has_zero_point and omega_max is None:
        raise ValidationError("zero-point variance with the gamma*omega damping diverges; give omega_max")
    f = variance_integrand(kind, r.gamma_ratio, model)
    return integrate_resonance(f, r.gamma_ratio, omega_max, quad)


def zero_point_tail(gamma_ratio: float, omega_max: float) -> float:
    """Analytic tail of the exact zero-point integrand beyond omega_max >> omega0.

    Uses (omega^2 - 1)^2 ~ omega^4: integral of (g/pi) / (omega (1 + g^2 omega^2)).
    Relative error of order 2/omega_max^2.
    """
    g = gamma_ratio
    return g / (2.0 * math.pi) * math.log1p(1.0 / (g * omega_max) ** 2)


def _arctan_factor(gamma_ratio: float) -> float:
    """(1/pi) [pi/2 + arctan(2/g)], equal to 1 at g = 0."""
    if gamma_ratio == 0:
        return 1.0
    return (0.5 * math.pi + math.atan(2.0 / gamma_ratio)) / math.pi


def _series_bracket(gamma_ratio: float, order: int) -> float:
    x = 0.5 * gamma_ratio
    s = 1.0
    if order >= 1:
        s -= x / math.pi
    if order >= 3:
        s += x**3 / (3.0 * math.pi)
    return s


def variance_closed_form(kind: SpectrumKind, r: ReducedParams) -> float:
    """Closed-form <q_c^2> in units hbar/(m omega0).

    Zero point: (1/2pi)[pi/2 + arctan(2/g)].  Thermal: Planck occupation at
    omega0 times the damping series truncated after the cubic term.
    """
    out = 0.0
    if kind.has_zero_point:
        out += 0.5 * _arctan_factor(r.gamma_ratio)
    if kind.has_thermal:
        out += float(bose(1.0 / kind.theta)) * _series_bracket(r.gamma_ratio, 3)
    return out


def variance_series(r: ReducedParams, order: int = 3) -> float:
    """Partial sum of the small-damping expansion of the zero-point variance."""
    if not 0 <= order <= 3:
        raise ValidationError("series order must be between 0 and 3")
    if r.gamma_ratio >= 1:
        raise ValidationError("series requires gamma_ratio < 1")
    return 0.5 * _series_bracket(r.gamma_ratio, order)


# -- time-domain integration --------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    ensemble: ModeEnsemble | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.times) == len(self.q) == len(self.p)):
            raise ValidationError("times, q and p must have equal lengths")

    def energy(self, params: OscillatorParams):
        return self.p**2 / (2 * params.mass) + 0.5 * params.mass * params.omega0**2 * self.q**2

    def to_csv(self, path):
        from .io import write_csv
        write_csv(path, ["t", "q", "p"], [self.times, self.q, self.p])


def default_dt(ens: ModeEnsemble | None, p: OscillatorParams) -> float:
    wmax = p.omega0 if ens is None or len(ens) == 0 else max(p.omega0, float(ens.omega.max()))
    return 2.0 * math.pi / (100.0 * wmax)


def _rk4_step(A, y, f0, fm, f1, h):
    k1 = A @ y + f0
    k2 = A @ (y + 0.5 * h * k1) + fm
    k3 = A @ (y + 0.5 * h * k2) + fm
    k4 = A @ (y + h * k3) + f1
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _rk4_affine(A, h):
    """RK4 on y' = A y + (0, F(t)) as y_{n+1} = P y_n + w0 F_n + wm F_{n+1/2} + w1 F_{n+1}."""
    z = np.zeros(2)
    e2 = np.array([0.0, 1.0])
    P = np.column_stack([_rk4_step(A, np.eye(2)[i], z, z, z, h) for i in range(2)])
    w0 = _rk4_step(A, z, e2, z, z, h)
    wm = _rk4_step(A, z, z, e2, z, h)
    w1 = _rk4_step(A, z, z, z, e2, h)
    return P, w0, wm, w1


def _linear_recurrence(P, g, y0):
    """y_{n+1} = P y_n + g_n, returning y_0..y_N (rows)."""
    n = g.shape[0]
    lam, V = np.linalg.eig(P)
    if np.linalg.cond(V) < 1e8:
        Vi = np.linalg.inv(V)
        z0 = Vi @ y0
        gz = g @ Vi.T
        z = np.empty((n + 1, 2), dtype=complex)
        for i in range(2):
            zi, _ = lfilter([1.0], [1.0, -lam[i]], gz[:, i], zi=[lam[i] * z0[i]])
            z[0, i] = z0[i]
            z[1:, i] = zi
        return (z @ V.T).real
    y = np.empty((n + 1, 2))
    y[0] = y0
    for k in range(n):
        y[k + 1] = P @ y[k] + g[k]
    return y


def integrate_trajectory(ens: ModeEnsemble | None, p: OscillatorParams, t_span: float,
                         dt: float | None = None, scheme: str = "rk4", q0: float = 0.0,
                         p0: float = 0.0, discard_transient: bool = True,
                         sample_every: int = 1) -> Trajectory:
    """Integrate the order-reduced equation of motion with fixed-step RK4.

    q'' + gamma q' + omega0^2 q = (e/m) (E + tau E'), the Abraham-Lorentz
    term tau q''' having been replaced by its first-order value.  When
    ``discard_transient`` is set and gamma > 0 the first 10/gamma of the run
    are dropped.
    """
    if scheme != "rk4":
        raise ValidationError(f"unknown scheme {scheme!r}")
    if t_span <= 0:
        raise ValidationError("t_span must be positive")
    dt = dt or default_dt(ens, p)
    if ens is not None and len(ens) and dt > 2 * math.pi / (50 * float(ens.omega.max())) * (1 + 1e-12):
        raise ValidationError("dt too large for the highest mode (need dt <= 2 pi / (50 omega_max))")
    n = int(math.ceil(t_span / dt - 1e-9))
    w0, g, tau = p.omega0, p.gamma, p.tau
    A = np.array([[0.0, 1.0], [-w0 * w0, -g]])
    P, c0, cm, c1 = _rk4_affine(A, dt)
    rho = max(abs(np.linalg.eigvals(P)))
    if rho > 1.0 + 1e-15:
        raise InstabilityError(f"RK4 propagator grows (spectral radius {rho:.17g}); reduce dt")

    half = np.arange(2 * n + 1) * (0.5 * dt)
    if ens is not None and p.charge != 0 and np.any(ens.amplitude):
        coeff = field_coefficients(ens) * (1.0 - 1j * tau * ens.omega) * (p.charge / p.mass)
        F = mode_sum(ens.omega, coeff, half)
    else:
        F = np.zeros(half.size)
    Fn, Fm, F1 = F[0:-1:2], F[1::2], F[2::2]
    gvec = np.outer(Fn, c0) + np.outer(Fm, cm) + np.outer(F1, c1)
    y = _linear_recurrence(P, gvec, np.array([q0, p0 / p.mass]))
    if not np.all(np.isfinite(y)):
        raise InstabilityError("trajectory is not finite")

    times = np.arange(n + 1) * dt
    q, v = y[:, 0], y[:, 1]
    free = ens is None or not np.any(ens.amplitude) or p.charge == 0
    if free and g == 0:
        e = 0.5 * v**2 + 0.5 * w0**2 * q**2
        if e[0] > 0 and np.max(e) > e[0] * (1 + 1e-3):
            raise InstabilityError("energy grows without a bath")
    start = 0
    if discard_transient and g > 0 and ens is not None:
        t_tr = 10.0 / g
        if t_span < 20.0 / g:
            warnings.warn("t_span shorter than 20 damping times; statistics may not be stationary",
                          stacklevel=2)
        start = min(int(math.ceil(t_tr / dt)), n)
    sl = slice(start, None, sample_every)
    meta = {"scheme": scheme, "dt": dt, "steps": n, "transient_discarded": times[start],
            "equation": "q'' + gamma q' + omega0^2 q = (e/m)(E + tau E')"}
    return Trajectory(times[sl].copy(), q[sl].copy(), p.mass * v[sl], ens, meta)
