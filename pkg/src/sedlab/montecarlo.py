"""Seeded Monte Carlo over random phases, with jackknife error bars."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import stats

from . import __version__
from .errors import ValidationError
from .fieldgen import (
    RNG_ALGORITHM,
    GridSpec,
    ModeEnsemble,
    default_omega_max,
    draw_phases,
    realization_seed,
    sample_modes,
)
from .model import ReducedParams
from .observables import (
    VarianceReport,
    characteristic_function,
    gaussian_moment,
    mean_square_x,
)
from .response import (
    EXACT,
    RESONANT,
    _position_coefficients,
    discrete_variance,
    integrate_trajectory,
    variance_closed_form,
    variance_quadrature,
)
from .spectra import SpectrumKind

STATIONARY = "stationary"
INTEGRATED = "integrated"


@dataclass
class RunConfig:
    gamma_ratio: float = 1e-2
    theta: float = 0.0
    kind: str = "zero-point"
    n_modes: int = 4096
    grid: str = "stratified"
    omega_max: float | None = None
    n_realizations: int = 200
    base_seed: int = 0
    source: str = STATIONARY
    sample_time: float = 0.0
    time_average: bool = False
    n_time_samples: int = 16
    t_span: float | None = None
    variant: str = EXACT
    k_grid: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0])
    n_bins: int = 50
    workers: int = 1

    def __post_init__(self):
        if self.n_realizations < 2:
            raise ValidationError("n_realizations must be >= 2")
        if self.n_modes < 16:
            raise ValidationError("n_modes must be >= 16")
        if self.source not in (STATIONARY, INTEGRATED):
            raise ValidationError(f"unknown source {self.source!r}")
        if self.n_time_samples < 1:
            raise ValidationError("n_time_samples must be >= 1")
        self.spectrum()  # validates kind and theta
        self.reduced()

    def spectrum(self) -> SpectrumKind:
        return SpectrumKind.parse(self.kind, self.theta)

    def reduced(self) -> ReducedParams:
        return ReducedParams(self.gamma_ratio, self.theta)

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid, self.omega_max)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int
    autocorr_adjusted: bool = False


@dataclass
class EstimateSet:
    estimates: dict = field(default_factory=dict)

    def __getitem__(self, name) -> Estimate:
        return self.estimates[name]

    def __contains__(self, name):
        return name in self.estimates

    def add(self, name, est: Estimate):
        self.estimates[name] = est

    def to_dict(self) -> dict:
        return {k: asdict(v) for k, v in self.estimates.items()}


@dataclass
class EnsembleResult:
    estimates: EstimateSet
    reports: list
    samples: np.ndarray
    metadata: dict
    histogram: dict | None = None


def jackknife(samples, estimator=np.mean):
    """Leave-one-out jackknife: returns (full-sample estimate, standard error)."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise ValidationError("jackknife needs at least 2 samples")
    theta = float(estimator(x))
    if estimator is np.mean:
        loo = (x.sum(axis=0) - x) / (n - 1)
    else:
        loo = np.array([estimator(np.delete(x, i, axis=0)) for i in range(n)])
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return theta, se


def estimate_moment(samples, n: int) -> Estimate:
    """Sample estimate of <q^{2n}> with a jackknife standard error."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValidationError("need at least 2 samples")
    val, se = jackknife(x ** (2 * n))
    return Estimate(val, se, x.size)


def raw_moment(samples, order: int) -> Estimate:
    val, se = jackknife(np.asarray(samples, dtype=float) ** order)
    return Estimate(val, se, len(samples))


def sample_times(cfg: RunConfig) -> np.ndarray:
    """Sampling instants within one realization.

    Time-averaged runs space the samples by the decorrelation time 2/gamma.
    """
    if not cfg.time_average:
        return np.array([cfg.sample_time])
    spacing = 2.0 / cfg.gamma_ratio if cfg.gamma_ratio > 0 else 2.0 * math.pi
    return cfg.sample_time + spacing * np.arange(cfg.n_time_samples)


def _stationary_block(cfg, coeff, omega, times, indices):
    """q_c at ``times`` for realizations ``indices`` (rows)."""
    out = np.empty((len(indices), times.size))
    ph_t = np.outer(times, omega)  # (T, n)
    for row, i in enumerate(indices):
        phase = draw_phases(realization_seed(cfg.base_seed, i), omega.size)
        c = coeff * np.exp(-1j * phase)
        out[row] = np.cos(ph_t) @ c.real + np.sin(ph_t) @ c.imag
    return out


def _integrated_block(cfg, base_ens, p, indices):
    g = cfg.gamma_ratio
    times = sample_times(cfg)
    t_tr = 10.0 / g
    t_span = cfg.t_span or (t_tr + float(times.max()) + 10.0 / g)
    out = np.empty((len(indices), times.size))
    for row, i in enumerate(indices):
        seed = realization_seed(cfg.base_seed, i)
        ens = base_ens.with_phases(draw_phases(seed, len(base_ens)), seed)
        traj = integrate_trajectory(ens, p, t_span, discard_transient=False)
        out[row] = np.interp(t_tr + times, traj.times, traj.q)
    return out


def collect_samples(cfg: RunConfig) -> tuple[np.ndarray, ModeEnsemble]:
    """q_c samples with shape (n_realizations, n_times)."""
    kind = cfg.spectrum()
    p = cfg.reduced().to_params()
    base = sample_modes(kind, p, cfg.n_modes, cfg.grid_spec(), seed=cfg.base_seed)
    times = sample_times(cfg)
    M = cfg.n_realizations
    if kind.is_empty or p.charge == 0 or not np.any(base.amplitude):
        return np.zeros((M, times.size)), base
    coeff = None
    if cfg.source == STATIONARY:
        coeff = _position_coefficients(base.with_phases(np.zeros(len(base)), 0), p, cfg.variant)

    def work(chunk):
        if cfg.source == STATIONARY:
            return _stationary_block(cfg, coeff, base.omega, times, chunk)
        return _integrated_block(cfg, base, p, chunk)

    chunks = [list(range(s, min(M, s + 64))) for s in range(0, M, 64)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return np.vstack(parts), base


def _reference_variance(kind, r, model=RESONANT):
    if kind.is_empty:
        return 0.0
    return variance_quadrature(kind, r, model=model)


def histogram_test(q, variance: float, n_bins: int = 50) -> dict:
    """Chi-square test of q against N(0, variance) with equiprobable bins."""
    q = np.asarray(q, dtype=float).ravel()
    if variance <= 0:
        return {"edges": [], "counts": [], "expected": [], "chi2": 0.0, "p_value": 1.0}
    edges = stats.norm.ppf(np.linspace(0, 1, n_bins + 1), scale=math.sqrt(variance))
    counts = np.histogram(q, bins=np.concatenate([[-np.inf], edges[1:-1], [np.inf]]))[0]
    expected = np.full(n_bins, q.size / n_bins)
    chi2, pval = stats.chisquare(counts, expected)
    return {"edges": edges[1:-1], "counts": counts, "expected": expected,
            "chi2": float(chi2), "p_value": float(pval)}


def run_ensemble(cfg: RunConfig) -> EnsembleResult:
    """Sample q_c over seeded realizations and compare with closed form and quadrature."""
    kind = cfg.spectrum()
    r = cfg.reduced()
    q, base = collect_samples(cfg)
    M, T = q.shape
    adjusted = T > 1
    # realizations are the jackknife units; time samples within one are averaged first
    est = EstimateSet()

    def unit(values):
        return values.mean(axis=1)

    def add(name, per_sample):
        val, se = jackknife(unit(per_sample))
        est.add(name, Estimate(val, se, M, adjusted))

    for order in range(1, 9):
        add(f"moment_{order}", q**order)
    add("variance", q**2)
    for k in cfg.k_grid:
        add(f"charfn_re_{k:g}", np.cos(k * q))
        add(f"charfn_im_{k:g}", np.sin(k * q))

    closed = variance_closed_form(kind, r)
    quad_v = _reference_variance(kind, r) if r.gamma_ratio > 0 else closed
    p = r.to_params()
    extras = {}
    if not kind.is_empty and p.charge > 0:
        extras["discrete_mode_variance"] = discrete_variance(base, p, cfg.variant)
        extras["exact_integrand_quadrature"] = _reference_variance(kind, r, EXACT)
    meta = {
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.base_seed,
        "rng": RNG_ALGORITHM,
        "omega_max": base.omega_max,
        "n_modes_effective": len(base),
    }
    var = est["variance"]
    rep_q = VarianceReport(
        "displacement_variance", closed, quad_v, var.value, var.stderr,
        r.gamma_ratio, kind.theta, formula="<q_c^2> averaged over random phases",
        extras=extras, metadata=meta,
    )
    rep_q.check(4.0)
    rep_x = VarianceReport(
        "mean_square_position", mean_square_x(kind, r), 0.5 + quad_v, 0.5 + var.value, var.stderr,
        r.gamma_ratio, kind.theta, formula="hbar/(2 m omega0) + <q_c^2>", metadata=meta,
    )
    rep_x.check(4.0)
    hist = histogram_test(q[:, 0], closed, cfg.n_bins) if closed > 0 else None
    meta = dict(meta)
    meta["moment_reference"] = {f"moment_{2 * n}": gaussian_moment(n, closed) for n in range(1, 5)}
    meta["charfn_reference"] = {f"{k:g}": characteristic_function(k, closed) for k in cfg.k_grid}
    return EnsembleResult(est, [rep_q, rep_x], q, meta, hist)
