import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sedlab import ValidationError
from sedlab.fieldgen import GridSpec, ModeEnsemble
from sedlab.model import OscillatorParams, ReducedParams
from sedlab.observables import (
    QUADRATURE,
    VarianceReport,
    characteristic_function,
    commutator_integral,
    commutator_raw,
    gaussian_moment,
    ground_gaussian,
    mean_square_x,
    schrodinger_residual,
    shifted_ground_density,
    thermal_density,
    thermal_variance,
    wavefunction,
)
from sedlab.response import EXACT, integrate_trajectory
from sedlab.spectra import SpectrumKind

ZP = SpectrumKind.zero_point()
PI_QUARTER = 0.751125544464942483  # pi^(-1/4)
MP_COMMUTATOR_EXACT = 1.99940029983209894  # omega^3 damping, gamma = 1e-2


def toy_bath():
    return ModeEnsemble(np.array([0.7, 1.0, 1.6]), np.array([0.3, 0.2, 0.4]),
                        np.array([0.1, 2.0, 4.0]), ZP, 0, 2.0, GridSpec())


def trapz(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


X = np.linspace(-10, 10, 4001)


# -- ground state -------------------------------------------------------------

def test_ground_gaussian_values():
    p = ReducedParams(0.0).to_params()
    assert ground_gaussian(0.0, p) == pytest.approx(PI_QUARTER, rel=1e-15)
    phi = ground_gaussian(X, p)
    assert np.array_equal(phi, ground_gaussian(-X, p))
    assert trapz(phi**2, X) == pytest.approx(1.0, abs=1e-10)
    assert trapz(X**2 * phi**2, X) == pytest.approx(0.5, abs=1e-6)


def test_ground_gaussian_physical_width(physical):
    phi = ground_gaussian(X * physical.length_scale, physical)
    assert trapz(phi**2, X * physical.length_scale) == pytest.approx(1.0, abs=1e-10)


# -- wavefunction -------------------------------------------------------------

def test_free_ground_state_phase():
    p = ReducedParams(0.0).to_params()
    t = 1.3
    w = wavefunction(X, t, None, p)
    assert np.allclose(w.psi, ground_gaussian(X, p) * np.exp(-0.5j * t), atol=1e-14)


def test_density_is_shifted_gaussian():
    p = ReducedParams(1e-2).to_params()
    x = np.linspace(-8, 8, 512)
    for t in (0.0, 0.9, 7.5):
        w = wavefunction(x, t, toy_bath(), p)
        assert np.max(np.abs(w.density - shifted_ground_density(x, w.q_c, p))) < 1e-10
        assert w.norm() == pytest.approx(1.0, abs=1e-6)


def test_schrodinger_residual_small():
    p = ReducedParams(1e-2).to_params()
    x = np.linspace(-8, 8, 512)
    assert schrodinger_residual(x, 2.0, toy_bath(), p) < 1e-4


def test_wavefunction_from_trajectory():
    p = ReducedParams(1e-2).to_params()
    ens = toy_bath()
    tr = integrate_trajectory(ens, p, 30.0, discard_transient=False)
    x = np.linspace(-8, 8, 512)
    t = tr.times[500]
    w = wavefunction(x, t, None, p, traj_source=tr)
    assert w.q_c == tr.q[500]
    assert np.max(np.abs(w.density - shifted_ground_density(x, w.q_c, p))) < 1e-10
    with pytest.raises(ValidationError):
        wavefunction(x, t + 0.5 * (tr.times[1] - tr.times[0]), None, p, traj_source=tr)


def test_wavefunction_rejects_coarse_grid():
    p = ReducedParams(1e-2).to_params()
    with pytest.raises(ValidationError):
        wavefunction(np.linspace(-2, 2, 50), 0.0, toy_bath(), p)
    with pytest.raises(ValidationError):
        wavefunction(X, 0.0, toy_bath(), p, traj_source="bogus")


def test_wavefunction_csv(tmp_path):
    w = wavefunction(np.linspace(-8, 8, 512), 0.5, toy_bath(), ReducedParams(1e-2).to_params())
    w.to_csv(tmp_path / "psi.csv")
    lines = (tmp_path / "psi.csv").read_text().splitlines()
    assert lines[0] == "x,re_psi,im_psi,abs2_psi" and len(lines) == 513


# -- <x^2> --------------------------------------------------------------------

def test_mean_square_x_examples():
    # first-order value; the cubic correction is ~1e-11
    assert mean_square_x(ZP, ReducedParams(1e-3)) == pytest.approx(0.99992042252845, rel=1e-10)
    assert mean_square_x(SpectrumKind.thermal(0.0), ReducedParams(1e-3)) == 0.5
    assert mean_square_x(SpectrumKind.thermal(1 / math.log(3)), ReducedParams(0.0)) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValidationError):
        mean_square_x(ZP, ReducedParams(1e-3), route="guess")


def test_mean_square_x_routes_agree():
    for kind in (ZP, SpectrumKind.thermal(1.0), SpectrumKind.combined(0.5)):
        r = ReducedParams(1e-3)
        assert mean_square_x(kind, r, QUADRATURE) == pytest.approx(mean_square_x(kind, r), rel=1e-9)


def test_exact_integrand_misses_double_counting_tolerance():
    # the literal omega^3 integrand sits 0.2% above the resonant value at gamma = 1e-3
    v = mean_square_x(ZP, ReducedParams(1e-3), QUADRATURE, model=EXACT)
    assert v == pytest.approx(0.5 + 0.502038706570852654, rel=1e-9)


@given(st.floats(0.05, 50.0))
def test_thermal_variance_identity(theta):
    assert 0.5 + thermal_variance(theta) == pytest.approx(0.5 / math.tanh(0.5 / theta), rel=1e-12)


# -- moments and characteristic function --------------------------------------

def test_gaussian_moment_examples():
    assert gaussian_moment(0, 2.0) == 1.0
    assert gaussian_moment(2, 1.0) == 3.0
    assert gaussian_moment(1, 0.37) == 0.37
    assert gaussian_moment(4, 1.0) == 105.0


@given(st.integers(0, 10), st.floats(0.01, 10.0))
def test_gaussian_moment_recursion(n, s):
    assert gaussian_moment(n + 1, s) == pytest.approx((2 * n + 1) * s * gaussian_moment(n, s), rel=1e-12)


def test_characteristic_function_examples():
    assert characteristic_function(0.0, 1.7) == 1.0
    assert np.all(characteristic_function(np.linspace(0, 5, 11), 0.0) == 1.0)


@given(st.floats(0.0, 3.0), st.floats(0.1, 2.0))
@settings(max_examples=50)
def test_characteristic_series_matches_closed(ks, s):
    k = ks / math.sqrt(s)  # k sigma <= 3
    a = characteristic_function(k, s, method="series", n_terms=30)
    assert a == pytest.approx(characteristic_function(k, s), abs=1e-12)


@given(st.floats(0.0, 5.0), st.floats(0.0, 3.0))
def test_characteristic_function_bounded(k, s):
    v = characteristic_function(k, s)
    assert 0.0 <= v <= 1.0


# -- thermal density ----------------------------------------------------------

def test_cold_density_is_ground_state():
    p = ReducedParams(0.0).to_params()
    assert np.allclose(thermal_density(X, ReducedParams(1e-3, 0.0)), ground_gaussian(X, p) ** 2, rtol=1e-13, atol=0)


@pytest.mark.parametrize("theta", [0.1, 1.0, 10.0])
def test_thermal_density_normalized(theta):
    x = np.linspace(-60, 60, 60001)
    P = thermal_density(x, ReducedParams(1e-3, theta))
    assert trapz(P, x) == pytest.approx(1.0, abs=1e-6)
    assert trapz(x * x * P, x) == pytest.approx(0.5 / math.tanh(0.5 / theta), rel=1e-4)


def test_thermal_density_width_at_log3():
    x = np.linspace(-20, 20, 20001)
    P = thermal_density(x, ReducedParams(1e-3, 1 / math.log(3)))
    assert trapz(x * x * P, x) == pytest.approx(1.0, rel=1e-6)


# -- commutator ---------------------------------------------------------------

@pytest.mark.parametrize("g", [1e-3, 1e-2])
def test_commutator_unit(g):
    assert commutator_integral(ReducedParams(g)) == pytest.approx(1.0, abs=2 * g)


def test_commutator_exact_integrand_doubles():
    v = commutator_integral(ReducedParams(1e-2), model=EXACT)
    assert v == pytest.approx(MP_COMMUTATOR_EXACT, rel=1e-8)


def test_commutator_linear_in_hbar():
    base = OscillatorParams(mass=1.3, omega0=2.0, charge=0.05, hbar=0.7, c=1.0, validity_bound=math.inf)
    twice = OscillatorParams(mass=1.3, omega0=2.0, charge=0.05, hbar=1.4, c=1.0, validity_bound=math.inf)
    assert commutator_raw(twice) == 2.0 * commutator_raw(base)


def test_commutator_needs_damping():
    with pytest.raises(ValidationError):
        commutator_integral(ReducedParams(0.0))


# -- report -------------------------------------------------------------------

def test_variance_report_check():
    rep = VarianceReport("v", 0.5, 0.5 + 1e-12, monte_carlo=0.52, stderr=0.01)
    assert rep.check(4.0, rel_tol=1e-9)
    assert not rep.check(1.0)
    d = rep.to_dict()
    assert d["consistent"] is False and d["quadrature"] == rep.quadrature
