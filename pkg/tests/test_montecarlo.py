import json
import math

import numpy as np
import pytest

from sedlab import ValidationError
from sedlab.montecarlo import (
    INTEGRATED,
    RunConfig,
    collect_samples,
    estimate_moment,
    histogram_test,
    jackknife,
    run_ensemble,
    sample_times,
)
from sedlab.response import variance_quadrature
from sedlab.spectra import SpectrumKind
from sedlab.model import ReducedParams


def small(**kw):
    base = dict(gamma_ratio=0.05, n_modes=512, n_realizations=200, omega_max=5.0)
    base.update(kw)
    return RunConfig(**base)


# -- estimators ---------------------------------------------------------------

def test_estimate_moment_examples():
    e = estimate_moment(np.zeros(10), 1)
    assert (e.value, e.stderr) == (0.0, 0.0)
    e = estimate_moment(np.array([-1.0, 1.0]), 1)
    assert (e.value, e.stderr) == (1.0, 0.0)
    x = np.random.default_rng(123).standard_normal(100_000)
    assert estimate_moment(x, 2).value == pytest.approx(3.0, abs=0.05)
    with pytest.raises(ValidationError):
        estimate_moment(np.array([1.0]), 1)


def test_jackknife_mean_is_standard_error():
    x = np.random.default_rng(5).normal(size=500)
    val, se = jackknife(x)
    assert val == pytest.approx(x.mean())
    assert se == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-12)
    # generic estimator path
    val2, se2 = jackknife(x[:50], estimator=np.median)
    assert val2 == np.median(x[:50]) and se2 > 0


def test_histogram_test_on_gaussian():
    x = np.random.default_rng(8).normal(scale=math.sqrt(0.7), size=20_000)
    h = histogram_test(x, 0.7, 50)
    assert h["p_value"] > 1e-3 and len(h["counts"]) == 50 and sum(h["counts"]) == 20_000
    assert histogram_test(x, 1.4, 50)["p_value"] < 1e-3


# -- config -------------------------------------------------------------------

def test_config_round_trip(tmp_path):
    cfg = small(theta=0.5, kind="thermal", base_seed=17)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert RunConfig.from_json(path) == cfg


def test_config_rejects_bad_input():
    with pytest.raises(ValidationError):
        RunConfig.from_dict({"gamma_ratio": 1e-2, "colour": "blue"})
    with pytest.raises(ValidationError):
        RunConfig(n_realizations=1)
    with pytest.raises(ValidationError):
        RunConfig(source="psychic")
    with pytest.raises(ValidationError):
        RunConfig(kind="thermal", theta=-1.0)


def test_time_average_spacing():
    cfg = small(time_average=True, n_time_samples=4, sample_time=1.0)
    assert np.allclose(sample_times(cfg), 1.0 + 40.0 * np.arange(4))


# -- ensembles ----------------------------------------------------------------

def test_cold_thermal_run_is_zero():
    res = run_ensemble(small(kind="thermal", theta=0.0, n_realizations=10))
    assert np.all(res.samples == 0)
    for name in ("moment_1", "moment_2", "moment_4", "variance"):
        assert res.estimates[name].value == 0.0 and res.estimates[name].stderr == 0.0
    assert res.estimates["charfn_re_1"].value == 1.0
    assert all(rep.consistent for rep in res.reports)


def test_run_is_deterministic():
    a = run_ensemble(small(base_seed=3))
    b = run_ensemble(small(base_seed=3))
    c = run_ensemble(small(base_seed=3, workers=4))
    assert a.estimates.to_dict() == b.estimates.to_dict() == c.estimates.to_dict()
    assert np.array_equal(a.samples, c.samples)
    d = run_ensemble(small(base_seed=4))
    assert d.estimates["variance"].value != a.estimates["variance"].value


def test_zero_point_variance_within_three_se():
    cfg = RunConfig(gamma_ratio=1e-2, n_modes=4096, n_realizations=200, base_seed=0)
    res = run_ensemble(cfg)
    est = res.estimates["variance"]
    target = variance_quadrature(SpectrumKind.zero_point(), ReducedParams(1e-2))
    assert abs(est.value - target) < 3 * est.stderr
    rep = res.reports[0]
    assert rep.label == "displacement_variance" and rep.consistent
    assert {"version", "config", "seed", "rng"} <= set(res.metadata)


def test_stderr_scales_as_inverse_root_m():
    ratios = []
    for seed in range(5):
        se100 = run_ensemble(small(n_realizations=100, base_seed=seed)).estimates["variance"].stderr
        se400 = run_ensemble(small(n_realizations=400, base_seed=seed + 100)).estimates["variance"].stderr
        ratios.append(se100 / se400)
    assert np.mean(ratios) == pytest.approx(2.0, rel=0.15)


def test_time_shift_does_not_change_statistics():
    a = run_ensemble(small(n_realizations=400, sample_time=0.0)).estimates["variance"]
    b = run_ensemble(small(n_realizations=400, sample_time=1234.5)).estimates["variance"]
    assert abs(a.value - b.value) < 4 * math.hypot(a.stderr, b.stderr)


def test_time_averaged_estimates_flagged():
    res = run_ensemble(small(n_realizations=50, time_average=True, n_time_samples=8))
    assert res.samples.shape == (50, 8)
    assert res.estimates["variance"].autocorr_adjusted


def test_stationary_and_integrated_agree():
    st = run_ensemble(small(n_modes=256, n_realizations=64, omega_max=4.0, variant="order-reduced"))
    it = run_ensemble(small(n_modes=256, n_realizations=64, omega_max=4.0, source=INTEGRATED))
    a, b = st.estimates["variance"], it.estimates["variance"]
    assert abs(a.value - b.value) < 4 * math.hypot(a.stderr, b.stderr)


def test_characteristic_function_estimates():
    M = 400
    res = run_ensemble(small(n_realizations=M, kind="thermal", theta=1.0, omega_max=None))
    ref = res.metadata["charfn_reference"]
    for k in ("0.5", "1", "1.5", "2"):
        assert abs(res.estimates[f"charfn_re_{k}"].value - ref[k]) <= 4 / math.sqrt(M)
        assert abs(res.estimates[f"charfn_im_{k}"].value) <= 4 / math.sqrt(M)


def test_collect_samples_shape():
    q, base = collect_samples(small(n_realizations=7))
    assert q.shape == (7, 1) and len(base) == 512
