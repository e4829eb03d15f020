"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 numerical
non-convergence.  Files go to ``--out`` (default: $SEDLAB_OUT or the current
directory).  CSV files have a header line and 17 significant digits; CSV runs
also write ``<name>.meta.json`` with the effective configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, SedError, ValidationError
from .fieldgen import RNG_ALGORITHM, GridSpec, sample_modes
from .io import output_dir, write_csv, write_json, write_rows
from .model import ReducedParams
from .montecarlo import RunConfig, run_ensemble
from .observables import (
    _trapz,
    commutator_integral,
    ground_gaussian,
    mean_square_x,
    thermal_density as position_density,
    thermal_variance,
    wavefunction,
)
from .response import MODELS, RESONANT, integrate_trajectory, variance_closed_form, variance_quadrature
from .spectra import SpectrumKind, effective_field_psd, thermal_density, zero_point_density

COMMANDS = ("spectrum", "variance", "density", "commutator", "simulate", "wavefunction", "report")

DEFAULTS = {
    "gamma_ratio": 1e-3,
    "theta": 0.0,
    "kind": None,
    "seed": 0,
    "modes": 4096,
    "realizations": 0,
    "format": "csv",
}

LABELS = {
    "rho_zero_point": "zero-point spectral density hbar w^3/(2 pi^2 c^3)",
    "rho_thermal": "Planck spectral density hbar w^3/(pi^2 c^3) / (e^{hbar w/kT} - 1)",
    "psd": "effective 1D field PSD (4 pi/3) rho_0 x bath factor",
    "qc_variance": "<q_c^2> over random phases",
    "mean_square_x": "<x^2> = hbar/(2 m w0) + <q_c^2>",
    "p_thermal": "P_T(x) = sqrt(m w0/(pi hbar coth)) exp(-m w0 x^2/(hbar coth)), coth = coth(hbar w0/2kT)",
    "commutator": "[x, p]/(i hbar) from the zero-point spectrum",
    "trajectory": "q'' + gamma q' + w0^2 q = (e/m)(E + tau E')",
    "wavefunction": "phi_0(x - q_c) exp{(i/hbar)[(p_c + (e/c)A_x) x - g(t)]}",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--gamma-ratio", type=float, help="damping ratio gamma/omega0")
    p.add_argument("--theta", type=float, help="temperature kT/(hbar omega0)")
    p.add_argument("--kind", choices=["zero-point", "thermal", "zero-point+thermal"])
    p.add_argument("--seed", type=int)
    p.add_argument("--modes", type=int, help="number of field modes")
    p.add_argument("--realizations", type=int, help="Monte Carlo realizations (0 disables)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--config", help="JSON file with default values for the flags")


def build_parser():
    parser = _Parser(prog="sedlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sp = {name: sub.add_parser(name) for name in COMMANDS}
    for p in sp.values():
        _common(p)
    sp["spectrum"].add_argument("--omega-max", type=float, default=3.0)
    sp["spectrum"].add_argument("--points", type=int, default=301)
    sp["variance"].add_argument("--model", choices=MODELS, default=RESONANT)
    sp["density"].add_argument("--x-max", type=float, default=6.0)
    sp["density"].add_argument("--points", type=int, default=241)
    sp["commutator"].add_argument("--sweep", default="1e-4,1e-3,1e-2,1e-1",
                                  help="comma-separated gamma ratios")
    sp["commutator"].add_argument("--model", choices=["resonant", "exact"], default=RESONANT)
    sp["simulate"].add_argument("--t-span", type=float)
    sp["simulate"].add_argument("--dt", type=float)
    sp["simulate"].add_argument("--keep-transient", action="store_true")
    sp["wavefunction"].add_argument("--t", type=float, default=0.0)
    sp["wavefunction"].add_argument("--x-max", type=float, default=8.0)
    sp["wavefunction"].add_argument("--points", type=int, default=512)
    return parser


def effective_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        aliases = {"gamma-ratio": "gamma_ratio", "n_modes": "modes", "n_realizations": "realizations",
                   "base_seed": "seed"}
        known = set(DEFAULTS) | set(vars(args))
        for key, val in file_cfg.items():
            key = aliases.get(key, key.replace("-", "_"))
            if key not in known or key in ("config", "command"):
                raise ValidationError(f"unknown config key {key!r}")
            cfg[key] = val
    for key, val in vars(args).items():
        if key in ("config", "command"):
            continue
        if val is not None:
            cfg[key] = val
    if cfg["kind"] is None:
        cfg["kind"] = "thermal" if cfg["theta"] > 0 else "zero-point"
    return cfg


def _kind(cfg) -> SpectrumKind:
    if cfg["kind"] == "zero-point":
        return SpectrumKind.zero_point()
    return SpectrumKind(cfg["kind"], cfg["theta"])


def _metadata(cfg, command, labels) -> dict:
    return {
        "version": __version__,
        "command": command,
        "config": cfg,
        "seed": cfg["seed"],
        "rng": RNG_ALGORITHM,
        "units": "hbar = m = omega0 = c = k = 1",
        "labels": {k: LABELS[k] for k in labels},
    }


def _emit(cfg, name, header, columns, meta, stream=sys.stdout):
    out = output_dir(cfg.get("out"))
    if cfg["format"] == "json":
        path = out / f"{name}.json"
        write_json(path, {"metadata": meta,
                          "columns": {h: np.asarray(c) for h, c in zip(header, columns)}})
    else:
        path = out / f"{name}.csv"
        write_csv(path, header, columns)
        write_json(out / f"{name}.meta.json", meta)
    print(f"wrote {path}", file=stream)
    return path


def _mc_config(cfg, kind: SpectrumKind, **kw) -> RunConfig:
    return RunConfig(
        gamma_ratio=cfg["gamma_ratio"], theta=kind.theta, kind=kind.name,
        n_modes=cfg["modes"], n_realizations=cfg["realizations"], base_seed=cfg["seed"], **kw,
    )


def cmd_spectrum(cfg, args):
    kind = _kind(cfg)
    p = ReducedParams(cfg["gamma_ratio"], kind.theta).to_params()
    w = np.linspace(0.0, args.omega_max, args.points)
    cols = [w, zero_point_density(w, p), thermal_density(w, cfg["theta"], p),
            effective_field_psd(w, kind, p)]
    meta = _metadata(cfg, "spectrum", ["rho_zero_point", "rho_thermal", "psd"])
    _emit(cfg, "spectrum", ["omega", "rho_zero_point", "rho_thermal", "psd"], cols, meta)
    return 0


def cmd_variance(cfg, args):
    kind = _kind(cfg)
    r = ReducedParams(cfg["gamma_ratio"], kind.theta)
    closed = variance_closed_form(kind, r)
    quad = variance_quadrature(kind, r, model=args.model)
    row = {"label": "qc_variance", "closed_form": closed, "quadrature": quad,
           "monte_carlo": None, "stderr": None,
           "mean_square_x_closed": 0.5 + closed, "mean_square_x_quadrature": 0.5 + quad}
    if cfg["realizations"]:
        res = run_ensemble(_mc_config(cfg, kind))
        rep = res.reports[0]
        row["monte_carlo"], row["stderr"] = rep.monte_carlo, rep.stderr
        row["consistent"] = rep.consistent
    meta = _metadata(cfg, "variance", ["qc_variance", "mean_square_x"])
    meta["integrand_model"] = args.model
    out = output_dir(cfg.get("out"))
    if cfg["format"] == "json":
        path = out / "variance.json"
        write_json(path, {"metadata": meta, "report": row})
    else:
        path = out / "variance.csv"
        header = list(row)
        write_rows(path, header, [[("" if row[h] is None else row[h]) for h in header]])
        write_json(out / "variance.meta.json", meta)
    print(f"closed form   <q_c^2> = {closed:.6f}   <x^2> = {0.5 + closed:.6f}")
    print(f"quadrature    <q_c^2> = {quad:.6f}   <x^2> = {0.5 + quad:.6f}")
    if row["monte_carlo"] is not None:
        print(f"monte carlo   <q_c^2> = {row['monte_carlo']:.6f} +/- {row['stderr']:.6f}")
    print(f"wrote {path}")
    return 0


def cmd_density(cfg, args):
    theta = cfg["theta"]
    r = ReducedParams(cfg["gamma_ratio"], theta)
    x = np.linspace(-args.x_max, args.x_max, args.points)
    header = ["x", "p_thermal", "ground_density"]
    cols = [x, position_density(x, r), ground_gaussian(x, r.to_params()) ** 2]
    if cfg["realizations"] and theta > 0:
        res = run_ensemble(_mc_config(cfg, SpectrumKind.thermal(theta)))
        q = res.samples[:, 0]
        # average of |psi|^2 = phi_0^2(x - q_c) over realizations
        mc = np.mean(np.exp(-(x[None, :] - q[:, None]) ** 2), axis=0) / math.sqrt(math.pi)
        header.append("p_monte_carlo")
        cols.append(mc)
    meta = _metadata(cfg, "density", ["p_thermal"])
    meta["variance"] = 0.5 + thermal_variance(theta)
    _emit(cfg, "density", header, cols, meta)
    return 0


def cmd_commutator(cfg, args):
    try:
        sweep = [float(s) for s in args.sweep.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --sweep: {exc}") from exc
    vals = [commutator_integral(ReducedParams(g), model=args.model) for g in sweep]
    meta = _metadata(cfg, "commutator", ["commutator"])
    meta["integrand_model"] = args.model
    for g, v in zip(sweep, vals):
        print(f"gamma/omega0 = {g:<10g} [x,p]/(i hbar) = {v:.10f}")
    _emit(cfg, "commutator", ["gamma_ratio", "commutator"], [np.array(sweep), np.array(vals)], meta)
    return 0


def cmd_simulate(cfg, args):
    kind = _kind(cfg)
    r = ReducedParams(cfg["gamma_ratio"], kind.theta)
    p = r.to_params()
    ens = sample_modes(kind, p, cfg["modes"], GridSpec(), seed=cfg["seed"])
    g = max(r.gamma_ratio, 1e-12)
    t_span = args.t_span or 30.0 / g
    traj = integrate_trajectory(ens, p, t_span, dt=args.dt, discard_transient=not args.keep_transient)
    meta = _metadata(cfg, "simulate", ["trajectory"])
    meta["integrator"] = traj.meta
    _emit(cfg, "trajectory", ["t", "q", "p"], [traj.times, traj.q, traj.p], meta)
    return 0


def cmd_wavefunction(cfg, args):
    kind = _kind(cfg)
    r = ReducedParams(cfg["gamma_ratio"], kind.theta)
    p = r.to_params()
    ens = sample_modes(kind, p, cfg["modes"], GridSpec(), seed=cfg["seed"]) if r.gamma_ratio > 0 else None
    x = np.linspace(-args.x_max, args.x_max, args.points)
    w = wavefunction(x, args.t, ens, p)
    meta = _metadata(cfg, "wavefunction", ["wavefunction"])
    meta.update({"t": w.t, "q_c": w.q_c, "kinetic_phase": w.kinetic_phase, "g": w.g})
    _emit(cfg, "wavefunction", ["x", "re_psi", "im_psi", "abs2_psi"],
          [x, w.psi.real, w.psi.imag, w.density], meta)
    return 0


def report_rows(gamma_ratio: float, theta: float):
    """(quantity, computed, expected, tolerance, passed) for the summary table."""
    r = ReducedParams(gamma_ratio, theta)
    zp = SpectrumKind.zero_point()
    rows = []

    def add(name, value, expected, rel):
        ok = abs(value - expected) <= rel * abs(expected)
        rows.append((name, value, expected, rel, ok))

    if gamma_ratio > 0:
        x2_zp = mean_square_x(zp, r, route="quadrature")
        add("mean_square_x zero-point (quadrature)", x2_zp, 1.0, 2e-3)
        add("ratio to ground term", x2_zp / 0.5, 2.0, 2e-3)
        add("qc_variance zero-point closed vs quadrature",
            variance_closed_form(zp, r), variance_quadrature(zp, r), 1e-2 * gamma_ratio + 1e-8)
        add("commutator [x,p]/(i hbar)", commutator_integral(r), 1.0, 2 * gamma_ratio)
    if theta > 0:
        th = SpectrumKind.thermal(theta)
        expected = 0.5 / math.tanh(0.5 / theta)
        add("mean_square_x thermal (closed)", mean_square_x(th, r), expected, 5e-3)
        if gamma_ratio > 0:
            add("mean_square_x thermal (quadrature)", mean_square_x(th, r, route="quadrature"),
                expected, 5e-3)
    x = np.linspace(-12, 12, 4001)
    dens = position_density(x, r)
    var = _trapz(dens * x * x, x)
    add("P_T variance", var, 0.5 + thermal_variance(theta), 1e-4)
    return rows


def cmd_report(cfg, args):
    rows = report_rows(cfg["gamma_ratio"], cfg["theta"])
    meta = _metadata(cfg, "report", ["mean_square_x", "commutator", "p_thermal"])
    for name, v, e, tol, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<48s} {v:.8f}  expected {e:.8f}  rel tol {tol:.2g}")
    header = ["quantity", "computed", "expected", "rel_tol", "passed"]
    out = output_dir(cfg.get("out"))
    if cfg["format"] == "json":
        path = out / "report.json"
        write_json(path, {"metadata": meta, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        path = out / "report.csv"
        write_rows(path, header, rows)
        write_json(out / "report.meta.json", meta)
    print(f"wrote {path}")
    return 0 if all(r[-1] for r in rows) else 2


HANDLERS = {
    "spectrum": cmd_spectrum,
    "variance": cmd_variance,
    "density": cmd_density,
    "commutator": cmd_commutator,
    "simulate": cmd_simulate,
    "wavefunction": cmd_wavefunction,
    "report": cmd_report,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        return HANDLERS[args.command](cfg, args)
    except ConvergenceError as exc:
        print(f"sedlab: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, SedError) as exc:
        print(f"sedlab: invalid input: {exc}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
