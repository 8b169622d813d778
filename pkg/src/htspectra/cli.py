"""Command-line interface: theory curves, simulations, and comparisons.

Subcommands: ``theory`` (density curve to CSV + JSON sidecar), ``simulate``
(Monte Carlo eigenvalue CSV + campaign JSON), ``compare`` (distance report
between the two), ``critical-set`` and ``selftest``.  Every output CSV gets
a self-contained gnuplot script next to it, and every command echoes its
configuration to a JSON file so runs are reproducible from the outputs.

Exit codes: 0 success, 1 configuration error (the message names the
offending flag), 2 numerical failure (partial outputs are kept).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .density import (
    DensityCurve,
    EPS_FLOOR,
    build_density_curve,
    default_eps_schedule,
    density_band,
    density_wigner_formula,
    density_wishart,
    semicircle_cdf,
)
from .eig import distribution_distance, spectra_from_csv, spectra_to_csv
from .matrices import DiagonalLaw, EnsembleSpec, SigmaProfile
from .montecarlo import (
    CampaignSpec,
    CovarianceParams,
    atom_fraction,
    run_campaign,
    truncated_moment_experiment,
)
from .sampling import StableTailLaw
from .solver import SolverError, find_critical_set
from .special import AlphaParam, QuadratureError, c_alpha, g_alpha, h_alpha

__all__ = ["main"]


class ConfigError(ValueError):
    """Invalid or inconsistent command-line configuration."""


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="htspectra",
        description="Limiting spectra of heavy-tailed random matrices: "
                    "theory curves, simulations and comparisons.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", default="wigner",
                            choices=["wigner", "band", "wishart", "perturbed"])
            sp.add_argument("--alpha", type=float, default=None)
            sp.add_argument("--gamma", type=float, default=None)
            sp.add_argument("--profile", default=None,
                            help="JSON file describing the variance profile")
            sp.add_argument("--diag", default=None,
                            help="JSON file describing the diagonal law")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=".")
        sp.add_argument("--threads", type=int, default=1)

    t = sub.add_parser("theory", help="compute a density curve")
    common(t)
    t.add_argument("--t", type=float, default=None,
                   help="single evaluation point instead of a grid")
    t.add_argument("--t-min", type=float, default=1e-3)
    t.add_argument("--t-max", type=float, default=1e3)
    t.add_argument("--points", type=int, default=400)
    t.add_argument("--eps-floor", type=float, default=EPS_FLOOR)

    s = sub.add_parser("simulate", help="run a Monte Carlo campaign")
    common(s)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--window", default="-10:10")
    s.add_argument("--exclude-zero", type=float, default=0.0)

    c = sub.add_parser("compare", help="compare theory CSV with eigenvalue CSV")
    common(c, model=False)
    c.add_argument("--theory", required=True, help="density CSV path")
    c.add_argument("--spectra", required=True, help="eigenvalue CSV path")
    c.add_argument("--window", default="-10:10")
    c.add_argument("--exclude-zero", type=float, default=0.0)

    k = sub.add_parser("critical-set", help="locate possible density kinks")
    common(k)

    st = sub.add_parser("selftest",
                        help="run the acceptance suite at reduced sizes")
    common(st, model=False)
    return p


def _parse_window(text: str):
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise ConfigError(f"--window must be 'a:b', got {text!r}")
    if not lo < hi:
        raise ConfigError("--window is empty")
    return lo, hi


def _alpha_param(args) -> AlphaParam:
    al = args.alpha
    if al is None:
        raise ConfigError("--alpha is required")
    if al == 2.0:
        return AlphaParam(2.0, alpha_two_mode=True)
    if not 0.0 < al < 2.0:
        raise ConfigError(f"--alpha must lie in (0, 2], got {al}")
    return AlphaParam(al)


def _load_profile(args) -> SigmaProfile:
    if args.profile is None:
        return SigmaProfile("constant", c=1.0)
    try:
        with open(args.profile) as fh:
            return SigmaProfile.from_json(json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"--profile file {args.profile!r} not found")
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"--profile file {args.profile!r} invalid: {exc}")


def _load_diag(args) -> DiagonalLaw:
    if args.diag is None:
        raise ConfigError("--diag is required for the perturbed model")
    try:
        with open(args.diag) as fh:
            return DiagonalLaw.from_json(json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"--diag file {args.diag!r} not found")
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"--diag file {args.diag!r} invalid: {exc}")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HTSPECTRA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"HTSPECTRA_SEED={env!r} is not an integer")
    return 0


def _gamma(args) -> float:
    if args.gamma is None:
        raise ConfigError("--gamma is required for the wishart model")
    if not 0.0 < args.gamma <= 1.0:
        raise ConfigError(f"--gamma must lie in (0, 1], got {args.gamma}")
    return args.gamma


# ---------------------------------------------------------------------------
# output helpers


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _echo_config(args, out_dir: str):
    cfg = {k: v for k, v in vars(args).items()}
    _write(os.path.join(out_dir, "config.json"),
           json.dumps(cfg, indent=2, sort_keys=True) + "\n")


def _gnuplot_curve(csv_name: str) -> str:
    stem = os.path.splitext(csv_name)[0]
    return (f"set datafile separator ','\n"
            f"set terminal pngcairo size 900,600\n"
            f"set output '{stem}.png'\n"
            f"set logscale y\n"
            f"plot '{csv_name}' every ::1 using 1:2 with lines title 'rho'\n")


def _gnuplot_hist(csv_name: str) -> str:
    stem = os.path.splitext(csv_name)[0]
    return (f"set datafile separator ','\n"
            f"set terminal pngcairo size 900,600\n"
            f"set output '{stem}.png'\n"
            f"binwidth = 0.1\n"
            f"bin(x) = binwidth*floor(x/binwidth)\n"
            f"set boxwidth binwidth\n"
            f"plot '{csv_name}' every ::1 using (bin($2)):(1.0) "
            f"smooth freq with boxes title 'eigenvalues'\n")


# ---------------------------------------------------------------------------
# commands


def cmd_theory(args) -> int:
    a = _alpha_param(args)
    out = args.out
    _echo_config(args, out)
    eps = args.eps_floor
    if eps < EPS_FLOOR:
        raise ConfigError(f"--eps-floor must be >= {EPS_FLOOR}")
    schedule = default_eps_schedule(floor=eps)
    if args.t is not None:
        t = args.t
        if args.model == "wigner":
            rho = density_wigner_formula(a, t, eps_schedule=schedule)
        elif args.model == "band":
            rho = density_band(a, _load_profile(args), t, eps_schedule=schedule)
        elif args.model == "wishart":
            rho = density_wishart(a, _gamma(args), t, eps_schedule=schedule)
        else:
            raise ConfigError("--model perturbed exposes transforms, not "
                              "densities; use wigner/band/wishart")
        _write(os.path.join(out, "density.csv"), f"t,rho\n{t!r},{rho!r}\n")
        _write(os.path.join(out, "density.plt"), _gnuplot_curve("density.csv"))
        print(f"rho({t}) = {rho:.10g}")
        return 0
    if args.model == "wigner":
        curve = build_density_curve(a, "wigner", t_min=args.t_min,
                                    t_max=args.t_max, points=args.points)
    elif args.model == "band":
        curve = build_density_curve(a, "band", profile=_load_profile(args),
                                    t_min=args.t_min, t_max=args.t_max,
                                    points=args.points)
    elif args.model == "wishart":
        curve = build_density_curve(a, "wishart", gamma=_gamma(args),
                                    t_min=args.t_min, t_max=args.t_max,
                                    points=args.points)
    else:
        raise ConfigError("--model perturbed exposes transforms, not "
                          "densities; use wigner/band/wishart")
    _write(os.path.join(out, "density.csv"), curve.to_csv())
    _write(os.path.join(out, "density.json"),
           json.dumps(curve.sidecar(), indent=2, sort_keys=True) + "\n")
    _write(os.path.join(out, "density.plt"), _gnuplot_curve("density.csv"))
    print(f"wrote density curve ({curve.grid.size} points, "
          f"mass check {curve.total_mass():.4f}) to {out}")
    return 0


def _simulation_spec(args) -> CampaignSpec:
    a = _alpha_param(args)
    if a.alpha_two_mode:
        raise ConfigError("--alpha 2 has no heavy-tailed entry law; "
                          "simulate with alpha < 2")
    law = StableTailLaw(a.alpha)
    window = _parse_window(args.window)
    seed = _seed(args)
    if args.model == "wishart":
        m = args.m if args.m is not None else args.n // 2
        ensemble = CovarianceParams(law=law, n=args.n, m=m)
    else:
        diag = _load_diag(args) if args.model == "perturbed" else None
        ensemble = EnsembleSpec(N=args.n, law=law,
                                profile=_load_profile(args), diagonal=diag)
    return CampaignSpec(ensemble=ensemble, trials=args.trials, window=window,
                        excluded0=args.exclude_zero, master_seed=seed)


def cmd_simulate(args) -> int:
    spec = _simulation_spec(args)
    out = args.out
    _echo_config(args, out)
    result = run_campaign(spec, threads=max(1, args.threads))
    _write(os.path.join(out, "eigenvalues.csv"), spectra_to_csv(result.spectra))
    _write(os.path.join(out, "campaign.json"),
           json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n")
    _write(os.path.join(out, "eigenvalues.plt"),
           _gnuplot_hist("eigenvalues.csv"))
    print(f"simulated {spec.trials} trials "
          f"({result.pooled.eigenvalues.size} eigenvalues, "
          f"{result.aborted_trials} aborted) to {out}")
    return 0


def cmd_compare(args) -> int:
    out = args.out
    _echo_config(args, out)
    window = _parse_window(args.window)
    sidecar_path = os.path.splitext(args.theory)[0] + ".json"
    try:
        with open(args.theory) as fh:
            theory_text = fh.read()
        with open(sidecar_path) as fh:
            sidecar = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"--theory inputs missing: {exc}")
    curve = DensityCurve.from_csv(theory_text, sidecar)
    try:
        with open(args.spectra) as fh:
            spectra = spectra_from_csv(fh.read())
    except FileNotFoundError as exc:
        raise ConfigError(f"--spectra file missing: {exc}")
    campaign_path = os.path.join(os.path.dirname(args.spectra) or ".",
                                 "campaign.json")
    if os.path.exists(campaign_path):
        with open(campaign_path) as fh:
            sim_alpha = json.load(fh).get("spec", {}) \
                                     .get("ensemble", {}).get("alpha")
        if sim_alpha is not None and abs(sim_alpha - curve.alpha) > 1e-12:
            print(f"warning: theory alpha {curve.alpha} != simulation "
                  f"alpha {sim_alpha}", file=sys.stderr)
    report = distribution_distance(spectra, curve.cdf(), window,
                                   excluded0=args.exclude_zero)
    _write(os.path.join(out, "distance.json"),
           json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    print(f"ks = {report.ks:.5f}, windowed W1 = {report.w1_window:.5f}")
    return 0


def cmd_critical_set(args) -> int:
    a = _alpha_param(args)
    out = args.out
    _echo_config(args, out)
    ts = find_critical_set(a)
    _write(os.path.join(out, "critical.json"),
           json.dumps({"alpha": a.alpha, "critical_points": ts},
                      indent=2, sort_keys=True) + "\n")
    print(f"critical points (t > 0): {ts}")
    return 0


# ---------------------------------------------------------------------------
# selftest: the acceptance suite at reduced sizes


def _selftest_checks():
    import cmath

    def identity():
        worst = 0.0
        for al in (0.5, 1.0, 1.5):
            a = AlphaParam(al)
            for r in np.geomspace(1e-2, 30.0, 8):
                for frac in (-0.9, 0.0, 0.9):
                    y = r * cmath.exp(1j * frac * al * math.pi / 2.0)
                    worst = max(worst, abs(
                        h_alpha(a, y) - (1.0 - 0.5 * al * y * g_alpha(a, y))))
        return worst <= 1e-9, f"max identity error {worst:.2e}"

    def semicircle():
        a = AlphaParam(2.0, alpha_two_mode=True)
        worst = max(abs(density_wigner_formula(a, float(t))
                        - math.sqrt(max(4.0 - t * t, 0.0)) / (2.0 * math.pi))
                    for t in np.linspace(-1.9, 1.9, 10))
        return worst <= 1e-6, f"max semicircle error {worst:.2e}"

    def heavy_tail():
        a = AlphaParam(1.0)
        c = 50.0 ** 2 * density_wigner_formula(a, 50.0)
        r0 = density_wigner_formula(a, 1e-3)
        ok = abs(c - 0.5) <= 0.05 * 0.5 and abs(r0 * math.pi - 1.0) <= 0.01
        return ok, f"t^2 rho(50) = {c:.4f}, pi rho(0+) = {r0 * math.pi:.4f}"

    def band_equivalence():
        a = AlphaParam(1.5)
        prof = SigmaProfile("band", breakpoints=(0.0, 0.25, 0.75, 1.0),
                            values=(1.0, 0.0, 1.0))
        sig = 0.5 ** (1.0 / 1.5)
        worst = max(abs(density_band(a, prof, float(t))
                        - density_wigner_formula(a, float(t) / sig) / sig)
                    for t in np.linspace(0.3, 2.5, 5))
        return worst <= 1e-6, f"max band equivalence gap {worst:.2e}"

    def wigner_mc():
        a = AlphaParam(1.5)
        curve = build_density_curve(a, "wigner", t_min=0.05, t_max=100.0,
                                    points=60)
        ens = EnsembleSpec(N=400, law=StableTailLaw(1.5),
                           profile=SigmaProfile("constant", c=1.0))
        spec = CampaignSpec(ensemble=ens, trials=3, window=(-10.0, 10.0),
                            excluded0=0.2, master_seed=1)
        res = run_campaign(spec, theory_cdf=curve.cdf())
        return res.report.ks <= 0.08, f"pooled ks {res.report.ks:.4f}"

    def wishart_mc():
        cov = CovarianceParams(law=StableTailLaw(1.2), n=400, m=200)
        spec = CampaignSpec(ensemble=cov, trials=3, window=(0.1, 20.0),
                            master_seed=1)
        res = run_campaign(spec)
        frac = float(np.mean([atom_fraction(s) for s in res.spectra]))
        return abs(frac - 0.5) <= 0.05, f"atom fraction {frac:.4f}"

    def truncated_moment():
        v = truncated_moment_experiment(
            StableTailLaw(1.0), SigmaProfile("constant", c=1.0),
            2.0, 1000, 5, master_seed=1)
        return abs(v - 2.0) <= 0.2, f"moment {v:.4f}"

    def alpha_two_continuity():
        a = AlphaParam(1.95)
        s = abs(c_alpha(a)) ** (1.0 / 1.95)
        curve = build_density_curve(a, "wigner", t_min=1e-2, t_max=50.0,
                                    points=40)
        cdf = curve.cdf()
        ks = max(abs(cdf(float(t) * s) - semicircle_cdf(float(t)))
                 for t in np.linspace(-3.0, 3.0, 121))
        return ks <= 0.08, f"scaled ks vs semicircle {ks:.4f}"

    return [
        ("special-function identity", identity),
        ("alpha=2 semicircle", semicircle),
        ("alpha=1 tail and center", heavy_tail),
        ("band equivalence", band_equivalence),
        ("wigner monte carlo", wigner_mc),
        ("wishart atom", wishart_mc),
        ("truncated moment", truncated_moment),
        ("alpha->2 continuity", alpha_two_continuity),
    ]


def cmd_selftest(args) -> int:
    failures = 0
    for name, check in _selftest_checks():
        start = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:   # honest red, never a crash
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        took = time.perf_counter() - start
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"{status}  {name:28s} {detail}  ({took:.1f}s)")
    print(f"{'all checks passed' if failures == 0 else f'{failures} failed'}")
    return 0 if failures == 0 else 2


# ---------------------------------------------------------------------------


_COMMANDS = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "critical-set": cmd_critical_set,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, QuadratureError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
