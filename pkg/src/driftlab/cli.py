"""Command-line front end for the drift-estimation laboratory.

Usage:
    driftlab simulate --alpha 1 --n 5 --seed 7 --out path.csv
    driftlab gain-curve --n-max 10 --reps 100000 --out gain.csv
    driftlab gain-surface --n-max 8 --sigma-range 0.5,1,2,4 --out surf.csv
    driftlab constant --reps 1000000 --out const.csv
    driftlab bayes --tau 1.0 --reps 20000 --out bayes.csv
    driftlab filter --tau 1.0 --seed 3 --out filt.csv
    driftlab identity-suite --n 4 --reps 100000 --out suite.csv
    driftlab optimal-n --n-max 10 --reps 100000 --out curve.csv

Every subcommand writes one CSV file (single header row, "." decimal,
17-significant-digit floats) plus a companion gnuplot script at
<out>.plot.txt referencing the CSV columns.  Output is byte-identical
for identical configuration, including the seed, and does not depend on
--workers.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure,
3 degenerate sample, 4 identity-suite failure.
"""

from __future__ import annotations

import argparse
import sys

from . import estimators, filtering, process_sim, risk_engine
from .process_sim import DegenerateSampleError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract here is 1
    def error(self, message):
        raise _UsageError(message)


def _float_list(text):
    try:
        values = [float(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty value list")
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="driftlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, *, reps=100_000):
        p.add_argument("--alpha", type=float, default=1.0, help="drift slope (default 1)")
        p.add_argument("--sigma", type=float, default=1.0, help="noise volatility (default 1)")
        p.add_argument("--T", type=float, default=1.0, help="time horizon (default 1)")
        p.add_argument("--reps", type=int, default=reps, help=f"replicates (default {reps})")
        p.add_argument("--seed", type=int, default=0, help="stream seed (default 0)")
        p.add_argument("--n-basis", type=int, default=1024, help="expansion length (default 1024)")
        p.add_argument("--grid", type=int, default=2048, help="grid intervals (default 2048)")
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("simulate", help="one observed path and its shrunk estimate")
    common(p)
    p.add_argument("--n", type=int, default=5, help="functional dimension (default 5)")
    p.add_argument("--a", type=float, default=None, help="exponent (default 2-n)")

    p = sub.add_parser("gain-curve", help="gain for n = 3..n-max")
    common(p)
    p.add_argument("--n-max", type=int, default=10, help="largest n (default 10)")

    p = sub.add_parser("gain-surface", help="gain over n and one swept parameter")
    common(p)
    p.add_argument("--n-max", type=int, default=10, help="largest n (default 10)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--T-range", type=_float_list, default=None,
                       help="comma-separated horizons to sweep")
    group.add_argument("--sigma-range", type=_float_list, default=None,
                       help="comma-separated volatilities to sweep")

    p = sub.add_parser("constant", help="the universal limit-gain constant")
    common(p)

    p = sub.add_parser("bayes", help="Bayes risk: closed form vs Monte Carlo")
    common(p, reps=20_000)
    p.add_argument("--tau", type=float, default=1.0, help="prior volatility (default 1)")
    p.add_argument("--v-slope", type=float, default=0.0,
                   help="slope of the linear prior mean drift (default 0)")

    p = sub.add_parser("filter", help="conditional drift and variance of one path")
    common(p)
    p.add_argument("--tau", type=float, default=1.0, help="prior volatility (default 1)")
    p.add_argument("--v-slope", type=float, default=0.0,
                   help="slope of the linear prior mean drift (default 0)")

    p = sub.add_parser("identity-suite", help="paired closed-form risk identity checks")
    common(p)
    p.add_argument("--n", type=int, default=4, help="functional dimension (default 4)")
    p.add_argument("--a", type=float, default=None, help="exponent (default 2-n)")
    p.add_argument("--corrupt-lambda", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("optimal-n", help="argmax of the gain curve")
    common(p)
    p.add_argument("--n-max", type=int, default=10, help="largest n (default 10)")
    return parser


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_plot_script(out, title, plot_terms):
    lines = [
        "# companion plot script; render with: gnuplot -p " + out + ".plot.txt",
        'set datafile separator ","',
        "set key autotitle columnhead",
        f'set title "{title}"',
        "plot " + ", ".join(f'"{out}" using {term}' for term in plot_terms),
        "",
    ]
    with open(out + ".plot.txt", "w", encoding="ascii", newline="") as fh:
        fh.write("\n".join(lines))


def _model(args):
    return process_sim.ModelParams(sigma=args.sigma, T=args.T, alpha=args.alpha)


def _cmd_simulate(args) -> int:
    params = _model(args)
    grid = process_sim.TimeGrid(args.grid, args.T)
    u = process_sim.DriftSpec.linear(args.alpha)
    sample = process_sim.simulate_path(args.seed, 0, u, params, grid, args.n_basis)
    a = args.a if args.a is not None else float(2 - args.n)
    fnl = estimators.CylindricalFunctional(n=args.n, a=a)
    stein = estimators.stein_estimate(sample, u, fnl)
    rows = zip(grid.points, sample.u, sample.x, sample.xu, stein.values)
    _write_csv(args.out, ["t", "u", "x", "xu", "stein_estimate"], rows)
    _write_plot_script(args.out, "observed path and estimates",
                       ["1:2 with lines", "1:3 with lines", "1:5 with lines"])
    return 0


def _gain_rows(curve):
    for row in curve.rows:
        yield row.n, row.gain_mean, row.gain_stderr, 100.0 * row.gain_mean


def _cmd_gain_curve(args) -> int:
    curve = risk_engine.gain_curve(args.alpha, args.sigma, args.T, args.n_max,
                                   args.reps, args.seed, workers=args.workers)
    _write_csv(args.out, ["n", "gain_mean", "gain_stderr", "gain_pct"], _gain_rows(curve))
    _write_plot_script(args.out, "percentage gain against n",
                       ["1:4 with linespoints"])
    return 0


def _cmd_gain_surface(args) -> int:
    sweep_t = args.T_range is not None
    values = sorted(args.T_range if sweep_t else args.sigma_range)
    rows = []
    for value in values:
        t_hor = value if sweep_t else args.T
        sigma = args.sigma if sweep_t else value
        curve = risk_engine.gain_curve(args.alpha, sigma, t_hor, args.n_max,
                                       args.reps, args.seed, workers=args.workers)
        for row in curve.rows:
            rows.append((row.n, value, row.gain_mean, row.gain_stderr))
    rows.sort(key=lambda r: (r[1], r[0]))
    _write_csv(args.out, ["n", "param_value", "gain_mean", "gain_stderr"], rows)
    _write_plot_script(args.out, "gain surface", ["1:2:3 with points palette"])
    return 0


def _cmd_constant(args) -> int:
    rep = risk_engine.universal_constant(args.reps, args.seed, workers=args.workers)
    _write_csv(args.out, ["estimate", "stderr", "reps"],
               [(rep.mean, rep.stderr, rep.reps)])
    _write_plot_script(args.out, "universal constant", ["0:1 with points"])
    return 0


def _cmd_bayes(args) -> int:
    params = _model(args)
    spec = estimators.BayesSpec(
        tau=process_sim.VolatilityProfile.constant(args.tau),
        v=process_sim.DriftSpec.linear(args.v_slope),
    )
    sigma_profile = process_sim.VolatilityProfile.constant(args.sigma)
    closed = estimators.bayes_risk_closed_form(spec, sigma_profile, args.T)
    rep = risk_engine.mc_risk(spec, None, params, args.reps, args.seed,
                              grid_m=args.grid, workers=args.workers)
    _write_csv(args.out, ["closed_form_risk", "mc_risk", "mc_stderr", "reps"],
               [(closed, rep.mean, rep.stderr, rep.reps)])
    _write_plot_script(args.out, "Bayes risk check", ["0:1 with points", "0:2 with points"])
    return 0


def _cmd_filter(args) -> int:
    params = _model(args)
    grid = process_sim.TimeGrid(args.grid, args.T)
    u = process_sim.DriftSpec.linear(args.alpha)
    sample = process_sim.simulate_path(args.seed, 0, u, params, grid, args.n_basis)
    v = process_sim.DriftSpec.linear(args.v_slope)
    tau_profile = process_sim.VolatilityProfile.constant(args.tau)
    sigma_profile = process_sim.VolatilityProfile.constant(args.sigma)
    drift, variance = filtering.scalar_path_filter(
        sample.x, v, tau_profile, sigma_profile, grid, params
    )
    rows = zip(grid.points, drift, variance)
    _write_csv(args.out, ["t", "cond_drift", "cond_variance"], rows)
    _write_plot_script(args.out, "conditional drift and variance",
                       ["1:2 with lines", "1:3 with lines"])
    return 0


def _cmd_identity_suite(args) -> int:
    params = _model(args)
    a = args.a if args.a is not None else float(2 - args.n)
    fnl = estimators.CylindricalFunctional(n=args.n, a=a)
    u = process_sim.DriftSpec.linear(args.alpha)
    report = risk_engine.identity_suite(
        fnl, u, params, args.reps, args.seed, grid_m=args.grid,
        n_basis=args.n_basis, workers=args.workers,
        lambda_scale=args.corrupt_lambda,
    )
    rows = [(r.name, r.lhs, r.rhs, r.paired_stderr, r.passed) for r in report.rows]
    _write_csv(args.out, ["name", "lhs", "rhs", "paired_stderr", "pass"], rows)
    _write_plot_script(args.out, "identity suite", ["2:3 with points"])
    return 0 if report.all_passed else 4


def _cmd_optimal_n(args) -> int:
    n_opt, curve = risk_engine.optimal_n_search(
        args.alpha, args.sigma, args.T, args.n_max, args.reps, args.seed,
        workers=args.workers,
    )
    _write_csv(args.out, ["n", "gain_mean", "gain_stderr", "gain_pct"], _gain_rows(curve))
    _write_plot_script(args.out, "percentage gain against n", ["1:4 with linespoints"])
    print(f"n_opt={n_opt}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "gain-curve": _cmd_gain_curve,
    "gain-surface": _cmd_gain_surface,
    "constant": _cmd_constant,
    "bayes": _cmd_bayes,
    "filter": _cmd_filter,
    "identity-suite": _cmd_identity_suite,
    "optimal-n": _cmd_optimal_n,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.subcommand](args)
    except _UsageError as exc:
        print(f"driftlab: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"driftlab: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except DegenerateSampleError as exc:
        print(f"driftlab: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"driftlab: cannot write output: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
