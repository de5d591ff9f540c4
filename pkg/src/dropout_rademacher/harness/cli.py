"""Command line entry point: ``dropout-rademacher {sweep,moments,gap,slope,bound}``."""

import argparse
import csv
import io
import json
import sys

from ..bounds import LossSpec, generalization_bound, output_bound, theoretical_complexity_bound
from ..moments import MomentQuery, moment_analytic, moment_enumerate, moment_monte_carlo
from ..network import NetworkSpec
from .config import ConfigError, gap_config, load_config, spec_from_section, sweep_config
from .sweep import fmt, gap_experiment, read_csv, rows_to_csv, run_sweep, slopes_by_group


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_text(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def cmd_sweep(args):
    cfg = sweep_config(load_config(args.config), seed=args.seed, output=args.out)
    rows = run_sweep(cfg, jobs=args.jobs)
    bad = [r for r in rows if not r.dominance]
    print(f"{len(rows)} rows, {len(rows) - len(bad)} dominated by the bound", file=sys.stderr)
    if not cfg.output_path:
        sys.stdout.write(rows_to_csv(rows, max(cfg.k_grid)))
    return 0


def moment_grid(seed, trials, powers=(1, 2, 3, 4), dims=(1, 4, 8), rhos=(0.1, 0.3, 0.5, 0.9)):
    rows, cell = [], 0
    for p in powers:
        for d in dims:
            for rho in rhos:
                x = tuple(float(v) for v in range(1, d + 1))
                q = MomentQuery(x=x, power=p, rho=rho)
                analytic = moment_analytic(q)
                mean, se = moment_monte_carlo(q, trials, seed=seed + cell)
                rows.append(
                    {
                        "power": p,
                        "d": d,
                        "rho": rho,
                        "analytic": analytic,
                        "enumerated": moment_enumerate(q),
                        "mc_mean": mean,
                        "mc_std_error": se,
                        "within_4se": abs(mean - analytic) <= 4 * se,
                    }
                )
                cell += 1
    return rows


def cmd_moments(args):
    rows = moment_grid(args.seed or 0, args.trials)
    columns = ["power", "d", "rho", "analytic", "enumerated", "mc_mean", "mc_std_error", "within_4se"]
    _write(_rows_text(rows, columns), args.out)
    return 0


def cmd_gap(args):
    cfg = gap_config(load_config(args.config), seed=args.seed)
    report = gap_experiment(cfg.spec, cfg.train, cfg.delta, cfg.trials, cfg.master_seed, jobs=args.jobs)
    _write(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    print(f"bound held in {report['passed']}/{report['n_trials']} trials", file=sys.stderr)
    return 0


def cmd_slope(args):
    rows = slopes_by_group(read_csv(args.csv), column=args.column)
    _write(_rows_text(rows, ["type", "k", "n", "slope", "r_squared"]), args.out)
    return 0


def _spec_from_args(args):
    if args.config:
        return spec_from_section(load_config(args.config)["network"])
    widths = tuple(int(v) for v in args.widths.split(",") if v.strip()) if args.widths else ()
    budgets = (
        tuple(float(v) for v in args.budgets.split(","))
        if args.budgets
        else (1.0,) * (len(widths) + 1)
    )
    return NetworkSpec(
        input_dim=args.d,
        widths=widths,
        budgets=budgets,
        activation=args.activation,
        input_bound=args.input_bound,
    )


def cmd_bound(args):
    spec = _spec_from_args(args)
    complexity = theoretical_complexity_bound(spec, args.type, args.rho, args.n)
    loss = LossSpec(kind=args.loss, y_bound=args.y_bound)
    report = generalization_bound(
        args.empirical_risk, complexity, loss, spec, args.delta, args.n, args.variant, rho=args.rho
    )
    record = report.as_record()
    record["output_bound"] = output_bound(spec)
    record["type"] = args.type
    _write(json.dumps(record, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="dropout-rademacher", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="INI config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("sweep", help="estimate complexities over a (type, k, n, rho) grid")
    common(p, config_required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("moments", help="check mask moment identities")
    common(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("gap", help="generalization-gap experiment on synthetic regression")
    common(p, config_required=True)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("slope", help="fit log-log slopes over rho from a sweep CSV")
    common(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--column", default="bound", choices=("bound", "estimate"))
    p.set_defaults(func=cmd_slope)

    p = sub.add_parser("bound", help="closed-form complexity and risk bound")
    common(p)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--widths", default="")
    p.add_argument("--budgets", default="")
    p.add_argument("--activation", default="tanh")
    p.add_argument("--input-bound", type=float, default=1.0)
    p.add_argument("--type", default="I")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--empirical-risk", type=float, default=0.0)
    p.add_argument("--variant", choices=("expected", "empirical"), default="expected")
    p.add_argument("--loss", choices=("square", "cross_entropy_sigmoid"), default="square")
    p.add_argument("--y-bound", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
