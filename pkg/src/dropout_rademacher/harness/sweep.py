"""Grid sweeps of complexity estimates against the closed-form bounds."""

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..bounds import theoretical_complexity_bound
from ..estimator import estimate_expected_rademacher, gaussian_ball_sampler, sphere_sampler
from ..masks import child_seed
from .config import echo
from .training import gap_trial


@dataclass(frozen=True)
class SweepRow:
    index: int
    type: str
    k: int
    rho: float
    n: int
    d: int
    widths: tuple
    budgets: tuple
    input_bound: float
    estimate: float
    std_error: float
    bound: float
    dominance: bool
    seconds: float
    seed: int
    error: str = ""


def _sampler(cfg, spec):
    if cfg.distribution == "unit_sphere":
        return sphere_sampler(spec.input_dim, spec.input_bound)
    return gaussian_ball_sampler(spec.input_dim, spec.input_bound)


def grid_points(cfg):
    points = []
    for k in cfg.k_grid:
        for t in cfg.dropout_types:
            for n in cfg.n_grid:
                for rho in cfg.rho_grid:
                    points.append((len(points), t, k, rho, n))
    return points


def run_point(cfg, point):
    index, t, k, rho, n = point
    spec = cfg.spec_for_depth(k)
    seed = child_seed(cfg.master_seed, index)
    bound = theoretical_complexity_bound(spec, t, rho, n)
    start = time.perf_counter()
    error = ""
    try:
        est = estimate_expected_rademacher(
            spec, t, _sampler(cfg, spec), rho, n, replace(cfg.estimator, rng_seed=seed)
        )
        point_est, se = est.point, est.std_error
    except Exception as exc:  # recorded per row; the sweep continues
        point_est = se = math.nan
        error = f"{type(exc).__name__}: {exc}"
    return SweepRow(
        index=index,
        type=t,
        k=k,
        rho=rho,
        n=n,
        d=spec.input_dim,
        widths=spec.widths,
        budgets=spec.budgets,
        input_bound=spec.input_bound,
        estimate=point_est,
        std_error=se,
        bound=bound,
        dominance=bool(point_est <= bound + 3 * se),
        seconds=time.perf_counter() - start,
        seed=seed,
        error=error,
    )


def _run_point_args(args):
    return run_point(*args)


def parallel_map(fn, items, jobs):
    """Map preserving order; results never depend on the worker count."""
    if jobs <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def run_sweep(cfg, jobs=1):
    """One SweepRow per grid point, in grid order; writes CSV and JSON if ``cfg.output_path``."""
    rows = parallel_map(_run_point_args, [(cfg, p) for p in grid_points(cfg)], jobs)
    rows.sort(key=lambda r: r.index)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows, max(cfg.k_grid)))
        write_summary(cfg, rows)
    return rows


def fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def csv_columns(k_max):
    return (
        ["type", "k", "rho", "n", "d", "widths"]
        + [f"B{j}" for j in range(k_max + 1)]
        + ["Bhat", "estimate", "std_error", "bound", "dominance", "seconds", "seed", "error"]
    )


def rows_to_csv(rows, k_max):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(k_max))
    for r in rows:
        budgets = [fmt(b) for b in r.budgets] + [""] * (k_max + 1 - len(r.budgets))
        writer.writerow(
            [r.type, r.k, fmt(r.rho), r.n, r.d, "x".join(map(str, r.widths))]
            + budgets
            + [fmt(v) for v in (r.input_bound, r.estimate, r.std_error, r.bound, r.dominance, r.seconds)]
            + [r.seed, r.error]
        )
    return buf.getvalue()


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def run_id(config_echo):
    blob = json.dumps(config_echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode("utf-8")).hexdigest()


def write_summary(cfg, rows):
    conf = echo(cfg)
    summary = {
        "run_id": run_id(conf),
        "config": conf,
        "rows": len(rows),
        "dominant_rows": sum(r.dominance for r in rows),
        "all_dominant": all(r.dominance for r in rows),
        "errors": [r.index for r in rows if r.error],
        "seconds_total": sum(r.seconds for r in rows),
    }
    path = str(cfg.output_path)
    path = (path[: -len(".csv")] if path.endswith(".csv") else path) + ".json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def fit_loglog_slope(points):
    """Least-squares slope and r^2 of ln(value) against ln(rho)."""
    points = list(points)
    if len(points) < 2:
        raise ValueError("need at least two points")
    for rho, value in points:
        if not value > 0 or not rho > 0:
            raise ValueError(f"point (rho={rho}, value={value}) is not strictly positive")
    rhos = np.array([p[0] for p in points], dtype=float)
    if np.unique(rhos).size < 2:
        raise ValueError("need at least two distinct rho values")
    x = np.log(rhos)
    y = np.log(np.array([p[1] for p in points], dtype=float))
    xc, yc = x - x.mean(), y - y.mean()
    slope = float(np.dot(xc, yc) / np.dot(xc, xc))
    resid = yc - slope * xc
    ss_res, ss_tot = float(np.dot(resid, resid)), float(np.dot(yc, yc))
    r2 = 1.0 if ss_res == 0 or ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, r2


def slopes_by_group(rows, column="bound"):
    """Fit slope over rho for every (type, k, n) group of sweep rows or CSV dicts."""
    groups = {}
    for r in rows:
        get = r.get if isinstance(r, dict) else lambda key, r=r: getattr(r, key)
        key = (str(get("type")), int(get("k")), int(get("n")))
        groups.setdefault(key, []).append((float(get("rho")), float(get(column))))
    out = []
    for key in sorted(groups):
        pts = groups[key]
        try:
            slope, r2 = fit_loglog_slope(pts)
        except ValueError:
            slope = r2 = math.nan
        out.append({"type": key[0], "k": key[1], "n": key[2], "slope": slope, "r_squared": r2})
    return out


def _gap_trial_args(args):
    return gap_trial(*args)


def gap_experiment(spec, tcfg, delta, n_trials, seed=0, jobs=1):
    """Train on synthetic regression data n_trials times and check the risk bound each time."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    args = [(spec, tcfg, delta, child_seed(seed, t)) for t in range(n_trials)]
    trials = parallel_map(_gap_trial_args, args, jobs)
    passed = sum(t["holds"] for t in trials)
    return {
        "trials": trials,
        "n_trials": n_trials,
        "passed": passed,
        "pass_fraction": passed / n_trials,
        "delta": delta,
    }
