"""Command line: analyze, simulate and compare a scenario file.

Exit codes: 0 success, 2 schema error, 3 guard clearance, 4 numeric
failure, 5 tolerance failure in ``compare --strict``.
"""

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import GuardClearanceError, NumericError, SchemaError, TruncationError, UnsupportedConfigError
from .geometry import db_to_linear, small_ball_distances, signal_params, typical_cell_radius
from .interference import component_gammas, gamma_approx, total_moments
from .metrics import (
    ergodic_rate_exact,
    ergodic_rate_gamma,
    rate_from_coverage,
    success_probability,
    success_probability_laplace,
)
from .montecarlo import THREADS_ENV, _default_workers, simulate as run_simulation
from .scenario import load_scenario
from .tables import COMPARE_COLUMNS, CURVE_COLUMNS, Table, to_csv, write

LN2 = math.log(2.0)
EXIT_OK, EXIT_SCHEMA, EXIT_GUARD, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 2, 3, 4, 5

log = logging.getLogger("hybridcell")


def _metadata(scenario, command, **extra):
    meta = {
        "scenario": scenario.name,
        "command": command,
        "cell_radius_m": typical_cell_radius(scenario.config),
        "path_loss_exponent": scenario.config.path_loss.exponent,
        "sigma_db": scenario.config.shadow.sigma_db,
    }
    meta.update(extra)
    return meta


def _analyze_beta(scenario, beta):
    """All analytic rows for one beta, in a fixed order."""
    cfg = scenario.config
    small_ball_distances(beta, cfg)
    rows = []
    m = total_moments(beta, cfg)
    signal = signal_params(beta, cfg)
    rows.append(dict(beta=beta, method="analytic-gamma", metric="interference_mean_w", value=m.mean))
    rows.append(dict(beta=beta, method="analytic-gamma", metric="interference_var_w2", value=m.variance))
    if m.mean <= 0:
        # nothing interferes: the SIR is infinite
        for t in scenario.thresholds_db:
            rows.append(dict(beta=beta, method="analytic-gamma", metric="coverage", threshold_db=t, value=1.0))
        rows.append(dict(beta=beta, method="analytic-gamma", metric="rate_nats", value=math.inf))
        return _with_bits(rows)
    g = gamma_approx(m)
    rows.append(dict(beta=beta, method="analytic-gamma", metric="gamma_shape", value=g.shape))
    rows.append(dict(beta=beta, method="analytic-gamma", metric="gamma_scale_w", value=g.scale))
    for t in scenario.thresholds_db:
        p = success_probability(db_to_linear(t), signal, g)
        rows.append(dict(beta=beta, method="analytic-gamma", metric="coverage", threshold_db=t, value=p))
    if cfg.serving_fading.shape == 1.0:
        for t in scenario.thresholds_db:
            p = success_probability_laplace(db_to_linear(t), beta, cfg, exact_dominant=scenario.exact_dominant)
            rows.append(dict(beta=beta, method="analytic-laplace", metric="coverage", threshold_db=t, value=p))
        if scenario.laplace_rate:
            ccdf = lambda x: success_probability_laplace(x, beta, cfg, exact_dominant=scenario.exact_dominant)
            rows.append(dict(beta=beta, method="analytic-laplace", metric="rate_nats", value=rate_from_coverage(ccdf)))
    rows.append(dict(beta=beta, method="analytic-gamma", metric="rate_nats", value=ergodic_rate_gamma(signal, g)))
    exact = ergodic_rate_exact(signal, component_gammas(m), tolerance=scenario.series_tolerance)
    rows.append(dict(beta=beta, method="analytic-series", metric="rate_nats", value=exact))
    return _with_bits(rows)


def _with_bits(rows):
    """Append a bits/s/Hz row after every rate row."""
    out = []
    for row in rows:
        out.append(row)
        if row["metric"] == "rate_nats":
            bits = dict(row, metric="rate_bits_per_hz", value=row["value"] / LN2)
            if bits.get("stderr") is not None:
                bits["stderr"] = row["stderr"] / LN2
            out.append(bits)
    return out


def analyze(scenario):
    """Analytic curves over the scenario's beta grid."""
    workers = scenario.workers or _default_workers()
    betas = list(scenario.betas)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_beta = list(pool.map(lambda b: _analyze_beta(scenario, b), betas))
    else:
        per_beta = [_analyze_beta(scenario, b) for b in betas]
    table = Table(CURVE_COLUMNS, _metadata(scenario, "analyze"))
    for rows in per_beta:
        for row in rows:
            table.add(**row)
    return table


def simulate(scenario, seed=None):
    """Monte Carlo curves with layout-level standard errors."""
    plan = scenario.plan if seed is None else replace(scenario.plan, seed=seed)
    res = run_simulation(scenario.config, plan)
    method = "mc-ppp" if plan.layout_mode == "ppp-baseline" else "mc-hybrid"
    meta = _metadata(
        scenario, "simulate", layout_mode=plan.layout_mode, layouts=plan.layouts,
        fading_draws=plan.fading_draws, seed=plan.seed,
    )
    table = Table(CURVE_COLUMNS, meta)
    for j, beta in enumerate(res.betas):
        beta = float(beta)
        table.add(beta=beta, method=method, metric="interference_mean_w",
                  value=float(res.interference_mean[j]), stderr=float(res.interference_mean_se[j]))
        table.add(beta=beta, method=method, metric="interference_var_w2",
                  value=float(res.interference_var[j]), stderr=float(res.interference_var_se[j]))
        for k, t in enumerate(res.thresholds_db):
            table.add(beta=beta, method=method, metric="coverage", threshold_db=float(t),
                      value=float(res.coverage[j, k]), stderr=float(res.coverage_se[j, k]))
        rate = dict(beta=beta, method=method, metric="rate_nats", value=float(res.rate[j]), stderr=float(res.rate_se[j]))
        for row in _with_bits([rate]):
            table.add(**row)
    return table


def compare(scenario, analytic=None, empirical=None):
    """Join analytic and Monte Carlo curves; returns (table, passed, summary lines)."""
    spec = scenario.compare
    analytic = analytic or analyze(scenario)
    empirical = empirical or simulate(scenario)
    thresholds = spec.thresholds_db or scenario.thresholds_db
    cov_method = spec.analytic_method if spec.analytic_method != "analytic-series" else "analytic-gamma"
    rate_method = spec.analytic_method
    if not analytic.select(metric="rate_nats", method=rate_method):
        rate_method = "analytic-gamma"
    table = Table(COMPARE_COLUMNS, _metadata(scenario, "compare", analytic_method=spec.analytic_method, beta_max=spec.beta_max))
    worst = {}
    for erow in empirical.rows:
        metric, beta, t = erow["metric"], erow["beta"], erow["threshold_db"]
        if metric not in spec.metrics:
            continue
        if metric == "coverage":
            if t not in thresholds:
                continue
            method, tol = cov_method, spec.coverage_tolerance
        elif metric == "rate_nats":
            method, tol = rate_method, spec.rate_tolerance_nats
        else:
            continue
        match = analytic.select(beta=beta, metric=metric, threshold_db=t, method=method)
        if not match:
            continue
        a = match[0]["value"]
        dev = abs(a - erow["value"])
        checked = beta <= spec.beta_max + 1e-12
        ok = dev <= tol if checked else None
        table.add(beta=beta, metric=metric, threshold_db=t, analytic_method=method, analytic=a,
                  empirical=erow["value"], stderr=erow["stderr"], deviation=dev, tolerance=tol, within_tolerance=ok)
        if checked:
            key = (metric, t)
            worst[key] = max(worst.get(key, 0.0), dev)
    lines, passed = [], True
    for (metric, t), dev in worst.items():
        tol = spec.coverage_tolerance if metric == "coverage" else spec.rate_tolerance_nats
        ok = dev <= tol
        passed &= ok
        label = metric if t is None else f"{metric}@{t:g}dB"
        lines.append(f"{'PASS' if ok else 'FAIL'} {label}: max deviation {dev:.4f} (tolerance {tol:g}, beta <= {spec.beta_max:g})")
    return table, passed, lines


def _emit(table, out):
    if out is None:
        sys.stdout.write(to_csv(table))
    else:
        csv_path, json_path = write(table, out)
        log.info("wrote %s and %s", csv_path, json_path)


def _out_path(arg, scenario, key):
    if arg is not None:
        return arg
    default = scenario.outputs.get(key)
    if default is None:
        return None
    path = Path(default)
    if not path.is_absolute() and scenario.source is not None:
        path = scenario.source.parent / path
    return path


def build_parser():
    p = argparse.ArgumentParser(prog="hybridcell", description="Fixed-cell hybrid interference model: analytic curves and Monte Carlo.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analytic coverage, rate and interference moments")
    a.add_argument("scenario")
    a.add_argument("--out", help="CSV path (a .json mirror is written next to it); default stdout")
    s = sub.add_parser("simulate", help="Monte Carlo estimates with standard errors")
    s.add_argument("scenario")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    c = sub.add_parser("compare", help="analytic vs Monte Carlo deviations")
    c.add_argument("scenario")
    c.add_argument("--seed", type=int)
    c.add_argument("--out")
    c.add_argument("--strict", action="store_true", help=f"exit {EXIT_TOLERANCE} when a tolerance is exceeded")
    p.epilog = f"Set {THREADS_ENV} to the default worker thread count."
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        scenario = load_scenario(args.scenario)
        if args.command == "analyze":
            _emit(analyze(scenario), _out_path(args.out, scenario, "analyze"))
        elif args.command == "simulate":
            _emit(simulate(scenario, args.seed), _out_path(args.out, scenario, "simulate"))
        else:
            emp = simulate(scenario, args.seed)
            table, passed, lines = compare(scenario, empirical=emp)
            _emit(table, _out_path(args.out, scenario, "compare"))
            for line in lines:
                print(line, file=sys.stderr)
            if args.strict and not passed:
                return EXIT_TOLERANCE
    except SchemaError as exc:
        print(f"schema error at {exc.path}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except GuardClearanceError as exc:
        print(f"guard clearance violated (tier {exc.tier}, beta {exc.beta}): {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (NumericError, TruncationError, UnsupportedConfigError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
