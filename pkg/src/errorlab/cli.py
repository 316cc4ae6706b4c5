"""Command-line front end.

Exit codes: 0 success, 2 usage (bad flags or parameter validation),
3 runtime failure (resource caps, precision, storage); runtime failures
emit a one-line JSON error object on stderr.

Each command carries at most one --seed flag; everything random inside a
command draws from counter-based streams derived from that one seed, so
sub-draws (grid vs model vs tail) stay independent and reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, arith, empirics, independence, model, series, storage, tails
from .errors import ErrorlabError, UsageError

_WORKERS_HELP = "worker cap for parallel sections; results do not depend on it"


def _intish(text: str) -> int:
    """Integer flag value, scientific notation accepted (1e6 -> 1000000)."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value != int(value) or abs(value) > 2**53:
        raise argparse.ArgumentTypeError(f"not an exact integer: {text!r}")
    return int(value)


def _emit_error(exc: BaseException) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)


def _config_of(args) -> dict:
    skip = {"func", "csv_header", "out"}
    cfg = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        if isinstance(value, Path):
            value = str(value)
        cfg[key] = value
    if args.out:
        cfg["out"] = str(args.out)
    return cfg


def _write_csv_stdout(header, rows) -> None:
    import csv as _csv

    w = _csv.writer(sys.stdout, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)


def _emit(args, kind: str, results, csv_spec=None, bin_values=None) -> None:
    """Route results to stdout or --out in the requested format."""
    fmt = args.format
    config = _config_of(args)
    if fmt == "json":
        envelope = storage.report_envelope(kind, config, results)
        storage.validate_report(envelope)
        if args.out:
            storage.write_report_json(args.out, kind, config, results)
        else:
            print(json.dumps(envelope, indent=2, sort_keys=True))
        return
    if fmt == "csv":
        if csv_spec is None:
            raise UsageError(f"csv output is not defined for {kind}")
        header, rows = csv_spec
        if args.out:
            storage.write_csv(args.out, header, rows)
        else:
            _write_csv_stdout(header, rows)
        return
    if fmt == "bin":
        if bin_values is None:
            raise UsageError(f"bin output is not defined for {kind}")
        arr = np.ascontiguousarray(bin_values, dtype=np.float64)
        if args.out:
            storage.write_values_bin(args.out, arr)
        else:
            sys.stdout.buffer.write(arr.astype("<f8").tobytes())
        return
    raise UsageError(f"unknown format {fmt!r}")


# ----------------------------------------------------------------- commands


def _cmd_error_term(args) -> int:
    value = arith.error_term(args.family, args.x)
    results = asdict(value)
    header = ["family", "x", "counting", "main_term", "remainder"]
    row = [value.family, value.x, value.counting, value.main_term, value.remainder]
    _emit(args, "error-term", results, csv_spec=(header, [row]))
    return 0


def _cmd_series(args) -> int:
    spec = series.SeriesSpec(args.family, args.kernel_limit, args.inner_limit)
    ts = np.asarray(args.t, dtype=np.float64)
    values = series.evaluate_grid(spec, ts)
    table = series.table_for(spec)
    results = {
        "kernel_limit": spec.kernel_limit,
        "inner_limit": spec.resolved_inner_limit(),
        "term_count": int(table.term_count),
        "variance": table.variance(),
        "points": [{"t": float(t), "value": float(v)} for t, v in zip(ts, values)],
    }
    header = ["t", "value"]
    rows = [[float(t), float(v)] for t, v in zip(ts, values)]
    _emit(args, "series", results, csv_spec=(header, rows), bin_values=values)
    return 0


def _cmd_model_sample(args) -> int:
    spec = model.ModelSpec(args.family, args.kernel_limit, args.inner_limit)
    batch = model.sample(spec, args.count, args.seed, args.start_index)
    if args.out and args.format == "json":
        config = _config_of(args)
        manifest_path = storage.sample_store_write(
            Path(args.out).with_suffix(""), batch.values, config, args.seed,
            derived_streams=("model",))
        print(json.dumps({"manifest": str(manifest_path),
                          "count": batch.count}, indent=2))
        return 0
    results = {
        "count": batch.count,
        "seed": args.seed,
        "values": [float(v) for v in batch.values],
    }
    header = ["index", "value"]
    rows = [[args.start_index + i, float(v)] for i, v in enumerate(batch.values)]
    _emit(args, "model-sample", results, csv_spec=(header, rows),
          bin_values=batch.values)
    return 0


def _cmd_model_moment(args) -> int:
    spec = model.ModelSpec(args.family, args.kernel_limit, args.inner_limit)
    if args.method == "exact":
        mv = model.exact_moment(spec, args.k)
    else:
        batch = model.sample(spec, args.count, args.seed)
        mv = empirics.empirical_moment(batch.values, args.k)
    results = asdict(mv)
    results["k"] = args.k
    header = ["k", "value", "method", "error_bound"]
    rows = [[args.k, mv.value, mv.method, mv.error_bound]]
    _emit(args, "model-moment", results, csv_spec=(header, rows))
    return 0


def _cmd_model_transform(args) -> int:
    spec = model.ModelSpec(args.family, args.kernel_limit, args.inner_limit)
    points, rows, flat = [], [], []
    for a in args.at:
        if args.kind == "laplace":
            v = model.laplace(spec, a, cap=args.lambda_cap)
            points.append({"at": a, "value": v})
            rows.append([a, v])
            flat.append(v)
        else:
            z = model.char_fn(spec, a)
            points.append({"at": a, "re": z.real, "im": z.imag})
            rows.append([a, z.real, z.imag])
            flat.extend((z.real, z.imag))
    results = {"kind": args.kind, "points": points}
    header = ["at", "value"] if args.kind == "laplace" else ["at", "re", "im"]
    _emit(args, "model-transform", results, csv_spec=(header, rows),
          bin_values=np.array(flat))
    return 0


def _cmd_experiment_moments(args) -> int:
    report = empirics.moment_match_report(
        args.family, args.T, args.M, args.h, weights=args.weights,
        grid_count=args.grid_count, seed=args.seed, strategy=args.strategy)
    results = asdict(report)
    header = ["family", "T", "M", "h", "weights", "empirical", "exact",
              "difference", "admissible"]
    row = [report.family, report.T, report.M, report.h, report.weights,
           report.empirical, report.exact, report.difference, report.admissible]
    _emit(args, "moments", results, csv_spec=(header, [row]))
    return 0


def _cmd_experiment_cdf(args) -> int:
    spec = series.SeriesSpec(args.family, args.N)
    grid = empirics.t_grid(args.T, args.count, args.strategy, args.seed)
    series_values = series.evaluate_grid(spec, grid.points)
    batch = model.sample(model.matched_model(spec), args.count, args.seed)
    ks = empirics.ks_distance(empirics.empirical_cdf(series_values),
                              empirics.empirical_cdf(batch.values))
    results = {
        "ks_distance": ks,
        "count": args.count,
        "series_variance": float(np.var(series_values)),
        "model_variance": float(np.var(batch.values)),
        "closed_form_variance": model.variance_closed_form(
            args.family, args.N,
            series.table_for(spec).inner_limit).value,
        "derived_streams": ["grid", "model"],
    }
    header = ["family", "T", "N", "count", "ks_distance"]
    row = [args.family, args.T, args.N, args.count, ks]
    _emit(args, "cdf", results, csv_spec=(header, [row]))
    return 0


def _cmd_experiment_laplace(args) -> int:
    spec = series.SeriesSpec(args.family, args.N)
    policy = empirics.clip_policy(args.T, args.c3)
    grid = empirics.t_grid(args.T, args.count, args.strategy, args.seed)
    values = series.evaluate_grid(spec, grid.points)
    matched = model.matched_model(spec)
    rows, per_lambda = [], []
    for lam in args.lambdas:
        emp = empirics.clipped_laplace(values, lam, policy.V)
        mod = model.laplace(matched, lam)
        rel = abs(emp.value - mod) / mod
        per_lambda.append({
            "lam": lam, "empirical": emp.value, "model": mod,
            "rel_difference": rel, "excluded_fraction": emp.excluded_fraction,
        })
        rows.append([lam, emp.value, mod, rel, emp.excluded_fraction])
    results = {
        "clip": policy.V, "K": policy.K, "K_eff": policy.K_eff,
        "per_lambda": per_lambda, "derived_streams": ["grid"],
    }
    header = ["lam", "empirical", "model", "rel_difference", "excluded_fraction"]
    _emit(args, "laplace", results, csv_spec=(header, rows))
    return 0


def _cmd_experiment_tails(args) -> int:
    spec = model.ModelSpec(args.family, args.kernel_limit, args.inner_limit)
    report = tails.tail_report(spec, np.asarray(args.v_grid), args.count,
                               args.seed, lambda_cap=args.lambda_cap, b=args.b)
    results = {
        "family": report.family,
        "kernel_limit": report.kernel_limit,
        "inner_limit": report.inner_limit,
        "count": report.count,
        "seed": report.seed,
        "rows": [dict(zip(("V", "chernov", "pz", "mc", "mc_ci", "reference"), r))
                 for r in report.rows()],
        "derived_streams": ["tail"],
    }
    header = ["V", "chernov", "pz", "mc", "mc_ci", "reference"]
    _emit(args, "tails", results, csv_spec=(header, [list(r) for r in report.rows()]))
    return 0


def _cmd_independence_verify(args) -> int:
    result = independence.exhaustive_verify(args.M, args.m, cap=args.cap)
    cert = independence.certificate(result)
    header = ["M", "m", "min_lower", "min_upper", "bound", "holds"]
    row = [result.M, result.m, result.min_lower, result.min_upper,
           result.bound.value, result.holds]
    _emit(args, "independence-verify", cert, csv_spec=(header, [row]))
    return 0


def _cmd_independence_search(args) -> int:
    result = independence.near_relation_search(args.M, args.m, args.budget, args.seed)
    results = asdict(result)
    results["witness"] = [[eps, n] for eps, n in result.witness]
    header = ["M", "m", "budget", "seed", "best_abs", "exhaustive"]
    row = [result.M, result.m, result.budget, result.seed,
           result.best_abs, result.exhaustive]
    _emit(args, "independence-search", results, csv_spec=(header, [row]))
    return 0


def _cmd_scan(args) -> int:
    result = empirics.extreme_scan(args.X, args.grid_density, args.family)
    results = asdict(result)
    results["ratio"] = result.max_value / result.reference_value
    header = ["family", "X", "max_value", "argmax", "reference_value"]
    row = [result.family, result.X, result.max_value, result.argmax,
           result.reference_value]
    _emit(args, "scan", results, csv_spec=(header, [row]))
    return 0


def _cmd_cache(args) -> int:
    if args.action == "status":
        entries = arith.cache_status()
    elif args.action == "clear":
        removed = arith.cache_clear()
        entries = [{"removed": removed}]
    else:
        if args.limit is None:
            raise UsageError("cache build requires a limit")
        entries = arith.cache_build(args.limit)
    results = {"action": args.action, "entries": entries,
               "cache_dir": str(arith.cache_dir())}
    header = sorted({k for e in entries for k in e}) or ["empty"]
    rows = [[e.get(k, "") for k in header] for e in entries]
    _emit(args, "cache", results, csv_spec=(header, rows))
    return 0


# ------------------------------------------------------------------ parser


def _add_common(p, *, seed=False, workers=False):
    p.add_argument("--format", choices=("csv", "json", "bin"), default="json")
    p.add_argument("--out", type=Path, default=None, help="output path (default stdout)")
    if seed:
        p.add_argument("--seed", type=_intish, default=0)
    if workers:
        p.add_argument("--workers", type=_intish, default=1, help=_WORKERS_HELP)


def _add_truncation(p, families=("divisor", "circle", "zeta2")):
    p.add_argument("--family", choices=families, default="divisor")
    p.add_argument("--kernel-limit", type=_intish, required=True)
    p.add_argument("--inner-limit", type=_intish, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="errorlab",
        description="Error terms of arithmetic counting functions and their random models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("error-term", help="exact counting error term at a point")
    p.add_argument("--family", choices=("divisor", "circle"), default="divisor")
    p.add_argument("--x", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_error_term)

    p = sub.add_parser("series", help="evaluate a truncated series at points")
    _add_truncation(p)
    p.add_argument("--t", type=float, nargs="+", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_series)

    pm = sub.add_parser("model", help="random model operations")
    msub = pm.add_subparsers(dest="subcommand", required=True)

    p = msub.add_parser("sample", help="draw model samples")
    _add_truncation(p)
    p.add_argument("--count", type=_intish, required=True)
    p.add_argument("--start-index", type=_intish, default=0)
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=_cmd_model_sample)

    p = msub.add_parser("moment", help="exact or Monte Carlo model moment")
    _add_truncation(p)
    p.add_argument("--k", type=_intish, required=True)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--count", type=_intish, default=10**5,
                   help="sample count for --method mc")
    _add_common(p, seed=True)
    p.set_defaults(func=_cmd_model_moment)

    p = msub.add_parser("transform", help="Laplace transform or characteristic function")
    _add_truncation(p)
    p.add_argument("--kind", choices=("laplace", "char"), required=True)
    p.add_argument("--at", type=float, nargs="+", required=True)
    p.add_argument("--lambda-cap", type=float, default=model.LAPLACE_LAMBDA_CAP)
    _add_common(p)
    p.set_defaults(func=_cmd_model_transform)

    pe = sub.add_parser("experiment", help="scan-vs-model experiments")
    esub = pe.add_subparsers(dest="subcommand", required=True)

    p = esub.add_parser("moments", help="empirical vs exact moment matching")
    p.add_argument("--family", choices=("divisor", "circle", "zeta2"), default="divisor")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--M", type=_intish, required=True)
    p.add_argument("--h", type=_intish, required=True)
    p.add_argument("--weights", choices=("unit", "alternating"), default="unit")
    p.add_argument("--grid-count", type=_intish, default=10**6)
    p.add_argument("--strategy", choices=empirics.STRATEGIES,
                   default="jittered-stratified")
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=_cmd_experiment_moments)

    p = esub.add_parser("cdf", help="KS distance: series scan vs model samples")
    p.add_argument("--family", choices=("divisor", "circle"), default="divisor")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--N", type=_intish, required=True)
    p.add_argument("--count", type=_intish, default=10**5)
    p.add_argument("--strategy", choices=empirics.STRATEGIES,
                   default="jittered-stratified")
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=_cmd_experiment_cdf)

    p = esub.add_parser("laplace", help="clipped empirical vs model Laplace transform")
    p.add_argument("--family", choices=("divisor", "circle"), default="divisor")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--N", type=_intish, required=True)
    p.add_argument("--lambdas", type=float, nargs="+", default=(0.5, 1.0, 2.0))
    p.add_argument("--count", type=_intish, default=10**5)
    p.add_argument("--c3", type=float, default=10.0, help="clip constant C3")
    p.add_argument("--strategy", choices=empirics.STRATEGIES,
                   default="jittered-stratified")
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=_cmd_experiment_laplace)

    p = esub.add_parser("tails", help="Chernov / Paley-Zygmund / MC tail sandwich")
    _add_truncation(p)
    p.add_argument("--v-grid", type=float, nargs="+", default=(0.5, 1.0, 1.5, 2.0))
    p.add_argument("--count", type=_intish, default=10**6)
    p.add_argument("--lambda-cap", type=float, default=tails.DEFAULT_LAMBDA_CAP)
    p.add_argument("--b", type=float, default=1.0)
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=_cmd_experiment_tails)

    pi = sub.add_parser("independence", help="linear relations among square roots")
    isub = pi.add_subparsers(dest="subcommand", required=True)

    p = isub.add_parser("verify", help="certified exhaustive lower-bound check")
    p.add_argument("--M", type=_intish, required=True)
    p.add_argument("--m", type=_intish, required=True)
    p.add_argument("--cap", type=_intish, default=2 * 10**7)
    _add_common(p, workers=True)
    p.set_defaults(func=_cmd_independence_verify)

    p = isub.add_parser("search", help="budgeted near-relation search")
    p.add_argument("--M", type=_intish, required=True)
    p.add_argument("--m", type=_intish, required=True)
    p.add_argument("--budget", type=_intish, required=True)
    _add_common(p, seed=True)
    p.set_defaults(func=_cmd_independence_search)

    p = sub.add_parser("scan", help="extreme-value scan of the exact error term")
    p.add_argument("--family", choices=("divisor", "circle"), default="divisor")
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--grid-density", type=_intish, default=10**4)
    _add_common(p, workers=True)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("cache", help="sieve cache management")
    p.add_argument("action", choices=("status", "clear", "build"))
    p.add_argument("limit", type=_intish, nargs="?", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_cache)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error(exc)
        return 2
    except ErrorlabError as exc:
        _emit_error(exc)
        return 3
    except OSError as exc:
        _emit_error(exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
