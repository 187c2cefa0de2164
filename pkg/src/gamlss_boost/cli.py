"""Command-line front end: fit, predict, cv, simulate and brier.

All outputs are comma-separated UTF-8 files with a header row. Floats are
written with ``repr`` so reruns with the same flags are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .data import Dataset, FitConfig, FittedModel, load_csv, split_holdout
from .engine import boost_fit
from .errors import GamlssBoostError, SchemeError
from .families import FAMILIES, get_family
from .metrics import brier_curve, coefficient_table, default_grid, integrate_brier
from .parallel import default_jobs, parallel_map
from .simulation import SIMULATORS, run_study
from .steps import PRESETS, preset
from .tuning import default_max_m, repeated_cv

TRACE_COLUMNS = (
    "iteration", "parameter", "covariate", "nu", "sqnorm", "zeta", "loss", "applied",
    "nu_star", "intercept", "slope", "boundary", "fallback",
)


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_dicts(path, rows) -> None:
    header = list(rows[0]) if rows else []
    write_rows(path, header, [[r[k] for k in header] for r in rows])


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _scheme(name, family):
    try:
        return preset(name, family)
    except SchemeError as exc:
        raise UsageError(str(exc)) from None


def _standardized(d: Dataset) -> Dataset:
    if d.p == 0:
        return d
    sd = d.X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return Dataset(d.y, (d.X - d.X.mean(axis=0)) / sd, d.names)


def trace_rows(trace, names, param_names):
    for m in range(trace.m_stop):
        for k, pname in enumerate(param_names):
            j = int(trace.covariate[m, k])
            yield (
                m + 1, pname, names[j] if j >= 0 else "(Intercept)",
                trace.nu[m, k], trace.sqnorm[m, k], trace.zeta[m, k], trace.rho[m, k],
                int(trace.applied[m] == k), trace.nu_star[m, k],
                trace.intercept[m, k], trace.slope[m, k],
                bool(trace.boundary[m, k]), bool(trace.fallback[m, k]),
            )


def read_trace(path):
    """Parse ``trace.csv`` back into a list of per-row dicts with typed values."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            out.append(
                {
                    "iteration": int(r["iteration"]),
                    "parameter": r["parameter"],
                    "covariate": r["covariate"],
                    "nu": float(r["nu"]),
                    "applied": r["applied"] == "1",
                    "intercept": float(r["intercept"]),
                    "slope": float(r["slope"]),
                }
            )
    return out


def cmd_fit(args) -> list[str]:
    fam = get_family(args.family)
    spec = _scheme(args.scheme, fam)
    d = load_csv(args.data, args.response)
    cfg = FitConfig(fam.id, spec, args.mstop, args.lambda_s, args.seed)
    model, trace = boost_fit(d, cfg, standardize=args.standardize)
    os.makedirs(args.out, exist_ok=True)
    paths = [os.path.join(args.out, f) for f in ("coefficients.csv", "trace.csv", "model.json")]
    write_dicts(paths[0], coefficient_table(model))
    write_rows(paths[1], TRACE_COLUMNS, trace_rows(trace, d.names, fam.param_names))
    model.save_json(paths[2])
    return paths


def _read_covariates(path, names):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        missing = [n for n in names if n not in header]
        if missing:
            raise UsageError(f"covariate '{missing[0]}' not found in {path}")
        idx = [header.index(n) for n in names]
        rows = []
        for r, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                rows.append([float(row[i]) for i in idx])
            except (ValueError, IndexError):
                raise UsageError(f"bad covariate value at row {r}") from None
    return np.array(rows, dtype=float).reshape(len(rows), len(names))


def cmd_predict(args) -> list[str]:
    model = FittedModel.load_json(args.model)
    X = _read_covariates(args.data, model.names)
    theta = model.predict(X)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "predictions.csv")
    rows = ([i + 1, *theta[i]] for i in range(theta.shape[0]))
    write_rows(path, ["row", *model.param_names], rows)
    return [path]


def cmd_cv(args) -> list[str]:
    fam = get_family(args.family)
    spec = _scheme(args.scheme, fam)
    d = load_csv(args.data, args.response)
    if args.folds > d.n:
        raise UsageError(f"--folds {args.folds} exceeds the number of rows ({d.n})")
    if args.standardize:
        d = _standardized(d)
    cfg = FitConfig(fam.id, spec, 1, args.lambda_s, args.seed)
    max_m = args.max_mstop or default_max_m(spec.name)
    res = repeated_cv(d, cfg, args.folds, max_m, args.repeats, args.seed, args.jobs)
    os.makedirs(args.out, exist_ok=True)
    curve_path = os.path.join(args.out, "risk_curve.csv")
    stop_path = os.path.join(args.out, "mstop.json")
    write_rows(curve_path, ["iteration", "mean_risk"],
               ([m + 1, v] for m, v in enumerate(res.mean_curve)))
    write_json(
        stop_path,
        {
            "m_stop": res.m_stop,
            "q1": res.q1,
            "q3": res.q3,
            "per_repeat": list(res.per_repeat),
            "curve_argmin": int(np.argmin(res.mean_curve)) + 1,
        },
    )
    return [curve_path, stop_path]


def cmd_simulate(args) -> list[str]:
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        _scheme(s, args.setting)
    noise = [int(v) for v in args.noise.split(",") if v.strip()]
    res = run_study(
        args.setting, schemes, args.replicates, n=args.n, noise_levels=noise,
        folds=args.folds, seed=args.seed, max_m=args.max_mstop,
        lambda_s=args.lambda_s, jobs=args.jobs,
    )
    return res.write_csv(args.out, timing=args.timing)


def _brier_repeat(job):
    d, spec, args_t, seed = job
    folds, max_m, split, grid_points, lambda_s = args_t
    split_ss, cv_ss = np.random.SeedSequence(seed).spawn(2)
    train, val = split_holdout(d, split, split_ss)
    cfg = FitConfig("weibull", spec, 1, lambda_s)
    res = repeated_cv(train, cfg, folds, max_m, 1, int(cv_ss.generate_state(1)[0]))
    model, _ = boost_fit(train, cfg.with_mstop(res.m_stop))
    grid = default_grid(val, grid_points)
    scores = brier_curve(model, val, grid)
    return grid, scores, integrate_brier(grid, scores)


def cmd_brier(args) -> list[str]:
    if args.family != "weibull":
        raise UsageError("brier scoring needs --family weibull")
    spec = _scheme(args.scheme, "weibull")
    d = load_csv(args.data, args.response)
    d.check_family("weibull")
    if args.standardize:
        d = _standardized(d)
    if not 0.0 < args.split < 1.0:
        raise UsageError("--split must lie in (0, 1)")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    max_m = args.max_mstop or default_max_m(spec.name)
    args_t = (args.folds, max_m, args.split, args.grid, args.lambda_s)
    seeds = [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(args.seed).spawn(args.repeats)]
    results = parallel_map(_brier_repeat, [(d, spec, args_t, s) for s in seeds], args.jobs)
    os.makedirs(args.out, exist_ok=True)
    curve_path = os.path.join(args.out, "brier_curve.csv")
    ibs_path = os.path.join(args.out, "ibs.csv")
    grid, scores, _ = results[0]
    write_rows(curve_path, ["t", "BS"], zip(grid, scores))
    write_rows(ibs_path, ["repeat", "IBS"], ((i + 1, r[2]) for i, r in enumerate(results)))
    return [curve_path, ibs_path]


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamlss-boost",
        description="Non-cyclical component-wise gradient boosting for GAMLSS.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    families = sorted(FAMILIES)

    def common(p, family_choices=families):
        p.add_argument("--family", required=True, choices=family_choices)
        p.add_argument("--scheme", required=True, choices=PRESETS)
        p.add_argument("--lambda-s", type=float, default=0.1, dest="lambda_s")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--standardize", action="store_true",
                       help="centre and scale covariates before boosting")
        p.add_argument("--out", required=True)

    def data(p):
        p.add_argument("--data", required=True)
        p.add_argument("--response", default="y")

    def jobs(p):
        p.add_argument("--jobs", type=_positive_int, default=None,
                       help="worker processes (default: $GAMLSS_BOOST_JOBS or 1)")

    p = sub.add_parser("fit", help="fit one model and write coefficients, trace and model")
    data(p)
    common(p)
    p.add_argument("--mstop", type=_positive_int, required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="natural-scale parameters from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="choose m_stop by (repeated) k-fold cross-validation")
    data(p)
    common(p)
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--max-mstop", type=_positive_int, default=None, dest="max_mstop")
    p.add_argument("--repeats", type=_positive_int, default=1)
    jobs(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", help="multi-replicate scheme comparison study")
    p.add_argument("--setting", required=True, choices=sorted(SIMULATORS))
    p.add_argument("--schemes", required=True, help="comma-separated presets")
    p.add_argument("--replicates", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, default=500)
    p.add_argument("--noise", default="0", help="comma-separated extra noise covariate counts")
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--max-mstop", type=_positive_int, default=None, dest="max_mstop")
    p.add_argument("--lambda-s", type=float, default=0.1, dest="lambda_s")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock seconds (outputs are then not reproducible)")
    p.add_argument("--out", required=True)
    jobs(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("brier", help="split, tune, fit and score Weibull survival predictions")
    data(p)
    common(p, ["weibull"])
    p.add_argument("--split", type=float, default=1.0 / 3.0)
    p.add_argument("--grid", type=_positive_int, default=100)
    p.add_argument("--repeats", type=_positive_int, default=1)
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--max-mstop", type=_positive_int, default=None, dest="max_mstop")
    jobs(p)
    p.set_defaults(func=cmd_brier)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "jobs", 1) is None:
            args.jobs = default_jobs()
        args.func(args)
    except UsageError as exc:
        parser.exit(2, f"{parser.prog} {args.command}: usage error: {exc}\n")
    except (GamlssBoostError, ValueError, OSError, FloatingPointError) as exc:
        msg = " ".join(str(exc).split())
        print(f"{parser.prog} {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
