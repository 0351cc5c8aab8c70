"""Command-line interface.

Subcommands: simulate, estimate, marginal-fit, experiment, ratefn.
Exit codes: 0 ok, 2 config, 3 data, 4 numeric-degenerate, 5 internal.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import warnings
from dataclasses import asdict

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, LdpTailError
from .estimators import (
    EstimatorConfig,
    ScalingPath,
    ShiftPath,
    estimate_classical,
    estimate_classical_rtd,
    estimate_ldp_I,
    estimate_ldp_II,
)
from .events import load_event
from .experiments import StudyConfig, run_study
from .marginal import fit_marginals
from .ratefn import psi, rate_grid
from .simulate import SimConfig, sample_mvn
from .transform import QHatMap, Sample, TieWarning, rank_transform

log = logging.getLogger("ldptail")

METHODS = ("ldp-I", "ldp-II", "classical", "classical-rtd")


def ingest_csv(path):
    """Read a headed numeric CSV. Rows with a missing or non-numeric cell are
    dropped; returns ``(sample, rejected)`` with ``rejected`` a list of
    ``(line_number, reason)``."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or not any(header):
            raise DataError(f"{path}: missing header")
        rows, rejected = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                rejected.append((lineno, f"expected {len(header)} fields, got {len(rec)}"))
                continue
            try:
                vals = [float(v) for v in rec]
            except ValueError:
                rejected.append((lineno, "non-numeric cell"))
                continue
            if not all(math.isfinite(v) for v in vals):
                rejected.append((lineno, "missing or non-finite value"))
                continue
            rows.append(vals)
    for lineno, reason in rejected:
        log.warning("%s:%d: row dropped (%s)", path, lineno, reason)
    if not rows:
        raise DataError(f"{path}: no usable rows")
    return Sample(np.array(rows), tuple(header)), rejected


def write_csv(path_or_fh, header, rows):
    own = isinstance(path_or_fh, str)
    fh = open(path_or_fh, "w", newline="", encoding="utf-8") if own else path_or_fh
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{float(v):.17g}" for v in r])
    finally:
        if own:
            fh.close()


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _parse_k2(s):
    if s == "auto":
        return None
    try:
        return int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("--k2 must be an integer or 'auto'") from None


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args):
    if args.rho is None:
        raise ConfigError("--rho is required")
    cfg = SimConfig.bivariate(args.n, args.rho, args.scale, args.seed)
    sample = sample_mvn(cfg, args.realisation)
    if args.out in (None, "-"):
        write_csv(sys.stdout, sample.column_names, sample.values)
    else:
        write_csv(args.out, sample.column_names, sample.values)
    return 0


def _fit(sample, args):
    margs, fits = fit_marginals(sample.values, sample.column_names, args.k2, args.iota)
    return margs, fits


def cmd_marginal_fit(args):
    sample, rejected = ingest_csv(args.data)
    margs, fits = _fit(sample, args)
    out = {
        "n": sample.n,
        "rows_rejected": len(rejected),
        "k2_auto": args.k2 is None,
        "margins": {mg.name: f.to_dict() for mg, f in zip(margs, fits)},
    }
    if args.format == "json":
        _emit(_dumps(out), args.out)
    else:
        lines = [f"{'column':>12} {'theta_hat':>10} {'g_hat':>10} {'anchor':>12} {'y_n':>8}"]
        for mg, f in zip(margs, fits):
            lines.append(f"{mg.name:>12} {f.theta_hat:>10.4f} {f.g_hat:>10.4f} {f.anchor:>12.5g} {f.y_n:>8.4f}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_estimate(args):
    sample, rejected = ingest_csv(args.data)
    event = load_event(args.event)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TieWarning)
        pseudo = rank_transform(sample)
    margs, fits = _fit(sample, args)
    q_map = QHatMap(fits, margs)
    k_n = args.k_n if args.k_n is not None else int(math.ceil(sample.n**0.3))
    cfg = EstimatorConfig(k_n=k_n, xi=args.xi, vartheta=args.vartheta, target_count=args.target_count)
    methods = METHODS if args.method == "all" else (args.method,)
    reports = []
    path = None
    shift = None
    for m in methods:
        if m in ("ldp-I", "ldp-II") and path is None:
            path = ScalingPath(pseudo, q_map, event)
        if m in ("classical", "classical-rtd") and shift is None:
            shift = ShiftPath(pseudo, q_map, event)
        if m == "ldp-I":
            reports.append(estimate_ldp_I(pseudo, q_map, event, cfg, path=path))
        elif m == "ldp-II":
            reports.append(estimate_ldp_II(pseudo, q_map, event, cfg, path=path))
        elif m == "classical":
            reports.append(estimate_classical(pseudo, event, cfg, path=shift))
        else:
            reports.append(estimate_classical_rtd(pseudo, event, cfg, k_eta=args.k_eta, path=shift))
    out = {
        "n": sample.n,
        "rows_rejected": len(rejected),
        "tie_columns": [sample.column_names[j] for j in pseudo.tie_columns],
        "warnings": [str(w.message) for w in caught],
        "k_n": k_n,
        "margins": {mg.name: f.to_dict() for mg, f in zip(margs, fits)},
        "reports": [r.to_dict() for r in reports],
    }
    if args.format == "json":
        _emit(_dumps(out), args.out)
    else:
        lines = [f"{'method':>14} {'estimate':>12} {'ell_used':>10} {'count':>6} {'lambda':>9} {'eta_hat':>8}"]
        for r in reports:
            lines.append(
                f"{r.method:>14} {r.estimate:>12.4g} {_opt(r.ell_used):>10} {_opt(r.count_at_ell):>6} "
                f"{_opt(r.lambda_shift):>9} {_opt(r.eta_hat):>8}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _opt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def cmd_experiment(args):
    cfg = StudyConfig.from_json(args.config)
    if args.fast:
        cfg = cfg.fast()
    if args.realisations is not None:
        cfg = StudyConfig.from_dict({**asdict(cfg), "realisations": args.realisations})
    report = run_study(cfg)
    if args.out:
        with open(args.out + ".csv", "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    if args.format == "csv":
        sys.stdout.write(report.to_csv())
    elif args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_text())
    return 0


def cmd_ratefn(args):
    if args.what == "psi":
        t = np.linspace(0.0, 1.0, args.grid)
        rows = np.column_stack([t, psi(args.rho, t)])
        header = ("t", "psi")
    else:
        rows = rate_grid(args.rho, args.grid, args.upper)
        header = ("x1", "x2", "I", "kappa")
    if args.out in (None, "-"):
        write_csv(sys.stdout, header, rows)
    else:
        write_csv(args.out, header, rows)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ldptail", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="bivariate normal-dependence sample to CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--rho", type=float)
    s.add_argument("--scale", choices=("normal", "exponential", "pareto"), default="exponential")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--realisation", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    def marginal_opts(sp):
        sp.add_argument("--data", required=True)
        sp.add_argument("--k2", type=_parse_k2, default=None, help="integer or 'auto' (ceil((log n)^2))")
        sp.add_argument("--iota", type=float, default=2.0)
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--out")

    s = sub.add_parser("marginal-fit", help="log-GW tail fit per column")
    marginal_opts(s)
    s.set_defaults(func=cmd_marginal_fit)

    s = sub.add_parser("estimate", help="probability of an event from data")
    marginal_opts(s)
    s.add_argument("--event", required=True, help="event JSON file")
    s.add_argument("--k-n", dest="k_n", type=int, help="default ceil(n^0.3)")
    s.add_argument("--xi", type=float, default=1.0)
    s.add_argument("--vartheta", type=float)
    s.add_argument("--target-count", dest="target_count", type=int)
    s.add_argument("--k-eta", dest="k_eta", type=int)
    s.add_argument("--method", choices=METHODS + ("all",), default="all")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("experiment", help="run a simulation study from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--fast", action="store_true", help="cap realisations at 100")
    s.add_argument("--realisations", type=int)
    s.add_argument("--out", help="write <out>.csv and <out>.json")
    s.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("ratefn", help="normal-model rate function grids as CSV")
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--upper", type=float, default=3.0)
    s.add_argument("--what", choices=("grid", "psi"), default="grid")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ratefn)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except LdpTailError as exc:
        sys.stderr.write(_dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}))
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        sys.stderr.write(_dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 5}))
        return 5


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
