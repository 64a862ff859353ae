"""Command-line front end.

    pdccal run --config PATH --seed N --out DIR
    pdccal estimate --counts PATH [--corrections on|off]
    pdccal reproduce-table [--column NAME] [--tolerance X] [--corrections on|off]

``run`` writes into ``--out`` or, if omitted, ``$PDCCAL_OUT_DIR`` (default
``./pdccal-out``).
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import reference
from .calib import Corrections, Quantity, SystemKind, estimate_efficiency
from .config import ConfigError, bundled_path, load_config
from .errors import CalibrationError
from .fileio import CountsRow, FormatError, read_counts, write_counts, write_histogram, write_timestamps
from .pipeline import report_csv, report_text, run_config

OUT_DIR_ENV = "PDCCAL_OUT_DIR"


def _on_off(s):
    if s not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return s == "on"


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or os.environ.get(OUT_DIR_ENV, "pdccal-out"))
    (out / "histograms").mkdir(parents=True, exist_ok=True)
    report, channels = run_config(cfg, args.seed)

    (out / "report.csv").write_text(report_csv(report), encoding="utf-8")
    text = report_text(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    rows = [CountsRow(SystemKind(r.system), r.counts, r.corrections, r.estimate.t_signal)
            for r in report.results if r.estimate is not None]
    if rows:
        write_counts(out / "counts.csv", rows)
    for r in report.results:
        for k, h in enumerate(r.histograms):
            suffix = f"_{k}" if len(r.histograms) > 1 else ""
            write_histogram(out / "histograms" / f"{r.system}{suffix}.hist", h)
    if args.dump_timestamps:
        write_timestamps(out / "timestamps.txt", channels, cfg.digest)
    print(text, end="")
    return 0 if report.all_passed else 1


def _resolve_counts(path):
    p = Path(path)
    if not p.exists() and bundled_path(f"{path}.counts").exists():
        return bundled_path(f"{path}.counts")
    if not p.exists() and bundled_path(path).exists():
        return bundled_path(path)
    return p


def cmd_estimate(args) -> int:
    try:
        rows = read_counts(_resolve_counts(args.counts))
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    status = 0
    for row in rows:
        if args.system and row.system.value != args.system:
            continue
        corr = row.corrections if (args.corrections and row.corrections) else Corrections()
        t = row.t_signal or Quantity(1.0, 0.0)
        try:
            est = estimate_efficiency(row.counts, corr, t)
        except CalibrationError as exc:
            print(f"{row.system.value}: error {type(exc).__name__}: {exc}")
            status = 1
            continue
        budget = ", ".join(f"{name}={v:.4f}" for name, v in est.error_budget)
        print(f"{row.system.value}: eta*T={est.eta_times_t.value:.6f} ± {est.eta_times_t.sigma:.6f}  "
              f"T={t.value:.4f} ± {t.sigma:.4f}  eta={est.eta.value:.6f} ± {est.eta.sigma:.6f}  "
              f"[rel: {budget}]")
    return status


def cmd_reproduce(args) -> int:
    tol_et = reference.TOL_ETA_TIMES_T if args.tolerance is None else args.tolerance
    tol_eta = reference.TOL_ETA if args.tolerance is None else args.tolerance * reference.TOL_ETA / reference.TOL_ETA_TIMES_T
    columns = [SystemKind(args.column)] if args.column else list(reference.COLUMNS)
    ok = True
    print(f"{'system':<20}{'eta*T':>9}{'table':>8}{'delta':>9}{'eta':>9}{'table':>8}{'delta':>9}  result")
    for kind in columns:
        col = reference.COLUMNS[kind]
        est = reference.recompute(kind, corrections=args.corrections)
        d_et = est.eta_times_t.value - col.eta_times_t.value
        d_eta = est.eta.value - col.eta.value
        passed = abs(d_et) <= tol_et and abs(d_eta) <= tol_eta
        ok &= passed
        print(f"{kind.value:<20}{est.eta_times_t.value:9.4f}{col.eta_times_t.value:8.3f}{d_et:+9.4f}"
              f"{est.eta.value:9.4f}{col.eta.value:8.3f}{d_eta:+9.4f}  {'PASS' if passed else 'FAIL'}")
    print(f"tolerances: |d(eta*T)| <= {tol_et:g}, |d(eta)| <= {tol_eta:g}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdccal", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate, acquire and estimate for every configured system")
    r.add_argument("--config", required=True, help="config file or bundled name (paper-desk-scale)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default=None, help=f"output directory (default ${OUT_DIR_ENV} or ./pdccal-out)")
    r.add_argument("--dump-timestamps", action="store_true")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("estimate", help="estimate efficiency from a counts CSV")
    e.add_argument("--counts", required=True, help="counts file or bundled name (paper-table)")
    e.add_argument("--corrections", type=_on_off, default=True, metavar="on|off")
    e.add_argument("--system", default=None)
    e.set_defaults(func=cmd_estimate)

    t = sub.add_parser("reproduce-table", help="re-derive the reference table estimates")
    t.add_argument("--column", choices=[k.value for k in SystemKind])
    t.add_argument("--tolerance", type=float, default=None, help="eta*T tolerance; eta scales with it")
    t.add_argument("--corrections", type=_on_off, default=True, metavar="on|off")
    t.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
