"""Command-line front end.

Subcommands::

    ensemble-calib run-study --config study.cfg --out results/
    ensemble-calib calibrate --samples samples.csv --calib calib.csv --alpha 0.1
    ensemble-calib prior-quality --config study.cfg --kind avg
    ensemble-calib plot --summary results/summary.csv --out results/

Exit codes: 0 success, 1 other errors, 3 config error, 4 I/O error,
5 shape error, 6 parse error, 130 interrupted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import astuple, fields
from pathlib import Path

import numpy as np

from . import __version__
from .blr import PriorSpec, SamplePredictive
from .calibration import calibrate_q, default_grid
from .config import config_hash, parse_config, parse_int_list
from .errors import ConfigError, EnsembleCalibError, ParseError, ShapeError
from .quality import GeneratorSpec, conditional_coverages, summarize
from .simulation import CellRow, StudyConfig, SummaryRow, iter_cells, summarize as summarize_rows
from .svgplot import line_chart

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_SHAPE = 5
EXIT_PARSE = 6
EXIT_INTERRUPT = 130

ROW_COLUMNS = tuple(f.name for f in fields(CellRow))
SUMMARY_COLUMNS = tuple(f.name for f in fields(SummaryRow))
KIND_NAMES = {"avg": "average", "worst": "worst", "prob": "probabilistic"}


def tool_version() -> str:
    return __version__


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, columns, records) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(v) for v in rec])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _load_config(args) -> StudyConfig:
    overrides = {}
    if getattr(args, "alpha", None) is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if getattr(args, "seed_list", None):
        overrides["seeds"] = parse_int_list(args.seed_list, "seeds")
    if getattr(args, "epsilon", None) is not None:
        overrides["epsilon"] = args.epsilon
    if args.config is None:
        return StudyConfig(**overrides)
    return parse_config(args.config, **overrides)


def cmd_run_study(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[CellRow] = []
    errors = []
    interrupted = False
    try:
        for (i, s), pair, err in iter_cells(cfg):
            if pair is None:
                errors.append((i, s, err))
                print(f"cell prior_mean={i} seed={s} failed: {err}", file=sys.stderr)
            else:
                rows.extend(pair)
    except KeyboardInterrupt:
        interrupted = True

    summary = summarize_rows(rows, cfg.prior_means)
    rows_path, summary_path, manifest_path = out / "rows.csv", out / "summary.csv", out / "manifest.json"
    write_csv(rows_path, ROW_COLUMNS, (astuple(r) for r in rows))
    write_csv(summary_path, SUMMARY_COLUMNS, (astuple(r) for r in summary))
    stamp = float(os.environ.get("SOURCE_DATE_EPOCH", time.time()))
    manifest = {
        "config_hash": config_hash(cfg),
        "tool_version": tool_version(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(stamp)),
        "seeds": list(cfg.seeds),
        "outputs": [str(rows_path), str(summary_path)],
        "complete": not interrupted,
        "failed_cells": [list(e) for e in errors],
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} rows to {rows_path}")
    print(f"wrote {len(summary)} summary rows to {summary_path}")
    return EXIT_INTERRUPT if interrupted else EXIT_OK


def read_matrix(path) -> np.ndarray:
    """Numeric CSV without header, one row per calibration point."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                rows.append([float(c) for c in rec])
            except ValueError:
                raise ParseError(f"non-numeric entry in {path}", lineno) from None
    if not rows:
        raise ParseError(f"{path} is empty")
    if len({len(r) for r in rows}) != 1:
        raise ShapeError(f"rows of {path} have different lengths")
    return np.asarray(rows)


def read_labels(path) -> np.ndarray:
    """Calibration labels: the ``y`` column of a CSV with header, or a single unnamed column."""
    with open(path, newline="", encoding="utf-8") as fh:
        records = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not records:
        raise ParseError(f"{path} is empty")
    header = [c.strip() for c in records[0]]
    if "y" in header:
        col, body, first = header.index("y"), records[1:], 2
    else:
        col, body, first = 0, records, 1
    out = []
    for lineno, rec in enumerate(body, start=first):
        try:
            out.append(float(rec[col]))
        except (ValueError, IndexError):
            raise ParseError(f"bad label in {path}", lineno) from None
    return np.asarray(out)


def cmd_calibrate(args) -> int:
    samples = read_matrix(args.samples)
    labels = read_labels(args.calib)
    if samples.shape[0] != labels.size:
        raise ShapeError(f"{samples.shape[0]} sample rows but {labels.size} calibration labels")
    pred = SamplePredictive(samples)
    res = calibrate_q(labels, pred, args.alpha, default_grid(pred), args.epsilon)
    fields_out = [
        ("q_hat", res.q_hat),
        ("empirical_risk", res.empirical_risk),
        ("alpha", res.alpha),
        ("pac_slack", res.pac.slack),
        ("epsilon", res.pac.epsilon),
        ("calib_size", res.pac.calib_size),
        ("grid_size", res.pac.grid_size),
        ("saturated", res.saturated),
    ]
    for k, v in fields_out:
        print(f"{k}: {_cell(v)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "calibration.csv", [k for k, _ in fields_out], [[v for _, v in fields_out]])
    return EXIT_OK


def cmd_prior_quality(args) -> int:
    cfg = _load_config(args)
    kind = KIND_NAMES[args.kind]
    mode = args.mode or "analytic"
    gen = GeneratorSpec(cfg.d, cfg.n_train, cfg.sigma2, missing_beta=cfg.missing_beta)
    columns = ("prior_mean", "kind", "value", "std_error", "mc_reps", "inner_reps", "n_saturated")
    records = []
    print(",".join(columns))
    for i in cfg.prior_means:
        prior = PriorSpec.isotropic(cfg.d, i, cfg.prior_scale)
        cov = conditional_coverages(prior, gen, cfg.alpha, cfg.mc_reps, cfg.inner_reps,
                                    cfg.seeds[0], mode, cfg.n_samples)
        est = summarize(cov, kind, cfg.alpha, cfg.inner_reps, args.threshold)
        rec = (i, est.kind, est.value, est.std_error, est.mc_reps, est.inner_reps, est.n_saturated)
        records.append(rec)
        print(",".join(_cell(v) for v in rec))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / f"prior_quality_{args.kind}.csv", columns, records)
    return EXIT_OK


def read_summary(path) -> list[SummaryRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = list(csv.reader(fh))
    if not lines:
        raise ParseError(f"{path} is empty", 1)
    if tuple(c.strip() for c in lines[0]) != SUMMARY_COLUMNS:
        raise ParseError(f"expected header {','.join(SUMMARY_COLUMNS)}", 1)
    rows = []
    for lineno, rec in enumerate(lines[1:], start=2):
        if not rec:
            continue
        try:
            i, method, cov, width, n, n_sat = rec
            rows.append(SummaryRow(int(i), method, float(cov), float(width), int(n), int(n_sat)))
        except ValueError:
            raise ParseError("malformed summary row", lineno) from None
    if not rows:
        raise ParseError(f"{path} has no data rows", 2)
    return rows


def cmd_plot(args) -> int:
    rows = read_summary(args.summary)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    methods = [m for m in ("naive", "calibrated") if any(r.method == m for r in rows)]
    methods += sorted({r.method for r in rows} - set(methods))

    def series(column):
        res = {}
        for m in methods:
            sel = sorted((r for r in rows if r.method == m), key=lambda r: r.prior_mean)
            res[m] = ([r.prior_mean for r in sel], [getattr(r, column) for r in sel])
        return res

    alpha = args.alpha if args.alpha is not None else 0.1
    cov_svg = line_chart(series("mean_coverage"), "Test coverage", "prior mean i", "coverage",
                         hline=1.0 - alpha, ylim=(0.0, 1.05))
    width_svg = line_chart(series("mean_width"), "Mean interval width", "prior mean i", "width")
    (out / "coverage.svg").write_text(cov_svg, encoding="utf-8")
    (out / "width.svg").write_text(width_svg, encoding="utf-8")
    print(f"wrote {out / 'coverage.svg'} and {out / 'width.svg'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ensemble-calib", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-study", help="run a simulation study and write CSVs")
    p.add_argument("--config", help="key = value config file (defaults if omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=("analytic", "sampling"))
    p.add_argument("--seed-list", help="comma separated seeds or a range a..b")
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_run_study)

    p = sub.add_parser("calibrate", help="calibrate a quantile level from predictive samples")
    p.add_argument("--samples", required=True, help="CSV, one row of predictive samples per point")
    p.add_argument("--calib", required=True, help="CSV with a 'y' column (or a single column)")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--out", help="also write calibration.csv here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("prior-quality", help="Monte Carlo quality of the priors in a config")
    p.add_argument("--config", help="key = value config file (defaults if omitted)")
    p.add_argument("--kind", choices=tuple(KIND_NAMES), default="avg")
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=("analytic", "sampling"))
    p.add_argument("--seed-list")
    p.add_argument("--threshold", type=float, help="coverage level for --kind prob (default 1 - alpha)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prior_quality)

    p = sub.add_parser("plot", help="coverage and width charts from summary.csv")
    p.add_argument("--summary", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, help="reference line at 1 - alpha (default 0.1)")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShapeError as exc:
        print(f"shape error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EnsembleCalibError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
