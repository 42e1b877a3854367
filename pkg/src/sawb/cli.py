"""Command-line entry point: ``sawb generate|train|evaluate|analyze|reproduce``.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or file
format error, 3 numeric failure during training.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import STAGES, ConfigError, RunConfig, load_config, validate
from .experiment import (CELLS, CellResult, EvalReport, evaluate_cell, generate_dataset, parse_cell,
                         power_error_analysis, split_and_fold, train_cells, write_power_error)
from .neural import FORMAT_VERSION as MODEL_FORMAT_VERSION
from .neural import ModelFormatError, TrainingError, load_model, save_model
from .storage import DATASET_VERSION, DatasetFormatError, load_dataset, save_dataset, write_dataset_csv

log = logging.getLogger("sawb")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def cell_slug(cell: str) -> str:
    return cell.replace(":", "_").replace("+", "-")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _formats() -> dict:
    return {"dataset": DATASET_VERSION, "model": MODEL_FORMAT_VERSION, "report": 1, "code": __version__}


def _progress(label):
    def report(i, n):
        if i == n or i % max(1, n // 20) == 0:
            log.info("%s %d/%d", label, i, n)
    return report


# -- stages -------------------------------------------------------------------

def stage_generate(cfg: RunConfig, out: Path, csv_export: bool = False) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    ds = generate_dataset(cfg.n, cfg.seed, cfg.parallelism, cfg.vessel_params(), cfg.noise,
                          k_max=max(cfg.k_values), progress=_progress("simulated"))
    path = save_dataset(ds, out / "dataset.bin")
    if csv_export:
        write_dataset_csv(ds, out / "dataset.csv")
    _write_json(out / "manifest.json", {"stage": "generate", "config": cfg.as_dict(),
                                        "dataset": ds.manifest, "formats": _formats()})
    return path


def stage_train(data_path: Path, out: Path, cells, seed: int, epochs: int, parallelism: int) -> Path:
    ds = load_dataset(data_path)
    split = split_and_fold(ds, seed)
    models = train_cells(ds, split, list(cells), seed, parallelism, epochs, _progress("trained"))
    out.mkdir(parents=True, exist_ok=True)
    for cell, fold_models in models.items():
        cdir = out / cell_slug(cell)
        cdir.mkdir(exist_ok=True)
        for j, w in enumerate(fold_models):
            save_model(w, cdir / f"fold{j}.sawb")
        result = evaluate_cell(ds, split, cell, fold_models)
        with open(cdir / "folds.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["cell", "fold", "rmse", "r2"])
            wr.writerows((cell, j, repr(r), repr(q)) for j, (r, q) in enumerate(zip(result.fold_rmse, result.fold_r2)))
    _write_json(out / "manifest.json", {
        "stage": "train", "seed": seed, "epochs": epochs, "cells": list(models),
        "n_records": len(ds), "test_size": int(split.test.size),
        "fold_sizes": [int(f.size) for f in split.folds], "dataset": ds.manifest, "formats": _formats(),
    })
    return out


def _load_cell_models(models_dir: Path, cell: str, n_folds: int):
    models = []
    for j in range(n_folds):
        path = models_dir / cell_slug(cell) / f"fold{j}.sawb"
        try:
            models.append(load_model(path))
        except ModelFormatError as exc:
            raise ModelFormatError(f"{path}: {exc}") from None
    return models


def stage_evaluate(data_path: Path, models_dir: Path, out: Path) -> EvalReport:
    ds = load_dataset(data_path)
    manifest_path = models_dir / "manifest.json"
    meta = json.loads(manifest_path.read_text())
    split = split_and_fold(ds, meta["seed"])
    report = EvalReport({c: evaluate_cell(ds, split, c, _load_cell_models(models_dir, c, len(split.folds)))
                         for c in meta["cells"]})
    report.write(out)
    _write_json(out / "manifest.json", {"stage": "evaluate", "seed": meta["seed"], "cells": meta["cells"],
                                        "formats": _formats()})
    return report


def read_residuals(path: Path) -> EvalReport:
    rows: dict[str, list] = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.setdefault(rec["cell"], []).append((int(rec["index"]), float(rec["truth"]), float(rec["estimate"])))
    cells = {}
    for cell, rs in rows.items():
        parse_cell(cell)
        idx, truth, est = (np.array(v) for v in zip(*rs))
        cells[cell] = CellResult(cell, [], [], [], [], idx.astype(int), truth, est)
    return EvalReport(cells)


def stage_analyze(data_path: Path, report_dir: Path, out: Path) -> dict:
    from .plots import power_error_plot, residual_plot

    ds = load_dataset(data_path)
    report = read_residuals(report_dir / "residuals.csv")
    out.mkdir(parents=True, exist_ok=True)
    tables = power_error_analysis(report, ds)
    write_power_error(tables, out / "power_error.csv")
    corr = {}
    with open(out / "correlations.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["cell", "dof", "spearman_m0_abs_error"])
        for cell, t in tables.items():
            for dof in ("heave", "pitch", "roll"):
                rho = t.spearman(dof)
                corr[(cell, dof)] = rho
                wr.writerow([cell, dof, repr(rho)])
    for cell, result in report.cells.items():
        residual_plot(result, out / f"residuals_{cell_slug(cell)}.svg")
        power_error_plot(tables[cell], out / f"power_{cell_slug(cell)}.svg")
    return corr


# -- argument handling --------------------------------------------------------

def _common(p, *, n=False, out=False):
    p.add_argument("--config", type=Path, help="key=value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--parallelism", type=int, help="worker processes (default $SAWB_PARALLELISM or 1)")
    if n:
        p.add_argument("--n", type=int, help="number of simulated scenarios")
        p.add_argument("--no-noise", action="store_true", help="skip IMU noise injection")
    if out:
        p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sawb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"sawb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="simulate the campaign and write dataset.bin")
    _common(p, n=True, out=True)
    p.add_argument("--csv", action="store_true", help="also write dataset.csv")

    p = sub.add_parser("train", help="cross-validate one or more cells")
    _common(p, out=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--cell", action="append", help="e.g. 3dof:hs or heave+pitch:mu (repeatable; default all 21)")
    p.add_argument("--epochs", type=int)

    p = sub.add_parser("evaluate", help="score trained models on validation folds and the test split")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--models", type=Path, required=True)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("analyze", help="power-error tables, correlations and SVG plots")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--report", type=Path, required=True)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("reproduce", help="run every stage at the configured scale")
    _common(p, n=True, out=True)
    p.add_argument("--cell", action="append")
    p.add_argument("--epochs", type=int)
    p.add_argument("--stages", help=f"comma-separated subset of {','.join(STAGES)}")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    updates = {}
    for key in ("n", "seed", "parallelism", "epochs"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    if getattr(args, "out", None) is not None:
        updates["out"] = str(args.out)
    if getattr(args, "no_noise", False):
        updates["noise"] = False
    if getattr(args, "cell", None):
        updates["cells"] = tuple(args.cell)
    if getattr(args, "stages", None):
        updates["stages"] = tuple(s.strip() for s in args.stages.split(",") if s.strip())
    cfg = replace(cfg, **updates)
    validate(cfg)
    return cfg


def run(args) -> None:
    if args.command == "generate":
        cfg = resolve_config(args)
        path = stage_generate(cfg, Path(cfg.out), args.csv)
        print(f"wrote {path}")
    elif args.command == "train":
        cfg = resolve_config(args)
        out = args.out or args.data.parent / "models"
        stage_train(args.data, out, cfg.cells, cfg.seed, cfg.epochs, cfg.parallelism)
        print(f"wrote models to {out}")
    elif args.command == "evaluate":
        out = args.out or args.models.parent / "report"
        report = stage_evaluate(args.data, args.models, out)
        for cell, r in report.cells.items():
            print(f"{cell:16s} val rmse {r.rmse_mean:.4g} +- {r.rmse_std:.3g}  r2 {r.r2_mean:.3f}  "
                  f"test rmse {r.test_rmse_mean:.4g}")
    elif args.command == "analyze":
        out = args.out or args.report.parent / "analysis"
        corr = stage_analyze(args.data, args.report, out)
        for (cell, dof), rho in corr.items():
            print(f"{cell:16s} {dof:6s} spearman(m0, |err|) = {rho:+.3f}")
    elif args.command == "reproduce":
        cfg = resolve_config(args)
        root = Path(cfg.out)
        root.mkdir(parents=True, exist_ok=True)
        _write_json(root / "manifest.json", {"stage": "reproduce", "config": cfg.as_dict(), "formats": _formats()})
        data = root / "data" / "dataset.bin"
        if "generate" in cfg.stages:
            stage_generate(cfg, root / "data")
        if "train" in cfg.stages:
            stage_train(data, root / "models", cfg.cells, cfg.seed, cfg.epochs, cfg.parallelism)
        if "evaluate" in cfg.stages:
            stage_evaluate(data, root / "models", root / "report")
        if "analyze" in cfg.stages:
            stage_analyze(data, root / "report", root / "analysis")
        print(f"reproduced into {root}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s")
        run(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except (ModelFormatError, DatasetFormatError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TrainingError, FloatingPointError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
