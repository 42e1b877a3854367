"""Desk-scale component study: simulate, cross-validate selected cells, print a table.

Usage: python3 scripts/desk_scale.py [--n 6000] [--seed 2024] [--cells all] [--out DIR]

``--cells all`` trains all 21 (DOF selection, target) cells; the default
trains the 3-DOF networks and the single-DOF cells compared in the
acceptance suite. Worker count follows ``SAWB_PARALLELISM``.
"""

import argparse
import time
from pathlib import Path

from sawb.experiment import CELLS, component_study, default_parallelism, generate_dataset, power_error_analysis
from sawb.storage import save_dataset

DEFAULT_CELLS = ["3dof:hs", "3dof:t1", "3dof:mu", "heave:hs", "pitch:hs", "roll:hs", "heave:mu", "pitch:mu"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=6000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--cells", default=",".join(DEFAULT_CELLS))
    ap.add_argument("--epochs", type=int)
    ap.add_argument("--out", type=Path, default=Path("runs/desk"))
    args = ap.parse_args()
    cells = CELLS if args.cells == "all" else args.cells.split(",")
    par = default_parallelism()

    t0 = time.perf_counter()
    ds = generate_dataset(args.n, args.seed, parallelism=par)
    args.out.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out / "dataset.bin")
    t1 = time.perf_counter()
    report = component_study(ds, args.seed, cells=cells, parallelism=par, epochs=args.epochs)
    report.write(args.out)
    t2 = time.perf_counter()

    units = {"hs": ("mm", 1000.0), "t1": ("s", 1.0), "mu": ("deg", 1.0)}
    print(f"{'cell':16s} {'val RMSE':>18s} {'R2':>6s} {'test RMSE':>10s}")
    for cell, r in report.cells.items():
        unit, scale = units[r.target]
        print(f"{cell:16s} {r.rmse_mean * scale:9.3f} +- {r.rmse_std * scale:5.3f} {r.r2_mean:6.3f} "
              f"{r.test_rmse_mean * scale:10.3f} {unit}")
    tables = power_error_analysis(report, ds)
    for cell, t in tables.items():
        print(f"{cell:16s} spearman(m0, |err|): " + ", ".join(f"{d} {t.spearman(d):+.3f}" for d in ("heave", "pitch", "roll")))
    print(f"simulation {t1 - t0:.0f} s, training {t2 - t1:.0f} s, parallelism {par}")


if __name__ == "__main__":
    main()
