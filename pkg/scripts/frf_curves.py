"""Tabulate and plot heave, pitch and roll FRF magnitudes of the default hull.

Usage: python3 scripts/frf_curves.py [--speed U] [--out DIR]
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from sawb.vessel import DOFS, VesselParams, frf  # noqa: E402

HEADINGS = (0.0, 45.0, 90.0, 135.0, 180.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--speed", type=float, default=0.0)
    ap.add_argument("--out", type=Path, default=Path("runs/frf"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    vessel = VesselParams()
    omega = np.linspace(0.05, 2.0, 400)
    curves = {(d, mu): frf(vessel, d, omega, args.speed, mu).magnitude for d in DOFS for mu in HEADINGS}

    with open(args.out / "frf.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega"] + [f"{d}_mu{mu:g}" for d, mu in curves])
        for i, om in enumerate(omega):
            w.writerow([f"{om:.6g}"] + [f"{c[i]:.6g}" for c in curves.values()])

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, dof in zip(axes, DOFS):
        for mu in HEADINGS:
            ax.plot(omega, curves[dof, mu], label=f"{mu:g} deg")
        ax.set_title(dof)
        ax.set_xlabel("wave frequency [rad/s]")
    axes[0].set_ylabel("|H| [m/m, rad/m]")
    axes[-1].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out / "frf.svg", metadata={"Date": None})
    print(f"natural roll period {vessel.natural_roll_period:.3f} s; wrote {args.out}/frf.csv and frf.svg")


if __name__ == "__main__":
    main()
