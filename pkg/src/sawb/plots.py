"""Static SVG scatter plots of residuals and total power against error."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiment import CellResult, PowerErrorTable  # noqa: E402
from .vessel import DOFS  # noqa: E402

# Byte-stable SVG output: fixed id salt, no creation date.
_RC = {"svg.hashsalt": "sawb", "svg.fonttype": "path"}
_META = {"Date": None, "Creator": None}

_UNITS = {"hs": "m", "t1": "s", "mu": "deg"}
_LABEL = {"hs": "H_s", "t1": "T_1", "mu": "mu_h"}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def residual_plot(result: CellResult, path) -> Path:
    t = result.target
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.scatter(result.test_estimate, result.residuals, s=4, alpha=0.5)
        ax.axhline(0.0, color="k", lw=0.8)
        ax.set_xlabel(f"estimated {_LABEL[t]} [{_UNITS[t]}]")
        ax.set_ylabel(f"residual [{_UNITS[t]}]")
        ax.set_title(result.cell)
        fig.tight_layout()
        return _save(fig, path)


def power_error_plot(table: PowerErrorTable, path) -> Path:
    t = table.cell.split(":")[1]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 3, figsize=(11, 3.5), sharey=True)
        for ax, dof in zip(axes, DOFS):
            ax.scatter(table.column(dof), table.abs_error, s=4, alpha=0.5)
            ax.set_xscale("log")
            ax.set_xlabel(f"{dof} m0")
        axes[0].set_ylabel(f"|{_LABEL[t]} error| [{_UNITS[t]}]")
        fig.suptitle(table.cell)
        fig.tight_layout()
        return _save(fig, path)
