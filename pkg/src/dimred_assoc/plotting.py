"""Figures rendered next to the CSV tables when the CLI runs with ``--plot``."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .simulation import McResult, MotivatingRow, TraceRow  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "savefig.bbox": "tight",
}
COLORS = {"Full": "0.2", "FusionOpt": "tab:red", "AssocOpt": "tab:blue",
          "adaptive": "tab:blue", "fixed_low": "tab:green", "fixed_high": "tab:orange"}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_motivating(rows: Sequence[MotivatingRow], path) -> Path:
    alpha = np.array([r.alpha_deg for r in rows])
    j0 = np.array([r.j0 for r in rows])
    je = np.array([r.je for r in rows])
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(5.0, 4.6))
        bad = j0 > je
        for ax in (top, bottom):
            ax.fill_between(alpha, 0, 1, where=bad, color="tab:orange", alpha=0.2,
                            transform=ax.get_xaxis_transform(), label="J0 > Je")
        top.plot(alpha, [r.trace_p for r in rows], color="0.3")
        top.set_ylabel("fusion loss tr(P)")
        bottom.plot(alpha, j0, color="0.3", label="J0 (correct)")
        bottom.plot(alpha, je, color="0.3", ls="--", label="Je (swapped)")
        bottom.set_ylabel("assignment cost")
        bottom.set_xlabel("alpha [deg]")
        bottom.legend(loc="upper right")
        return _save(fig, path)


def plot_trace(rows: Sequence[TraceRow], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for variant in dict.fromkeys(r.variant for r in rows):
            sel = [r for r in rows if r.variant == variant and r.k > 0]
            ax.plot([r.k for r in sel], [r.f_min for r in sel], marker="s", ms=3,
                    color=COLORS.get(variant), label=variant)
        ax.set_xlabel("iteration k")
        ax.set_ylabel("f_min")
        ax.legend()
        return _save(fig, path)


def plot_sweep(result: McResult, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for method in dict.fromkeys(r.method for r in result.rows):
            c, mean, std = result.curve(method)
            color = COLORS.get(method.value)
            ax.plot(c, mean, color=color, label=method.value)
            ax.fill_between(c, np.clip(mean - std, 0, 1), np.clip(mean + std, 0, 1),
                            color=color, alpha=0.15, lw=0)
        ax.set_xlabel("scaling factor c")
        ax.set_ylabel("P_IC")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="upper left")
        return _save(fig, path)


def plot_cost_matrices(matrices: Sequence[np.ndarray], path) -> Path:
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(matrices), figsize=(2.6 * len(matrices), 2.4))
        for k, (ax, mat) in enumerate(zip(np.atleast_1d(axes), matrices), start=1):
            ax.imshow(mat, cmap="Greys")
            ax.grid(False)
            for (i, j), v in np.ndenumerate(mat):
                ax.text(j, i, f"{v:.2f}", ha="center", va="center", color="tab:red")
            ticks = np.arange(mat.shape[0])
            ax.set_xticks(ticks, ticks + 1)
            ax.set_yticks(ticks, ticks + 1)
            ax.set_title(f"realization {k}")
        return _save(fig, path)
