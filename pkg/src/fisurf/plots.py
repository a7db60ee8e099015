"""Figure rendering for the report path.

Renders static matplotlib figures next to a report's delimited output:
the log-log mesh-count regression with the verdict band, and a heatmap of
the rendered surface. matplotlib is imported lazily with the Agg backend
so headless runs just work.
"""
from __future__ import annotations

import numpy as np

from .attractor import LatticeValues
from .errors import ValidationError

MAX_HEATMAP_SIDE = 1025


def _plt():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    return plt


def surface_snapshot(lattice: LatticeValues, max_side: int = MAX_HEATMAP_SIDE):
    """Downsampled copy of the lattice for plotting (stride subsampling)."""
    stride = max(1, (lattice.side - 1) // (max_side - 1))
    values = lattice.values[::stride, ::stride].copy()
    return values, lattice.rect


def save_loglog_figure(report_dict: dict, path: str) -> None:
    """Scatter of N(eps) on log-log axes with the fitted slope and band."""
    box = report_dict.get("box_counts")
    fit = report_dict.get("fit")
    if not box or not fit:
        raise ValidationError("report lacks box counts to plot")
    plt = _plt()
    eps = np.array([row["epsilon"] for row in box["scales"]])
    counts = np.array([row["count"] for row in box["scales"]], dtype=float)
    inv = 1.0 / eps

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(inv, counts, "o", color="tab:blue", label="mesh counts")
    slope = fit["slope"]
    anchor = counts[0] / inv[0] ** slope
    ax.loglog(inv, anchor * inv ** slope, "-", color="tab:blue", alpha=0.7,
              label=f"fit slope {slope:.3f} ± {fit['stderr']:.3f}")
    verdict = report_dict.get("verdict") or {}
    band = None
    if verdict.get("case") == "bounds":
        band = (verdict["lower"], verdict["upper"])
    elif verdict.get("case") == "exact_two":
        band = (2.0, 2.0)
    if band is not None:
        for b, style in zip(band, ("--", ":")):
            ax.loglog(inv, counts[0] / inv[0] ** b * inv ** b, style,
                      color="tab:red", alpha=0.8, label=f"slope {b:.3f}")
    ax.set_xlabel(r"$1/\varepsilon$")
    ax.set_ylabel(r"$N(\varepsilon)$")
    title = verdict.get("case", "mesh counts")
    ax.set_title(f"box-count regression ({title})")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_surface_figure(snapshot, path: str) -> None:
    """Heatmap of the rendered surface."""
    values, rect = snapshot
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(values.T, origin="lower",
                   extent=(rect[0], rect[1], rect[2], rect[3]),
                   aspect="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label="f(x, y)")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("interpolation surface")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
