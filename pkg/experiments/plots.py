# experiments/plots.py - SVG plots built only from result CSVs.

import logging

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({"svg.hashsalt": "rsma-globopt", "axes.unicode_minus": False})
import matplotlib.pyplot as plt  # noqa: E402

from experiments.runner import aggregate, region_hulls  # noqa: E402

logger = logging.getLogger(__name__)

AXIS_LABELS = {
    "rate-region": ("R1 [bits/cu]", "R2 [bits/cu]"),
    "sum-rate": ("transmit SNR [dB]", "mean sum rate [bits/cu]"),
    "ee": ("transmit power [dBm]", "mean EE [bits/J/Hz]"),
}
LINESTYLES = {"bb": "-", "sca": "--"}
MARKERS = {"rsma": "o", "mulp": "s", "noma": "^"}


def _save(fig, path) -> None:
    # no date in the metadata keeps the file reproducible
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)


def plot_region(frame, path, title: str = "") -> None:
    """Hull polylines per scheme and solver."""
    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    for (scheme, solver), hull in sorted(region_hulls(frame).items()):
        xs, ys = zip(*hull)
        ax.plot(xs, ys, LINESTYLES.get(solver, "-"), marker=MARKERS.get(scheme), markersize=3, label=f"{scheme} ({solver})")
    xlabel, ylabel = AXIS_LABELS["rate-region"]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def plot_sweep(frame, path, kind: str, title: str = "") -> None:
    """Mean objective against the grid: solid lines for BB, dashed for SCA."""
    summary = aggregate(frame)
    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    for (scheme, solver), group in summary.groupby(["scheme", "solver"], sort=True):
        group = group.sort_values("grid_x")
        ax.plot(
            group["grid_x"],
            group["mean_objective"],
            LINESTYLES.get(solver, "-"),
            marker=MARKERS.get(scheme),
            label=f"{scheme} ({solver})",
        )
    xlabel, ylabel = AXIS_LABELS[kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def plot_csv(frame, path, kind: str, title: str = "") -> None:
    if kind == "rate-region":
        plot_region(frame, path, title)
    else:
        plot_sweep(frame, path, kind, title)
