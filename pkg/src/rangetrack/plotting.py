"""Figures for run logs and Monte Carlo batches, written to files.

Uses the non-interactive Agg backend; nothing is shown on screen.
"""

import os

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}
EST_COLOR = "tab:red"
TRACK_COLOR = "tab:blue"


def figsize(scale=1.0, ratio=None):
    width = 6.5 * scale
    if ratio is None:
        ratio = (np.sqrt(5.0) - 1.0) / 2.0
    return width, width * ratio


def _save(fig, path):
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_errors(log, path, zoom=(200, 250)):
    """Estimation (red) and tracking (blue) error norms against step index,
    with a zoomed inset when the horizon covers ``zoom``."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 1, sharex=True, figsize=figsize(1.0, 0.75))
        for ax, err, color, label in (
                (axes[0], log.pos_error, EST_COLOR, r"$\|q - \hat q\|$ [m]"),
                (axes[1], log.track_error, TRACK_COLOR, r"$\|e\|$ [m]")):
            ax.plot(log.k, err, color=color, lw=0.8)
            ax.set_ylabel(label)
            if zoom and len(log.k) > zoom[1]:
                lo, hi = zoom
                inset = ax.inset_axes([0.55, 0.5, 0.42, 0.42])
                inset.plot(log.k[lo:hi + 1], err[lo:hi + 1], color=color, lw=0.8)
                inset.tick_params(labelsize=6)
        axes[-1].set_xlabel("step $k$")
        return _save(fig, path)


def plot_trajectory(log, path):
    """Vehicle and target positions in the world frame."""
    if log.p is None:
        raise ValueError("log has no absolute positions (reloaded from disk?)")
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=figsize(0.8, 0.9))
        ax = fig.add_subplot(projection="3d")
        ax.plot(*log.p_target.T, color="tab:red", lw=0.8, label="target")
        ax.plot(*log.p.T, color="tab:blue", lw=0.6, alpha=0.7, label="vehicle")
        ax.scatter(*log.p_target[0], color="tab:red", marker="^")
        ax.scatter(*log.p[0], color="tab:blue", marker="*")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_zlabel("z [m]")
        ax.legend(loc="upper left")
        return _save(fig, path)


def plot_monte_carlo(result, path):
    """Median and 5-95 % band of the error norms across runs."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 1, sharex=True, figsize=figsize(1.0, 0.75))
        for ax, curves, color, label in (
                (axes[0], result.pos_error, EST_COLOR, "estimation error [m]"),
                (axes[1], result.track_error, TRACK_COLOR, "tracking error [m]")):
            k = np.arange(curves.shape[1])
            lo, med, hi = np.quantile(curves, [0.05, 0.5, 0.95], axis=0)
            ax.fill_between(k, lo, hi, color=color, alpha=0.25, lw=0)
            ax.plot(k, med, color=color, lw=0.9)
            ax.set_ylabel(label)
        axes[-1].set_xlabel("step $k$")
        axes[0].set_title(f"{len(result.seeds)} runs: median and 5-95 % band")
        return _save(fig, path)


def render_run(log, outdir, stem="run"):
    os.makedirs(outdir, exist_ok=True)
    return [plot_errors(log, os.path.join(outdir, f"{stem}_errors.png")),
            plot_trajectory(log, os.path.join(outdir, f"{stem}_trajectory.png"))]
