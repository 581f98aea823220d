"""Figure rendering for experiment reports. All figures go through one save
helper with pinned metadata so identical runs produce identical PNG bytes."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_figure",
    "trajectory_figure",
    "metrics_figure",
    "single_agent_figure",
    "estimate_figure",
    "suite_figure",
]

_METADATA = {"Software": "polarium"}


def save_figure(fig, path) -> None:
    fig.savefig(path, dpi=120, metadata=_METADATA)
    plt.close(fig)


def trajectory_figure(times, states, path, islands=None, predicted=None) -> None:
    """Per-node opinion trajectories; island membership colors the lines and
    predicted limits show as dashed levels."""
    arr = np.asarray(states)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    colors = ("tab:red", "tab:blue")
    for node in range(arr.shape[1]):
        color = colors[int(islands[node])] if islands is not None else "tab:gray"
        ax.plot(times, arr[:, node], color=color, lw=0.7, alpha=0.5)
    if predicted is not None:
        for level in predicted:
            ax.axhline(level, color="black", ls="--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("opinion")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    save_figure(fig, path)


def metrics_figure(times, ndi_values, gdi_values, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(times, ndi_values, label="ndi", lw=1.2)
    ax.plot(times, gdi_values, label="gdi", lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("disagreement")
    ax.legend()
    fig.tight_layout()
    save_figure(fig, path)


def single_agent_figure(runs, threshold, path) -> None:
    """runs: list of (x0, xs) pairs; dashed line marks the stationary
    opinion when defined."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for x0, xs in runs:
        ax.plot(range(len(xs)), xs, lw=0.9, alpha=0.8, label=f"x0={x0:g}")
    if threshold is not None:
        ax.axhline(threshold, color="black", ls="--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("opinion")
    ax.set_ylim(-0.02, 1.02)
    if len(runs) <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    save_figure(fig, path)


def estimate_figure(p_hat, halfwidth, p_red, x_i, path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4.0))
    ax.errorbar([0], [p_hat], yerr=[halfwidth], fmt="o", capsize=4,
                label="P(RED | accepted)")
    ax.scatter([1], [p_red], marker="s", color="tab:orange",
               label="P(RED recommended)")
    ax.axhline(x_i, color="black", ls="--", lw=0.8, label="probe opinion")
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["conditional", "unconditional"])
    ax.set_xlim(-0.6, 1.6)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    save_figure(fig, path)


def suite_figure(names, violations, trials, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pos = np.arange(len(names))
    ax.bar(pos, violations, color="tab:red")
    ax.set_xticks(pos)
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("violations")
    top = max(1, max(violations) if violations else 1)
    ax.set_ylim(0, top * 1.2)
    for p, v, t in zip(pos, violations, trials):
        ax.text(p, v + 0.02 * top, f"{v}/{t}", ha="center", fontsize=7)
    fig.tight_layout()
    save_figure(fig, path)
