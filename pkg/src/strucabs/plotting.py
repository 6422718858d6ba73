"""Figure rendering for CLI reports. Uses the non-interactive Agg backend."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# drop the Software/date tags so reruns produce identical files
_PNG_META = {"Software": None}


def _figure(width=6.0, height=None):
    golden = (math.sqrt(5) - 1.0) / 2.0
    return plt.subplots(figsize=(width, height or width * golden), dpi=100)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def plot_entropy_curve(curve, k_star, path):
    fig, ax = _figure()
    ks = [k for k, _ in curve]
    hs = [h for _, h in curve]
    ax.plot(ks, hs, marker="o", lw=1.2, color="0.2")
    ax.axvline(k_star, ls="--", color="tab:red", lw=1, label=f"k* = {k_star}")
    ax.set_xlabel("k")
    ax.set_ylabel("one-dimensional structural entropy (bits)")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_reward_curves(curves: dict[str, list[float]], path, window: int = 50, oracle=None):
    fig, ax = _figure()
    for name, rewards in curves.items():
        r = np.asarray(rewards, dtype=float)
        w = max(1, min(window, len(r)))
        smooth = np.convolve(r, np.ones(w) / w, mode="valid")
        ax.plot(np.arange(w, len(r) + 1), smooth, lw=1.2, label=name)
    if oracle is not None:
        ax.axhline(oracle, ls=":", color="k", lw=1, label="optimal")
    ax.set_xlabel("episode")
    ax.set_ylabel(f"episode reward ({window}-episode mean)")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_partition(spec, cell_clusters, path):
    """Grid heat map of the majority cluster id per cell."""
    grid = np.zeros((spec.height, spec.width))
    for c, ids in enumerate(cell_clusters):
        x, y = spec.coords(c)
        vals, counts = np.unique(ids, return_counts=True)
        grid[y, x] = vals[np.argmax(counts)]
    fig, ax = _figure(4.5, 4.5)
    ax.imshow(grid, cmap="tab20", interpolation="nearest")
    for y in range(spec.height):
        for x in range(spec.width):
            ax.text(x, y, int(grid[y, x]), ha="center", va="center", fontsize=7)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title("abstract state per cell")
    _save(fig, path)
