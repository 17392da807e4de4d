"""Figure rendering for the CLI report paths.

Each helper writes a single PNG next to the delimited text outputs. All
plotting goes through the Agg backend so the CLI works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_loss_curve(log, path, note=""):
    """Per-iteration training loss on a log scale where it helps."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(log.iterations, log.losses, lw=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("batch loss")
    if min(log.losses) > 0 and max(log.losses) / max(min(log.losses), 1e-300) > 50:
        ax.set_yscale("log")
    ax.set_title(f"training loss {note}".strip())
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_error_histogram(errors, path, note=""):
    """Histogram of per-sample angular errors in degrees."""
    errors = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(errors, bins=36, range=(0, 180), edgecolor="black", lw=0.3)
    ax.set_xlabel("angular error (degrees)")
    ax.set_ylabel("samples")
    ax.set_title(f"error distribution {note}".strip())
    ax.axvline(22.5, color="tab:orange", ls="--", lw=0.8)
    ax.axvline(45.0, color="tab:red", ls="--", lw=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_sweep_chart(cells, mean_aes, path, note=""):
    """Bar chart of test MeanAE per (n_classes, n_tasks) sweep cell."""
    labels = [f"N={n}\nM={m}" for n, m in cells]
    fig, ax = plt.subplots(figsize=(max(4, 1.1 * len(cells)), 3.5))
    bars = ax.bar(range(len(cells)), mean_aes, color="tab:blue")
    ax.bar_label(bars, fmt="%.2f", fontsize=8)
    ax.set_xticks(range(len(cells)), labels)
    ax.set_ylabel("test MeanAE (degrees)")
    ax.set_title(f"discretization sweep {note}".strip())
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
