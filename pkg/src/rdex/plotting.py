"""Matplotlib figures written next to the tab-separated report tables."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def convergence_figure(curves: Mapping[str, np.ndarray], path, title: str = "") -> Path:
    """Median error against checkpoint index, one line per algorithm."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    floor = min((c[c > 0].min() for c in curves.values() if np.any(c > 0)), default=1e-8)
    for name, curve in curves.items():
        idx = np.arange(1, len(curve) + 1)
        ax.plot(idx, curve, label=name, lw=1.5)
    ax.set_yscale("symlog", linthresh=max(floor, 1e-8))
    ax.set_xlabel("checkpoint")
    ax.set_ylabel("median best-so-far error")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def score_figure(ranking, path) -> Path:
    """Stacked speed/accuracy bars per algorithm, in rank order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [r.algorithm for r in ranking]
    speed = [r.speed for r in ranking]
    acc = [r.accuracy for r in ranking]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.bar(names, speed, label="speed")
    ax.bar(names, acc, bottom=speed, label="accuracy")
    ax.set_ylabel("U-score")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
