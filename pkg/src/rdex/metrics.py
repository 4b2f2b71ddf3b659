"""Evaluation math: targets, anytime metrics, U-scores and rank statistics.

Everything here is oriented for minimisation: smaller samples are better.
"""

from __future__ import annotations

import math
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np
from scipy import stats

ZERO_THRESHOLD = 1e-8


def snap(values, threshold: float = ZERO_THRESHOLD) -> np.ndarray:
    """Set errors below ``threshold`` to exactly zero."""
    values = np.array(values, dtype=float)
    values[values < threshold] = 0.0
    return values


def compute_target(finals) -> float:
    """Median of the pooled final values (mean of the middle pair for even counts)."""
    finals = np.asarray(finals, dtype=float).ravel()
    if finals.size == 0:
        raise ValueError("cannot compute a target from an empty pool")
    return float(np.median(finals))


def time_to_target(checkpoints, tgt: float) -> int:
    """1-based index of the first checkpoint at or below ``tgt``; C + 1 if none."""
    checkpoints = np.asarray(checkpoints, dtype=float)
    hit = np.flatnonzero(checkpoints <= tgt)
    return int(hit[0]) + 1 if hit.size else checkpoints.size + 1


def auc(checkpoints, tgt: float) -> float:
    checkpoints = np.asarray(checkpoints, dtype=float)
    # log1p keeps tiny excesses strictly positive
    return float(np.mean(np.log1p(np.maximum(checkpoints - tgt, 0.0)) / np.log(10.0)))


def pairwise_u(a, b) -> float:
    """Mann-Whitney count of ``a`` beating ``b``: wins score 1, ties 0.5."""
    a = np.asarray(a, dtype=float)
    b = np.sort(np.asarray(b, dtype=float))
    left = np.searchsorted(b, a, side="left")
    right = np.searchsorted(b, a, side="right")
    better = b.size - right
    ties = right - left
    return float(better.sum() + 0.5 * ties.sum())


def u_score(samples: Mapping[str, Sequence[float]]) -> Dict[str, float]:
    """Each algorithm's summed U against every other algorithm on one function."""
    if len(samples) < 2:
        raise ValueError("U-score needs at least two algorithms")
    names = list(samples)
    scores = {name: 0.0 for name in names}
    for a in names:
        for b in names:
            if a != b:
                scores[a] += pairwise_u(samples[a], samples[b])
    return scores


def a12(x, y) -> float:
    """Vargha-Delaney A12: probability that a draw of ``x`` is smaller than one of ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("A12 needs non-empty samples")
    return pairwise_u(x, y) / (x.size * y.size)


def wilcoxon_ranksum(x, y, alpha: float = 0.05) -> Tuple[float, str]:
    """Two-sided rank-sum test with midranks and a tie-corrected normal approximation.

    A 0.5 continuity correction is applied to the U statistic.

    Returns ``(p, verdict)`` where verdict is ``"win"``, ``"tie"`` or
    ``"loss"`` for ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    if n < 2 or m < 2:
        raise ValueError("rank-sum test needs at least two samples per group")
    pooled = np.concatenate([x, y])
    total = n + m
    ranks = stats.rankdata(pooled)
    u = ranks[:n].sum() - n * (n + 1) / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = np.sum(counts ** 3 - counts) / (total * (total - 1))
    var = n * m / 12.0 * ((total + 1) - tie_term)
    if var <= 0:
        return 1.0, "tie"
    z = max(abs(u - n * m / 2.0) - 0.5, 0.0) / math.sqrt(var)
    p = float(min(1.0, 2.0 * stats.norm.sf(z)))
    if p >= alpha:
        return p, "tie"
    mx, my = np.median(x), np.median(y)
    if mx == my:
        # equal medians: fall back to the rank-sum direction
        better = u < n * m / 2.0
    else:
        better = mx < my
    return p, "win" if better else "loss"


def holm_correct(pvalues, alpha: float = 0.05) -> Dict[object, Tuple[bool, float]]:
    """Holm step-down. Maps each id to ``(rejected, adjusted_p)``."""
    items = list(pvalues.items()) if isinstance(pvalues, Mapping) else list(pvalues)
    m = len(items)
    order = sorted(range(m), key=lambda k: items[k][1])
    out = {}
    running = 0.0
    rejecting = True
    for rank, k in enumerate(order):
        key, p = items[k]
        factor = m - rank
        running = max(running, min(1.0, factor * p))
        if rejecting and p > alpha / factor:
            rejecting = False
        out[key] = (rejecting, running)
    return out


def friedman_statistic(avg_ranks, n_blocks: int) -> float:
    """Friedman chi-square from average ranks over ``n_blocks`` functions."""
    r = np.asarray(avg_ranks, dtype=float)
    k = r.size
    return 12.0 * n_blocks / (k * (k + 1)) * float(np.sum((r - (k + 1) / 2.0) ** 2))


def friedman(medians) -> Tuple[float, int, np.ndarray, float]:
    """Friedman test on a functions x algorithms matrix (smaller is better).

    Returns ``(chi2, df, avg_ranks, p)``.
    """
    medians = np.asarray(medians, dtype=float)
    if medians.ndim != 2 or medians.shape[0] < 2 or medians.shape[1] < 2:
        raise ValueError("need at least two functions and two algorithms")
    n, k = medians.shape
    ranks = stats.rankdata(medians, axis=1)
    avg = ranks.mean(axis=0)
    chi2 = friedman_statistic(avg, n)
    df = k - 1
    return chi2, df, avg, float(stats.chi2.sf(chi2, df))
