"""Population containers and stateless DE variation operators.

Every operator accepts either one vector of shape ``(D,)`` or a batch of shape
``(N, D)`` with per-row scalars of shape ``(N,)``. Randomness always comes from
an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .suite import SearchSpace


@dataclass
class Individual:
    x: np.ndarray
    fitness: float


@dataclass
class Front:
    """Current elite population, stored row-wise."""

    x: np.ndarray
    fitness: np.ndarray

    @property
    def size(self) -> int:
        return len(self.fitness)

    @property
    def members(self) -> List[Individual]:
        return [Individual(self.x[i].copy(), float(self.fitness[i])) for i in range(self.size)]

    def sort(self) -> "Front":
        order = np.argsort(self.fitness, kind="stable")
        return Front(self.x[order], self.fitness[order])

    def truncate(self, size: int) -> "Front":
        return Front(self.x[:size], self.fitness[:size])

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.fitness) >= 0))


@dataclass
class TrialParams:
    """Per-trial control parameters; arrays when describing a whole generation."""

    F: np.ndarray
    CR: np.ndarray
    eb: np.ndarray
    crossed: Optional[np.ndarray] = None


def _col(scale, x):
    scale = np.asarray(scale, dtype=float)
    return scale[..., None] if scale.ndim and x.ndim > 1 else scale


def mutate_standard(x, pbest, r1, r2, F):
    """current-to-pbest step plus one difference vector; no repair."""
    F = _col(F, np.asarray(x))
    return x + F * (pbest - x) + F * (r1 - r2)


def order_donors(donors, donor_fitness):
    """Sort the three donors by fitness; ties keep sampling order."""
    donors = np.asarray(donors, dtype=float)
    donor_fitness = np.asarray(donor_fitness, dtype=float)
    order = np.argsort(donor_fitness, axis=-1, kind="stable")
    return np.take_along_axis(donors, order[..., None], axis=-2)


def mutate_eb(x, donors, donor_fitness, F):
    """Exploitation-biased step: move to the best donor, add mid - worst.

    ``donors`` has shape ``(3, D)`` (or ``(N, 3, D)``), ``donor_fitness``
    shape ``(3,)`` (or ``(N, 3)``).
    """
    ordered = order_donors(donors, donor_fitness)
    best, mid, worst = ordered[..., 0, :], ordered[..., 1, :], ordered[..., 2, :]
    F = _col(F, np.asarray(x))
    return x + F * (best - x) + F * (mid - worst)


def crossover(target, donor, CR, rng: np.random.Generator):
    """Binomial crossover. Returns ``(trial, crossed)`` where ``crossed``
    marks the dimensions taken from the donor (always at least one)."""
    target = np.asarray(target, dtype=float)
    donor = np.asarray(donor, dtype=float)
    d = target.shape[-1]
    CR = _col(CR, target)
    crossed = rng.random(target.shape) < CR
    if target.ndim == 1:
        crossed[rng.integers(d)] = True
    else:
        n = target.shape[0]
        crossed[np.arange(n), rng.integers(0, d, size=n)] = True
    return np.where(crossed, donor, target), crossed


def repair_bounds(x, space: SearchSpace, rng: np.random.Generator, where=None):
    """Resample out-of-bound components uniformly inside their interval.

    If ``where`` is given, only components flagged there are eligible.
    """
    x = np.array(x, dtype=float)
    lower = np.broadcast_to(space.lower, x.shape)
    upper = np.broadcast_to(space.upper, x.shape)
    bad = (x < lower) | (x > upper)
    if where is not None:
        bad &= where
    n_bad = int(bad.sum())
    if n_bad:
        lo = lower[bad]
        x[bad] = lo + rng.random(n_bad) * (upper[bad] - lo)
    return x


def cauchy(center, scale, rng: np.random.Generator, size=None):
    """Cauchy draws by inverse CDF of a uniform variate."""
    u = rng.random(size)
    return center + scale * np.tan(np.pi * (u - 0.5))


def cauchy_perturb(trial, crossed, p_r, sigma_loc, space: SearchSpace, rng: np.random.Generator):
    """Heavy-tailed jitter on the dimensions crossover left untouched."""
    trial = np.array(trial, dtype=float)
    crossed = np.asarray(crossed, dtype=bool)
    if p_r <= 0.0:
        return trial
    picked = ~crossed & (rng.random(trial.shape) < p_r)
    n = int(picked.sum())
    if n == 0:
        return trial
    trial[picked] = cauchy(trial[picked], sigma_loc, rng, n)
    return repair_bounds(trial, space, rng, where=picked)


def greedy_select(target: Individual, trial: Individual):
    """Keep the trial when it is no worse than the target.

    Returns ``(winner, success, delta)`` with ``delta`` the non-negative
    fitness improvement.
    """
    if trial.fitness <= target.fitness:
        return trial, True, max(target.fitness - trial.fitness, 0.0)
    return target, False, 0.0
