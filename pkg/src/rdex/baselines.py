"""Reference DE opponents that share the RDEx trace contract."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import ConfigurationError, _skip, lpsr_size, update_memory, SuccessHistory
from .operators import Front, cauchy, crossover, repair_bounds
from .suite import BenchmarkFunction
from .trace import RunTrace, TraceRecorder

VARIANTS = ("rand1bin", "shade_lite")


@dataclass(frozen=True)
class BaselineConfig:
    variant: str = "rand1bin"
    population: int = 100
    f: float = 0.5
    cr: float = 0.9
    seed: int = 0

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown baseline variant {self.variant!r}")
        if self.population < 4:
            raise ConfigurationError("population must be at least 4")


def _rand1bin_generation(front, m, cfg, space, rng):
    n = front.size
    i = np.arange(m)
    r1 = _skip(rng.integers(0, n - 1, size=m), [i])
    r2 = _skip(rng.integers(0, n - 2, size=m), [i, r1])
    r3 = _skip(rng.integers(0, n - 3, size=m), [i, r1, r2])
    donor = front.x[r1] + cfg.f * (front.x[r2] - front.x[r3])
    trial, _ = crossover(front.x[:m], donor, np.full(m, cfg.cr), rng)
    return repair_bounds(trial, space, rng), None


def _shade_generation(front, m, history, space, rng):
    n = front.size
    idx = rng.integers(0, history.size, size=m)
    F = cauchy(history.m_f[idx], 0.1, rng, m)
    bad = F <= 0
    while bad.any():
        F[bad] = cauchy(history.m_f[idx][bad], 0.1, rng, int(bad.sum()))
        bad = F <= 0
    F = np.minimum(F, 1.0)
    CR = np.clip(history.m_cr[idx] + 0.1 * rng.standard_normal(m), 0.0, 1.0)

    p = max(2, int(round(0.11 * n)))
    i = np.arange(m)
    pbest = rng.integers(0, p, size=m)
    r1 = _skip(rng.integers(0, n - 1, size=m), [i])
    r2 = _skip(rng.integers(0, n - 2, size=m), [i, r1])
    x = front.x[:m]
    donor = x + F[:, None] * (front.x[pbest] - x) + F[:, None] * (front.x[r1] - front.x[r2])
    trial, _ = crossover(x, donor, CR, rng)
    return repair_bounds(trial, space, rng), (F, CR)


def run_baseline(
    objective: BenchmarkFunction,
    cfg: BaselineConfig = BaselineConfig(),
    budget: Optional[int] = None,
    checkpoint_every: Optional[int] = None,
    algorithm: Optional[str] = None,
) -> RunTrace:
    """Run one baseline; same budget and checkpoint semantics as ``engine.run``."""
    cfg.validate()
    space = objective.space
    d = space.dimension
    if budget is None:
        budget = 10000 * d
    if checkpoint_every is None:
        checkpoint_every = max(1, budget // 1000)
    if budget < cfg.population:
        raise ConfigurationError(f"budget {budget} cannot cover the population of {cfg.population}")

    rng = np.random.default_rng(cfg.seed)
    rec = TraceRecorder(budget, checkpoint_every, offset=objective.bias)
    x0 = space.sample(cfg.population, rng)
    f0 = np.asarray(objective(x0), dtype=float)
    rec.observe(f0)
    front = Front(x0, f0)
    if cfg.variant == "shade_lite":
        front = front.sort()
    history = SuccessHistory.initial(5)

    while rec.remaining > 0:
        m = min(front.size, rec.remaining)
        if cfg.variant == "rand1bin":
            trial, params = _rand1bin_generation(front, m, cfg, space, rng)
        else:
            trial, params = _shade_generation(front, m, history, space, rng)
        f_trial = np.asarray(objective(trial), dtype=float)
        rec.observe(f_trial)

        parent_f = front.fitness[:m]
        success = f_trial <= parent_f
        new_x = front.x.copy()
        new_f = front.fitness.copy()
        new_x[:m][success] = trial[success]
        new_f[:m][success] = f_trial[success]
        front = Front(new_x, new_f)

        if params is not None:
            F, CR = params
            delta = np.maximum(parent_f - f_trial, 0.0)
            history = update_memory(history, F[success], CR[success], delta[success])
            front = front.sort()
            target = lpsr_size(rec.nfe, budget, cfg.population, 4)
            if target < front.size:
                front = front.truncate(target)

    return rec.finish(algorithm or cfg.variant, objective.id, cfg.seed, d)
