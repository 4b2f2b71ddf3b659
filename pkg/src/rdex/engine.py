"""RDEx-SOP: success-history DE with an exploitation-biased hybrid branch.

A generation builds all trials from the front as it stood at the start of
the generation, evaluates them as one batch, then applies greedy selection,
hybrid-rate and memory updates, and linear population size reduction at the
generation barrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .operators import (
    Front,
    TrialParams,
    cauchy,
    cauchy_perturb,
    crossover,
    mutate_eb,
    mutate_standard,
    repair_bounds,
)
from .suite import BenchmarkFunction
from .trace import RunTrace, TraceRecorder

RHO_MIN = 0.05
RHO_MAX = 0.95
CR_SIGMA = 0.1
EB_F_SCALE = 0.1
EB_F_FALLBACK = 0.5
EB_CR_FLOOR = 0.5
EB_CR_FLOOR_UNTIL = 0.25


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    n0: int = 600
    n_min: int = 4
    h: int = 5
    rho0: float = 0.7
    p_r: float = 0.1
    sigma_loc: float = 0.1
    sigma_f: float = 0.02
    xi: float = 0.7
    k: float = 7.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_min < 4:
            raise ConfigurationError("n_min must be at least 4")
        if self.n0 < self.n_min:
            raise ConfigurationError("n0 must be >= n_min")
        if self.h < 1:
            raise ConfigurationError("memory size h must be positive")
        if not 0.0 <= self.p_r <= 1.0:
            raise ConfigurationError("p_r must lie in [0, 1]")
        if self.sigma_loc <= 0 or self.sigma_f < 0:
            raise ConfigurationError("scales must be positive")


@dataclass
class SuccessHistory:
    m_f: np.ndarray
    m_cr: np.ndarray
    write_ptr: int = 0

    @classmethod
    def initial(cls, h: int, value: float = 0.5) -> "SuccessHistory":
        return cls(np.full(h, value), np.full(h, value), 0)

    @property
    def size(self) -> int:
        return len(self.m_f)

    def copy(self) -> "SuccessHistory":
        return SuccessHistory(self.m_f.copy(), self.m_cr.copy(), self.write_ptr)


@dataclass
class AdaptState:
    rho_eb: float
    sr: float
    nfe: int
    max_fe: int
    generation: int = 0

    @property
    def progress(self) -> float:
        return self.nfe / self.max_fe


@dataclass
class GenerationLog:
    generation: int
    nfe: int
    size: int
    sr: float
    rho_eb: float
    best: float
    p_window: int
    eb_trials: int
    trials: int
    delta_eb: float
    delta_std: float

    def to_text(self) -> str:
        return (
            f"gen={self.generation}\tnfe={self.nfe}\tsize={self.size}\tsr={self.sr:.6g}"
            f"\trho_eb={self.rho_eb:.6g}\tbest={self.best!r}"
        )


def compute_p_window(n: int, sr: float, xi: float = 0.7, k: float = 7.0) -> int:
    """Size of the top-ranked window pbest is drawn from."""
    return max(2, math.floor(n * xi * math.exp(-k * sr)))


def mean_f_standard(sr: float) -> float:
    return 0.4 + 0.25 * math.tanh(5.0 * sr)


def lpsr_size(nfe: int, max_fe: int, n0: int, n_min: int) -> int:
    """Front size after ``nfe`` of ``max_fe`` evaluations (exact integer floor)."""
    return max(n_min, (n0 * max_fe + (n_min - n0) * nfe) // max_fe)


def choose_branches(n: int, rho_eb: float, rng: np.random.Generator) -> np.ndarray:
    """True where the trial uses the exploitation-biased branch."""
    return rng.random(n) < rho_eb


def sample_params(
    eb,
    history: SuccessHistory,
    state: AdaptState,
    cfg: EngineConfig,
    rng: np.random.Generator,
) -> TrialParams:
    """Draw (F, CR) for each trial; ``eb`` is the per-trial branch mask."""
    eb = np.atleast_1d(np.asarray(eb, dtype=bool))
    n = eb.size
    idx = rng.integers(0, history.size, size=n)

    # standard branch: Gaussian around the success-rate-driven mean, kept in (0, 1]
    mu = mean_f_standard(state.sr)
    f_std = mu + cfg.sigma_f * rng.standard_normal(n)
    bad = (f_std <= 0.0) | (f_std > 1.0)
    while bad.any():
        f_std[bad] = mu + cfg.sigma_f * rng.standard_normal(int(bad.sum()))
        bad = (f_std <= 0.0) | (f_std > 1.0)

    # EB branch: Cauchy around the memory, redrawn while non-positive
    center = history.m_f[idx]
    center = np.where(np.isfinite(center), center, EB_F_FALLBACK)
    f_eb = cauchy(center, EB_F_SCALE, rng, n)
    bad = f_eb <= 0.0
    while bad.any():
        f_eb[bad] = cauchy(center[bad], EB_F_SCALE, rng, int(bad.sum()))
        bad = f_eb <= 0.0
    f_eb = np.minimum(f_eb, 1.0)

    cr = np.clip(history.m_cr[idx] + CR_SIGMA * rng.standard_normal(n), 0.0, 1.0)
    if state.progress < EB_CR_FLOOR_UNTIL:
        cr = np.where(eb, np.maximum(cr, EB_CR_FLOOR), cr)

    return TrialParams(np.where(eb, f_eb, f_std), cr, eb)


def update_rho(successes_eb: Sequence[float], successes_std: Sequence[float], current: float) -> float:
    gain_eb = float(np.sum(successes_eb))
    total = gain_eb + float(np.sum(successes_std))
    if total <= 0.0:
        return current
    return min(max(gain_eb / total, RHO_MIN), RHO_MAX)


def update_memory(history: SuccessHistory, F, CR, delta) -> SuccessHistory:
    """Weighted Lehmer update of one memory slot from the successful trials.

    Returns a new history; the input is left untouched. Nothing changes when
    the total improvement is zero.
    """
    F = np.asarray(F, dtype=float)
    CR = np.asarray(CR, dtype=float)
    delta = np.asarray(delta, dtype=float)
    total = delta.sum() if delta.size else 0.0
    if total <= 0.0:
        return history
    w = delta / total
    new = history.copy()
    ptr = history.write_ptr
    new.m_f[ptr] = np.sum(w * F * F) / np.sum(w * F)
    denom = np.sum(w * CR)
    lehmer_cr = np.sum(w * CR * CR) / denom if denom > 0 else 0.0
    new.m_cr[ptr] = 0.5 * (history.m_cr[ptr] + lehmer_cr)
    new.write_ptr = (ptr + 1) % history.size
    return new


def reduce_front(front: Front, nfe: int, max_fe: int, cfg: EngineConfig) -> Front:
    """Drop the worst members down to the linear-reduction schedule."""
    target = lpsr_size(nfe, max_fe, cfg.n0, cfg.n_min)
    if target < front.size:
        return front.truncate(target)
    return front


def _skip(draw, excluded):
    """Map draws from ``[0, n - len(excluded))`` onto ``[0, n)`` minus ``excluded``."""
    out = draw.copy()
    for col in np.sort(np.stack(excluded, axis=-1), axis=-1).T:
        out += out >= col
    return out


def sample_donors(m: int, n: int, p: int, rng: np.random.Generator):
    """Indices (pbest, r1, r2) for targets ``0..m-1`` of a sorted front of size ``n``.

    r1 and r2 differ from each other and from the target; pbest is drawn
    from the top ``p`` and may coincide with any of them.
    """
    i = np.arange(m)
    pbest = rng.integers(0, p, size=m)
    r1 = _skip(rng.integers(0, n - 1, size=m), [i])
    r2 = _skip(rng.integers(0, n - 2, size=m), [i, r1])
    return pbest, r1, r2


def eb_first_donor(pbest, targets, r1, r2, n: int, p: int, rng: np.random.Generator):
    """Make the top-window donor distinct from target, r1 and r2.

    Colliding rows redraw from the top window without the excluded indices,
    or from the rest of the front when the window is exhausted.
    """
    a = pbest.copy()
    for k in np.flatnonzero((a == targets) | (a == r1) | (a == r2)):
        taken = {int(targets[k]), int(r1[k]), int(r2[k])}
        window = [j for j in range(p) if j not in taken]
        if not window:
            window = [j for j in range(n) if j not in taken]
        a[k] = window[rng.integers(len(window))]
    return a


def run(
    objective: BenchmarkFunction,
    cfg: EngineConfig = EngineConfig(),
    budget: Optional[int] = None,
    checkpoint_every: Optional[int] = None,
    log: Optional[List[GenerationLog]] = None,
    algorithm: str = "rdex",
    freeze_rho: bool = False,
) -> RunTrace:
    """Minimise ``objective`` with exactly ``budget`` evaluations.

    Defaults follow the competition protocol: ``budget = 10000 * D`` and one
    checkpoint per ``budget / 1000`` evaluations.
    """
    cfg.validate()
    space = objective.space
    d = space.dimension
    if budget is None:
        budget = 10000 * d
    if checkpoint_every is None:
        checkpoint_every = max(1, budget // 1000)
    if budget < cfg.n0:
        raise ConfigurationError(f"budget {budget} cannot cover the initial front of {cfg.n0}")

    rng = np.random.default_rng(cfg.seed)
    rec = TraceRecorder(budget, checkpoint_every, offset=objective.bias)

    x0 = space.sample(cfg.n0, rng)
    f0 = np.asarray(objective(x0), dtype=float)
    rec.observe(f0)
    front = Front(x0, f0).sort()
    history = SuccessHistory.initial(cfg.h)
    state = AdaptState(cfg.rho0, 0.0, rec.nfe, budget)

    while rec.remaining > 0:
        n = front.size
        m = min(n, rec.remaining)
        p = min(compute_p_window(n, state.sr, cfg.xi, cfg.k), n)

        eb = choose_branches(m, state.rho_eb, rng)
        params = sample_params(eb, history, state, cfg, rng)
        pbest, r1, r2 = sample_donors(m, n, p, rng)

        x = front.x[:m]
        F = params.F
        donor = mutate_standard(x, front.x[pbest], front.x[r1], front.x[r2], F)
        if eb.any():
            rows = np.flatnonzero(eb)
            a = eb_first_donor(pbest[rows], rows, r1[rows], r2[rows], n, p, rng)
            trio = np.stack([a, r1[rows], r2[rows]], axis=1)
            donor[rows] = mutate_eb(x[rows], front.x[trio], front.fitness[trio], F[rows])

        trial, crossed = crossover(x, donor, params.CR, rng)
        trial = repair_bounds(trial, space, rng)
        trial = cauchy_perturb(trial, crossed, cfg.p_r, cfg.sigma_loc, space, rng)
        params.crossed = crossed

        f_trial = np.asarray(objective(trial), dtype=float)
        rec.observe(f_trial)

        parent_f = front.fitness[:m]
        success = f_trial <= parent_f
        delta = np.maximum(parent_f - f_trial, 0.0)

        new_x = front.x.copy()
        new_f = front.fitness.copy()
        new_x[:m][success] = trial[success]
        new_f[:m][success] = f_trial[success]

        gain_eb = delta[success & eb]
        gain_std = delta[success & ~eb]
        if not freeze_rho:
            state.rho_eb = update_rho(gain_eb, gain_std, state.rho_eb)
        history = update_memory(history, F[success], params.CR[success], delta[success])
        state.sr = float(success.sum()) / m
        state.nfe = rec.nfe
        state.generation += 1

        front = reduce_front(Front(new_x, new_f).sort(), rec.nfe, budget, cfg)

        if log is not None:
            log.append(
                GenerationLog(
                    state.generation,
                    rec.nfe,
                    front.size,
                    state.sr,
                    state.rho_eb,
                    float(rec.best - objective.bias),
                    p,
                    int(eb.sum()),
                    m,
                    float(gain_eb.sum()),
                    float(gain_std.sum()),
                )
            )

    return rec.finish(algorithm, objective.id, cfg.seed, d)

