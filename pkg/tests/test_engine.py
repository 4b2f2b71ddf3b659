import math
from fractions import Fraction

import numpy as np
import pytest

from rdex import engine
from rdex.engine import (
    AdaptState,
    ConfigurationError,
    EngineConfig,
    SuccessHistory,
    choose_branches,
    compute_p_window,
    lpsr_size,
    mean_f_standard,
    reduce_front,
    sample_donors,
    sample_params,
    update_memory,
    update_rho,
)
from rdex.operators import Front
from rdex.suite import BenchmarkFunction, SearchSpace

from conftest import shifted


class Counting:
    """Objective wrapper that counts evaluated points."""

    def __init__(self, fn):
        self.fn, self.space, self.bias, self.id = fn, fn.space, fn.bias, fn.id
        self.calls = 0

    def __call__(self, x):
        x = np.asarray(x)
        self.calls += 1 if x.ndim == 1 else x.shape[0]
        return self.fn(x)


def lehmer_oracle(F, CR, delta, old_cr):
    total = sum(delta)
    w = [d / total for d in delta]
    mf = sum(wk * f * f for wk, f in zip(w, F)) / sum(wk * f for wk, f in zip(w, F))
    den = sum(wk * c for wk, c in zip(w, CR))
    lcr = sum(wk * c * c for wk, c in zip(w, CR)) / den if den > 0 else 0.0
    return mf, 0.5 * (old_cr + lcr)


def lpsr_oracle(nfe, max_fe, n0, n_min):
    return max(n_min, math.floor(Fraction(n0) + Fraction(n_min - n0) * Fraction(nfe, max_fe)))


# -- scalar formulas ---------------------------------------------------------

@pytest.mark.parametrize(
    "n, sr, expected", [(600, 0.0, 420), (600, 1.0, 2), (4, 0.5, 2)]
)
def test_p_window_examples(n, sr, expected):
    assert compute_p_window(n, sr, 0.7, 7.0) == expected


def test_mean_f_examples():
    assert mean_f_standard(0.0) == 0.4
    assert mean_f_standard(1.0) == pytest.approx(0.4 + 0.25 * np.tanh(5.0), abs=1e-15)
    assert mean_f_standard(1.0) == pytest.approx(0.649977, abs=1e-6)
    assert mean_f_standard(0.2) == pytest.approx(0.4 + 0.25 * np.tanh(1.0), abs=1e-15)


def test_update_rho_examples():
    assert update_rho([3.0], [1.0], 0.7) == 0.75
    assert update_rho([], [], 0.42) == 0.42
    assert update_rho([5.0], [], 0.5) == 0.95
    assert update_rho([], [2.0], 0.5) == 0.05
    assert update_rho([0.0], [0.0], 0.3) == 0.3


def test_update_memory_single_success():
    h = SuccessHistory(np.full(5, 0.5), np.full(5, 0.4), 0)
    new = update_memory(h, [0.5], [0.6], [7.0])
    assert new.m_f[0] == pytest.approx(0.5, abs=1e-15)
    assert new.m_cr[0] == pytest.approx(0.5, abs=1e-15)
    assert new.write_ptr == 1


def test_update_memory_two_equal_weights():
    h = SuccessHistory.initial(5)
    new = update_memory(h, [0.2, 0.8], [0.5, 0.5], [1.0, 1.0])
    assert new.m_f[0] == pytest.approx(0.68, abs=1e-12)
    assert new.m_f[0] == pytest.approx(lehmer_oracle([0.2, 0.8], [0.5, 0.5], [1, 1], 0.5)[0], abs=1e-12)


def test_update_memory_empty_is_identity():
    h = SuccessHistory(np.array([0.1, 0.2, 0.3]), np.array([0.4, 0.5, 0.6]), 2)
    for args in (([], [], []), ([0.5], [0.5], [0.0])):
        new = update_memory(h, *args)
        assert np.array_equal(new.m_f, h.m_f) and np.array_equal(new.m_cr, h.m_cr)
        assert new.write_ptr == 2


def test_update_memory_all_zero_cr():
    h = SuccessHistory.initial(3)
    new = update_memory(h, [0.5, 0.7], [0.0, 0.0], [1.0, 2.0])
    assert new.m_cr[0] == 0.25


def test_update_memory_pointer_wraps():
    h = SuccessHistory.initial(2)
    for expected in (1, 0, 1):
        h = update_memory(h, [0.5], [0.5], [1.0])
        assert h.write_ptr == expected


def test_update_memory_does_not_mutate_input():
    h = SuccessHistory.initial(3)
    update_memory(h, [0.9], [0.9], [1.0])
    assert np.all(h.m_f == 0.5) and h.write_ptr == 0


@pytest.mark.parametrize("nfe, expected", [(0, 600), (100_000, 4), (50_000, 302)])
def test_lpsr_examples(nfe, expected):
    assert lpsr_size(nfe, 100_000, 600, 4) == expected


def test_reduce_front_drops_worst():
    cfg = EngineConfig(n0=10, n_min=4)
    front = Front(np.arange(20.0).reshape(10, 2), np.arange(10.0))
    out = reduce_front(front, 50, 100, cfg)
    assert out.size == 7
    assert np.array_equal(out.fitness, np.arange(7.0))
    assert reduce_front(front, 0, 100, cfg).size == 10
    assert reduce_front(front, 100, 100, cfg).size == 4


def test_formula_oracles_random():
    g = np.random.default_rng(0)
    for _ in range(10_000):
        n = int(g.integers(1, 2000))
        sr = float(g.random())
        expected = max(2, int(np.floor(n * 0.7 * np.exp(-7.0 * sr))))
        assert compute_p_window(n, sr) == expected
        max_fe = int(g.integers(1, 10**6))
        nfe = int(g.integers(0, max_fe + 1))
        assert lpsr_size(nfe, max_fe, 600, 4) == lpsr_oracle(nfe, max_fe, 600, 4)


# -- sampling ------------------------------------------------------------------

def _state(sr=0.0, nfe=0, max_fe=1000):
    return AdaptState(rho_eb=0.7, sr=sr, nfe=nfe, max_fe=max_fe)


def test_degenerate_gaussian_gives_mean(rng):
    cfg = EngineConfig(sigma_f=0.0)
    p = sample_params(np.zeros(50, bool), SuccessHistory.initial(5), _state(), cfg, rng)
    assert np.all(p.F == 0.4)


def test_eb_cr_floor_early(rng):
    h = SuccessHistory(np.full(5, 0.5), np.zeros(5), 0)
    p = sample_params(np.ones(1000, bool), h, _state(nfe=0), EngineConfig(), rng)
    assert np.all(p.CR >= 0.5)
    late = sample_params(np.ones(1000, bool), h, _state(nfe=500), EngineConfig(), rng)
    assert late.CR.min() < 0.5


def test_standard_f_concentration():
    rng = np.random.default_rng(5)
    p = sample_params(np.zeros(100_000, bool), SuccessHistory.initial(5), _state(), EngineConfig(), rng)
    assert 0.398 <= p.F.mean() <= 0.402
    assert np.all((p.F > 0) & (p.F <= 1))


def test_eb_f_in_range_and_fallback(rng):
    h = SuccessHistory(np.full(5, np.nan), np.full(5, 0.5), 0)
    p = sample_params(np.ones(20_000, bool), h, _state(), EngineConfig(), rng)
    assert np.all((p.F > 0) & (p.F <= 1))
    # resampling non-positive draws truncates the Cauchy at zero
    lost = 0.5 - math.atan(0.5 / 0.1) / math.pi
    expected = 0.5 + 0.1 * math.tan(math.pi * (0.5 + lost / 2 - 0.5))
    assert abs(np.median(p.F) - expected) < 0.01


def test_branch_frequency(rng):
    eb = choose_branches(10_000, 0.7, rng)
    assert 0.68 <= eb.mean() <= 0.72


def test_donor_indices_distinct(rng):
    for n in (4, 5, 30):
        pbest, r1, r2 = sample_donors(n, n, 2, rng)
        i = np.arange(n)
        assert np.all(r1 != i) and np.all(r2 != i) and np.all(r1 != r2)
        assert np.all(pbest < 2)


def test_donor_indices_uniform():
    rng = np.random.default_rng(0)
    n = 6
    counts = np.zeros((n, n))
    for _ in range(3000):
        _, a, b = sample_donors(n, n, 2, rng)
        counts[np.arange(n), a] += 1
    # each of the n - 1 admissible indices roughly equally likely
    off = counts[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    assert np.all(np.abs(off / 3000 - 1 / (n - 1)) < 0.03)


# -- full runs -----------------------------------------------------------------

def test_budget_below_initial_front_raises():
    fn = shifted("sphere", d=2)
    with pytest.raises(ConfigurationError):
        engine.run(fn, EngineConfig(), budget=500, checkpoint_every=10)


def test_invalid_config():
    with pytest.raises(ConfigurationError):
        EngineConfig(n_min=3).validate()


def test_protocol_trace_length():
    d = 2
    fn = shifted("sphere", d=d)
    trace = engine.run(fn, EngineConfig(seed=1), budget=10000 * d, checkpoint_every=10 * d)
    assert len(trace) == 1000
    assert trace.final == trace.checkpoints[-1]


def test_evaluation_accounting_and_monotone_trace():
    fn = Counting(shifted("rastrigin", d=5, bias=100.0))
    trace = engine.run(fn, EngineConfig(n0=50, seed=3), budget=4321, checkpoint_every=1)
    assert fn.calls == 4321
    assert len(trace) == 4321
    assert np.all(np.diff(trace.checkpoints) <= 0)
    assert np.all(trace.checkpoints >= 0)


def test_deterministic_traces():
    fn = shifted("ackley", d=5, rotate=True)
    a = engine.run(fn, EngineConfig(n0=60, seed=7), budget=6000, checkpoint_every=60)
    b = engine.run(fn, EngineConfig(n0=60, seed=7), budget=6000, checkpoint_every=60)
    c = engine.run(fn, EngineConfig(n0=60, seed=8), budget=6000, checkpoint_every=60)
    assert a.to_text() == b.to_text()
    assert a.to_text() != c.to_text()


@pytest.mark.slow
def test_sphere_converges():
    fn = shifted("sphere", d=10)
    trace = engine.run(fn, EngineConfig(seed=11), budget=100_000, checkpoint_every=100)
    assert trace.final < 1e-8


def _logged_run(seed=0, **kw):
    fn = shifted("rastrigin", d=10, rotate=True)
    cfg = EngineConfig(seed=seed, **kw)
    records = []
    engine.run(fn, cfg, budget=30_000, checkpoint_every=100, log=records)
    return cfg, records


def test_logged_adaptation_invariants():
    cfg, records = _logged_run()
    rho = cfg.rho0
    for rec in records:
        total = rec.delta_eb + rec.delta_std
        if total > 0:
            raw = rec.delta_eb / total
            assert rec.rho_eb == min(max(raw, 0.05), 0.95)
            if 0.05 < raw < 0.95:
                assert rec.rho_eb == raw
        else:
            assert rec.rho_eb == rho
        rho = rec.rho_eb
        assert 0.05 <= rec.rho_eb <= 0.95
        assert 0.0 <= rec.sr <= 1.0


def test_front_size_follows_schedule():
    cfg, records = _logged_run(seed=1)
    for rec in records:
        assert rec.size == lpsr_oracle(rec.nfe, 30_000, cfg.n0, cfg.n_min)
    assert records[-1].nfe == 30_000


def test_frozen_rho_branch_frequency():
    fn = shifted("sphere", d=5)
    records = []
    engine.run(fn, EngineConfig(n0=100, seed=2), budget=12_000, checkpoint_every=100,
               log=records, freeze_rho=True)
    eb = sum(r.eb_trials for r in records)
    trials = sum(r.trials for r in records)
    assert trials >= 10_000
    assert 0.68 <= eb / trials <= 0.72
    assert all(r.rho_eb == 0.7 for r in records)
