import numpy as np
import pytest

from rdex import engine
from rdex.baselines import BaselineConfig, run_baseline
from rdex.engine import ConfigurationError, EngineConfig
from rdex.trace import RunTrace

from conftest import shifted
from test_engine import Counting


def test_rand1bin_solves_small_sphere():
    fn = shifted("sphere", d=5)
    trace = run_baseline(fn, BaselineConfig(f=0.5, cr=0.9, seed=1), budget=50_000, checkpoint_every=50)
    assert trace.final < 1e-3


@pytest.mark.parametrize("variant", ["rand1bin", "shade_lite"])
def test_determinism_and_monotonicity(variant):
    fn = shifted("rastrigin", d=5, rotate=True, bias=300.0)
    cfg = BaselineConfig(variant=variant, population=30, seed=4)
    a = run_baseline(fn, cfg, budget=3000, checkpoint_every=30)
    b = run_baseline(fn, cfg, budget=3000, checkpoint_every=30)
    assert a.to_text() == b.to_text()
    assert np.all(np.diff(a.checkpoints) <= 0)
    assert a.final == a.checkpoints[-1]


@pytest.mark.parametrize("variant", ["rand1bin", "shade_lite"])
def test_evaluation_accounting(variant):
    fn = Counting(shifted("griewank", d=4))
    trace = run_baseline(fn, BaselineConfig(variant=variant, population=20, seed=2),
                         budget=2017, checkpoint_every=1)
    assert fn.calls == 2017 and len(trace) == 2017


def test_shade_lite_improves_on_sphere():
    fn = shifted("sphere", d=5)
    trace = run_baseline(fn, BaselineConfig(variant="shade_lite", population=50, seed=0),
                         budget=20_000, checkpoint_every=100)
    assert trace.final < 1e-3


def test_budget_below_population():
    fn = shifted("sphere", d=3)
    with pytest.raises(ConfigurationError):
        run_baseline(fn, BaselineConfig(population=100), budget=99, checkpoint_every=1)


def test_unknown_variant():
    with pytest.raises(ConfigurationError):
        run_baseline(shifted("sphere", d=3), BaselineConfig(variant="jso"), budget=1000, checkpoint_every=10)


def test_trace_schema_matches_engine():
    fn = shifted("ackley", d=3)
    base = run_baseline(fn, BaselineConfig(seed=1), budget=3000, checkpoint_every=30)
    rdex = engine.run(fn, EngineConfig(n0=50, seed=1), budget=3000, checkpoint_every=30)
    assert type(base) is type(rdex) is RunTrace
    assert len(base) == len(rdex) == 100
    hb, hr = base.to_text().splitlines()[0].split(","), rdex.to_text().splitlines()[0].split(",")
    assert len(hb) == len(hr) == 6
    assert hb[1] == hr[1] and hb[3:] == hr[3:]
    assert base.algorithm == "rand1bin" and rdex.algorithm == "rdex"
    assert RunTrace.from_text(base.to_text()).to_text() == base.to_text()
