"""Experiment grid execution: plans, seeding, trace files and the run manifest."""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import baselines, engine
from .suite import default_suite
from .trace import RunTrace

log = logging.getLogger(__name__)

ENGINES = ("rdex", "rand1bin", "shade_lite")
MANIFEST = "manifest.tsv"
MANIFEST_COLUMNS = ("algorithm", "function", "run", "seed", "path", "final")


class PlanError(ValueError):
    """Malformed plan file or an unusable plan."""


class MissingDataError(RuntimeError):
    pass


@dataclass(frozen=True)
class AlgorithmSpec:
    label: str
    engine: str
    options: Tuple[Tuple[str, str], ...] = ()


@dataclass
class ExperimentPlan:
    algorithms: List[AlgorithmSpec] = field(default_factory=list)
    functions: List[str] = field(default_factory=list)
    runs: int = 25
    dimension: int = 30
    budget_per_dim: int = 10000
    checkpoint_per_dim: int = 10
    base_seed: int = 0
    suite_seed: int = 1

    @property
    def budget(self) -> int:
        return self.budget_per_dim * self.dimension

    @property
    def checkpoint_every(self) -> int:
        return self.checkpoint_per_dim * self.dimension

    def cells(self):
        for alg in self.algorithms:
            for fn in self.functions:
                for r in range(self.runs):
                    yield alg, fn, r


_INT_KEYS = ("runs", "dimension", "budget_per_dim", "checkpoint_per_dim", "base_seed", "suite_seed")


def parse_plan(text: str) -> ExperimentPlan:
    """Parse ``key=value`` lines; ``algorithm=`` and ``function=`` repeat.

    ``algorithm=label:engine`` gives an engine a custom label and
    ``<label>.<option>=value`` overrides one of its configuration fields.
    ``function=all`` expands to the whole default suite.
    """
    plan = ExperimentPlan()
    options: Dict[str, List[Tuple[str, str]]] = {}
    seen_all = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PlanError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise PlanError(f"line {lineno}: empty key or value in {raw.strip()!r}")
        if key == "algorithm":
            label, _, kind = value.partition(":")
            kind = kind or label
            if kind not in ENGINES:
                raise PlanError(f"line {lineno}: unknown algorithm {kind!r}")
            if any(a.label == label for a in plan.algorithms):
                raise PlanError(f"line {lineno}: duplicate algorithm label {label!r}")
            plan.algorithms.append(AlgorithmSpec(label, kind))
        elif key == "function":
            if value == "all":
                seen_all = True
            elif value in plan.functions:
                raise PlanError(f"line {lineno}: duplicate function {value!r}")
            else:
                plan.functions.append(value)
        elif key in _INT_KEYS:
            try:
                number = int(value)
            except ValueError:
                raise PlanError(f"line {lineno}: {key} must be an integer, got {value!r}") from None
            if number < (0 if key.endswith("seed") else 1):
                raise PlanError(f"line {lineno}: {key} out of range")
            setattr(plan, key, number)
        elif "." in key:
            label, _, opt = key.partition(".")
            options.setdefault(label, []).append((opt, value))
        else:
            raise PlanError(f"line {lineno}: unknown key {key!r}")

    if not plan.algorithms:
        raise PlanError("plan lists no algorithm")
    if plan.dimension < 2:
        raise PlanError("dimension must be at least 2")
    suite_ids = [fn.id for fn in default_suite(plan.dimension, plan.suite_seed)]
    if seen_all:
        plan.functions = suite_ids
    if not plan.functions:
        raise PlanError("plan lists no function")
    for fid in plan.functions:
        if fid not in suite_ids:
            raise PlanError(f"unknown function {fid!r}; known: {', '.join(suite_ids)}")
    if plan.budget_per_dim % plan.checkpoint_per_dim:
        raise PlanError("budget_per_dim must be a multiple of checkpoint_per_dim")

    labels = {a.label for a in plan.algorithms}
    for label, opts in options.items():
        if label not in labels:
            raise PlanError(f"options given for unknown algorithm {label!r}")
    plan.algorithms = [
        AlgorithmSpec(a.label, a.engine, tuple(options.get(a.label, ()))) for a in plan.algorithms
    ]
    for a in plan.algorithms:
        make_config(a, 0)  # surface bad options at parse time
    return plan


def load_plan(path) -> ExperimentPlan:
    return parse_plan(Path(path).read_text())


def make_config(spec: AlgorithmSpec, seed: int):
    if spec.engine == "rdex":
        base = engine.EngineConfig(seed=seed)
    else:
        base = baselines.BaselineConfig(variant=spec.engine, seed=seed)
    types = {f.name: f.type for f in fields(base)}
    updates = {}
    for name, value in spec.options:
        if name not in types or name in ("seed", "variant"):
            raise PlanError(f"{spec.label}: unknown option {name!r}")
        try:
            updates[name] = int(value) if types[name] in (int, "int") else float(value)
        except ValueError:
            raise PlanError(f"{spec.label}.{name}: bad value {value!r}") from None
    cfg = replace(base, **updates)
    try:
        cfg.validate()
    except engine.ConfigurationError as exc:
        raise PlanError(f"{spec.label}: {exc}") from None
    return cfg


def stable_hash(*parts) -> int:
    """64-bit BLAKE2b digest of the unit-separator-joined UTF-8 parts."""
    data = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def plan_seeds(plan: ExperimentPlan) -> Dict[Tuple[str, str, int], int]:
    seeds = {}
    used = {}
    for alg, fn, r in plan.cells():
        seed = stable_hash(plan.base_seed, alg.label, fn, r)
        if seed in used:
            raise PlanError(f"seed collision between {used[seed]} and {(alg.label, fn, r)}")
        used[seed] = (alg.label, fn, r)
        seeds[(alg.label, fn, r)] = seed
    return seeds


def trace_path(label: str, function: str, run: int) -> str:
    return f"traces/{label}/{function}/run_{run:03d}.txt"


@lru_cache(maxsize=8)
def _suite(dimension: int, seed: int):
    return {fn.id: fn for fn in default_suite(dimension, seed)}


def run_cell(spec: AlgorithmSpec, function: str, seed: int, dimension: int, suite_seed: int,
             budget: int, checkpoint_every: int, gen_log: bool = False):
    """Execute one (algorithm, function, seed) run. Pure given its arguments.

    Returns the trace and, for RDEx runs with ``gen_log``, the per-generation
    diagnostic records.
    """
    fn = _suite(dimension, suite_seed)[function]
    cfg = make_config(spec, seed)
    if spec.engine == "rdex":
        records = [] if gen_log else None
        trace = engine.run(fn, cfg, budget, checkpoint_every, log=records, algorithm=spec.label)
        return trace, records
    return baselines.run_baseline(fn, cfg, budget, checkpoint_every, algorithm=spec.label), None


@dataclass(frozen=True)
class ManifestEntry:
    algorithm: str
    function: str
    run: int
    seed: int
    path: str
    final: float

    def to_row(self) -> str:
        return "\t".join(
            (self.algorithm, self.function, str(self.run), str(self.seed), self.path, repr(self.final))
        )


def read_manifest(output_dir) -> List[ManifestEntry]:
    path = Path(output_dir) / MANIFEST
    if not path.is_file():
        raise MissingDataError(f"no manifest at {path}")
    lines = path.read_text().splitlines()
    if not lines or tuple(lines[0].split("\t")) != MANIFEST_COLUMNS:
        raise MissingDataError(f"manifest {path} has no valid header")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        cols = line.split("\t")
        if len(cols) != len(MANIFEST_COLUMNS):
            raise MissingDataError(f"{path}:{lineno}: malformed manifest row")
        a, f, r, s, p, final = cols
        entries.append(ManifestEntry(a, f, int(r), int(s), p, float(final)))
    return entries


def write_manifest(output_dir, entries) -> None:
    text = "\t".join(MANIFEST_COLUMNS) + "\n" + "".join(e.to_row() + "\n" for e in entries)
    path = Path(output_dir) / MANIFEST
    if path.is_file() and path.read_text() == text:
        return
    tmp = path.with_suffix(".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def default_threads() -> int:
    value = os.environ.get("RDEX_THREADS")
    return max(1, int(value)) if value else 1


def execute(plan: ExperimentPlan, output_dir, threads: Optional[int] = None,
            resume: bool = True, gen_log: bool = False) -> List[ManifestEntry]:
    """Run every missing cell of ``plan`` and return the complete manifest.

    With ``resume`` (the default), runs already listed in the manifest with
    their trace file on disk are skipped; otherwise every cell is recomputed.
    Results do not depend on ``threads``.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(output_dir, os.W_OK):
        raise PermissionError(f"output directory {output_dir} is not writable")
    threads = threads or default_threads()
    seeds = plan_seeds(plan)

    done: Dict[Tuple[str, str, int], ManifestEntry] = {}
    if resume and (output_dir / MANIFEST).is_file():
        for e in read_manifest(output_dir):
            if seeds.get((e.algorithm, e.function, e.run)) == e.seed and (output_dir / e.path).is_file():
                done[(e.algorithm, e.function, e.run)] = e

    order = [(a.label, f, r) for a, f, r in plan.cells()]
    specs = {a.label: a for a in plan.algorithms}
    todo = [key for key in order if key not in done]
    log.info("%d runs planned, %d already complete", len(order), len(order) - len(todo))

    def finish(key, result):
        trace, records = result
        label, fn, r = key
        rel = trace_path(label, fn, r)
        trace.save(output_dir / rel)
        if records is not None:
            log_path = output_dir / rel.replace("traces/", "logs/", 1).replace(".txt", ".log")
            log_path.parent.mkdir(parents=True, exist_ok=True)
            log_path.write_text("".join(rec.to_text() + "\n" for rec in records))
        done[key] = ManifestEntry(label, fn, r, seeds[key], rel, trace.final)
        write_manifest(output_dir, [done[k] for k in order if k in done])
        log.info("[%d/%d] %s %s run %d final=%.6g", len(done), len(order), label, fn, r, trace.final)

    args = lambda key: (  # noqa: E731
        specs[key[0]], key[1], seeds[key], plan.dimension, plan.suite_seed,
        plan.budget, plan.checkpoint_every, gen_log,
    )
    if threads == 1 or len(todo) <= 1:
        for key in todo:
            finish(key, run_cell(*args(key)))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(run_cell, *args(key)): key for key in todo}
            for fut in as_completed(futures):
                finish(futures[fut], fut.result())

    entries = [done[k] for k in order]
    write_manifest(output_dir, entries)
    return entries


def load_traces(output_dir) -> Dict[Tuple[str, str], List[RunTrace]]:
    """All traces listed in the manifest, grouped by (algorithm, function), in run order."""
    output_dir = Path(output_dir)
    entries = read_manifest(output_dir)
    if not entries:
        raise MissingDataError("manifest lists no runs")
    grouped: Dict[Tuple[str, str], List[Tuple[int, RunTrace]]] = {}
    for e in entries:
        path = output_dir / e.path
        if not path.is_file():
            raise MissingDataError(f"trace file missing: {path}")
        trace = RunTrace.load(path)
        trace.algorithm = e.algorithm
        grouped.setdefault((e.algorithm, e.function), []).append((e.run, trace))
    return {k: [t for _, t in sorted(v, key=lambda rt: rt[0])] for k, v in grouped.items()}
