"""Best-so-far checkpoint traces shared by every optimizer."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEADER_FIELDS = ("algorithm", "function", "seed", "dimension", "budget", "checkpoint_every")


@dataclass
class RunTrace:
    """Error to the known optimum, recorded every ``checkpoint_every`` evaluations."""

    algorithm: str
    function: str
    seed: int
    checkpoints: np.ndarray
    dimension: int = 0
    budget: int = 0
    checkpoint_every: int = 0
    evaluations: int = 0

    @property
    def final(self) -> float:
        return float(self.checkpoints[-1])

    def __len__(self):
        return len(self.checkpoints)

    def to_text(self) -> str:
        head = ",".join(
            str(v)
            for v in (
                self.algorithm,
                self.function,
                self.seed,
                self.dimension,
                self.budget,
                self.checkpoint_every,
            )
        )
        body = "\n".join(repr(float(v)) for v in self.checkpoints)
        return head + "\n" + body + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunTrace":
        lines = text.strip().splitlines()
        parts = lines[0].split(",")
        if len(parts) != len(HEADER_FIELDS):
            raise ValueError(f"bad trace header: {lines[0]!r}")
        algorithm, function, seed, dimension, budget, every = parts
        values = np.array([float(v) for v in lines[1:]])
        return cls(
            algorithm,
            function,
            int(seed),
            values,
            int(dimension),
            int(budget),
            int(every),
            int(budget),
        )

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "RunTrace":
        return cls.from_text(Path(path).read_text())


class TraceRecorder:
    """Tracks evaluations in call order and fills the checkpoint array.

    ``observe`` must receive every batch of objective values, in evaluation
    order, including the initial population.
    """

    def __init__(self, budget: int, checkpoint_every: int, offset: float = 0.0):
        if checkpoint_every < 1 or budget % checkpoint_every:
            raise ValueError("budget must be a positive multiple of checkpoint_every")
        self.budget = budget
        self.every = checkpoint_every
        self.offset = offset
        self.nfe = 0
        self.best = np.inf
        self.values = np.full(budget // checkpoint_every, np.nan)

    @property
    def remaining(self) -> int:
        return self.budget - self.nfe

    def observe(self, fitness) -> None:
        fitness = np.asarray(fitness, dtype=float).ravel()
        n = fitness.size
        if n == 0:
            return
        if self.nfe + n > self.budget:
            raise RuntimeError("evaluation budget exceeded")
        running = np.minimum.accumulate(np.minimum(fitness, self.best))
        first = (self.nfe // self.every + 1) * self.every
        marks = np.arange(first, self.nfe + n + 1, self.every)
        if marks.size:
            self.values[marks // self.every - 1] = running[marks - self.nfe - 1] - self.offset
        self.best = running[-1]
        self.nfe += n

    def finish(self, algorithm: str, function: str, seed: int, dimension: int) -> RunTrace:
        if self.nfe != self.budget:
            raise RuntimeError(f"run stopped at {self.nfe} of {self.budget} evaluations")
        return RunTrace(
            algorithm,
            function,
            seed,
            self.values.copy(),
            dimension,
            self.budget,
            self.every,
            self.nfe,
        )
