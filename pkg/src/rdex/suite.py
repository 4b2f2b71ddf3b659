"""Bound-constrained test functions with shift/rotation transforms.

Every base function attains its minimum 0 at the origin of its (transformed)
argument, so ``f(x) - bias`` is the error to the known optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

DEFAULT_LOWER = -100.0
DEFAULT_UPPER = 100.0
SHIFT_RANGE = 80.0


@dataclass(frozen=True)
class SearchSpace:
    """Box ``lower <= x <= upper`` in ``dimension`` variables."""

    dimension: int
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dimension,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dimension,)).copy()
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not np.all(lower < upper):
            raise ValueError("lower bound must be strictly below upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, dimension: int, lower: float = DEFAULT_LOWER, upper: float = DEFAULT_UPPER):
        return cls(dimension, np.full(dimension, lower), np.full(dimension, upper))

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all((x >= self.lower) & (x <= self.upper)))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.lower + rng.random((n, self.dimension)) * (self.upper - self.lower)


# Base landscapes. All operate on the last axis so they accept (D,) or (N, D).

def sphere(z):
    return np.sum(z * z, axis=-1)


def ellipsoid(z):
    d = z.shape[-1]
    if d == 1:
        return np.sum(z * z, axis=-1)
    weights = 10.0 ** (6.0 * np.arange(d) / (d - 1))
    return np.sum(weights * z * z, axis=-1)


def rastrigin(z):
    d = z.shape[-1]
    return 10.0 * d + np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z), axis=-1)


def rosenbrock(z):
    # shifted by one so the optimum sits at the origin
    y = z + 1.0
    if y.shape[-1] == 1:
        return np.sum((y - 1.0) ** 2, axis=-1)
    head, tail = y[..., :-1], y[..., 1:]
    return np.sum(100.0 * (tail - head ** 2) ** 2 + (head - 1.0) ** 2, axis=-1)


def ackley(z):
    d = z.shape[-1]
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z * z, axis=-1) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d)
    # clamp tiny negative round-off near the optimum
    return np.maximum(a + b + 20.0 + np.e, 0.0)


def griewank(z):
    d = z.shape[-1]
    i = np.sqrt(np.arange(1, d + 1))
    return 1.0 + np.sum(z * z, axis=-1) / 4000.0 - np.prod(np.cos(z / i), axis=-1)


def zakharov(z):
    d = z.shape[-1]
    s = np.sum(0.5 * np.arange(1, d + 1) * z, axis=-1)
    return np.sum(z * z, axis=-1) + s ** 2 + s ** 4


def levy(z):
    w = 1.0 + z / 4.0
    head = w[..., :-1]
    last = w[..., -1]
    term1 = np.sin(np.pi * w[..., 0]) ** 2
    term2 = np.sum((head - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * head + 1.0) ** 2), axis=-1)
    term3 = (last - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * last) ** 2)
    return term1 + term2 + term3


def schwefel12(z):
    return np.sum(np.cumsum(z, axis=-1) ** 2, axis=-1)


def composite(z):
    """Equal-weight blend of Rastrigin and Griewank on the same rotated input."""
    return 0.5 * rastrigin(z) + 0.5 * griewank(z)


BASES: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sphere": sphere,
    "ellipsoid": ellipsoid,
    "rastrigin": rastrigin,
    "rosenbrock": rosenbrock,
    "ackley": ackley,
    "griewank": griewank,
    "zakharov": zakharov,
    "levy": levy,
    "schwefel12": schwefel12,
    "composite": composite,
}

UNIMODAL = frozenset({"sphere", "ellipsoid", "zakharov", "schwefel12"})


@dataclass(frozen=True, eq=False)
class BenchmarkFunction:
    """``f(x) = base(R (x - shift)) + bias`` on a box.

    Calling the function on an ``(N, D)`` array evaluates all rows at once.
    """

    id: str
    space: SearchSpace
    base: str
    shift: Optional[np.ndarray] = None
    rotation: Optional[np.ndarray] = None
    bias: float = 0.0
    _fn: Callable = field(init=False, repr=False)

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base function {self.base!r}")
        d = self.space.dimension
        if self.shift is not None:
            shift = np.array(self.shift, dtype=float)
            if shift.shape != (d,):
                raise ValueError("shift must have length D")
            shift.flags.writeable = False
            object.__setattr__(self, "shift", shift)
        if self.rotation is not None:
            rot = np.array(self.rotation, dtype=float)
            if rot.shape != (d, d):
                raise ValueError("rotation must be D x D")
            if np.max(np.abs(rot.T @ rot - np.eye(d))) > 1e-9:
                raise ValueError("rotation is not orthogonal")
            rot.flags.writeable = False
            object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "_fn", BASES[self.base])

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def transform(self, x: np.ndarray) -> np.ndarray:
        z = x if self.shift is None else x - self.shift
        if self.rotation is not None:
            z = z @ self.rotation.T
        return z

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dimension,):
            raise ValueError(f"expected trailing dimension {self.dimension}, got shape {x.shape}")
        return self._fn(self.transform(x)) + self.bias

    @property
    def optimum(self) -> np.ndarray:
        return np.zeros(self.dimension) if self.shift is None else self.shift.copy()


def evaluate(fn: BenchmarkFunction, x) -> float:
    """Objective value at a single point; bounds are not checked."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != fn.dimension:
        raise ValueError(f"point must have shape ({fn.dimension},), got {x.shape}")
    return float(fn(x))


def random_rotation(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from a QR factorisation."""
    q, r = np.linalg.qr(rng.standard_normal((dimension, dimension)))
    return q * np.sign(np.diag(r))


# (base, rotated) for each member of the default suite, in order: three
# unimodal then seven multimodal, with rastrigin in plain and rotated form
DEFAULT_LAYOUT = (
    ("sphere", False),
    ("ellipsoid", True),
    ("zakharov", True),
    ("rosenbrock", True),
    ("rastrigin", False),
    ("rastrigin", True),
    ("ackley", False),
    ("griewank", True),
    ("levy", True),
    ("composite", True),
)


def default_suite(dimension: int, seed: int = 1) -> List[BenchmarkFunction]:
    """Ten shifted (and mostly rotated) functions on ``[-100, 100]^D``.

    Ids are ``f<k>_<base>`` with an ``r`` suffix on rotated members.
    """
    if dimension < 2:
        raise ValueError("default suite needs dimension >= 2")
    rng = np.random.default_rng(seed)
    space = SearchSpace.box(dimension)
    suite = []
    for k, (base, rotated) in enumerate(DEFAULT_LAYOUT, start=1):
        shift = rng.uniform(-SHIFT_RANGE, SHIFT_RANGE, dimension)
        rotation = random_rotation(dimension, rng) if rotated else None
        suite.append(
            BenchmarkFunction(
                id=f"f{k:02d}_{base}" + ("_r" if rotated else ""),
                space=space,
                base=base,
                shift=shift,
                rotation=rotation,
                bias=100.0 * k,
            )
        )
    return suite


def find_function(suite, function_id: str) -> BenchmarkFunction:
    for fn in suite:
        if fn.id == function_id:
            return fn
    raise KeyError(function_id)


# Suite manifest: line-oriented key=value blocks separated by blank lines,
# with shift/rotation arrays in sibling text files.

def save_suite(suite, directory, seed: Optional[int] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blocks = []
    for fn in suite:
        lines = [
            f"id={fn.id}",
            f"base={fn.base}",
            f"dimension={fn.dimension}",
            "lower=" + " ".join(repr(float(v)) for v in fn.space.lower),
            "upper=" + " ".join(repr(float(v)) for v in fn.space.upper),
            f"bias={fn.bias!r}",
        ]
        if seed is not None:
            lines.append(f"seed={seed}")
        if fn.shift is not None:
            name = f"{fn.id}.shift.txt"
            np.savetxt(directory / name, fn.shift[None, :], fmt="%.17g")
            lines.append(f"shift={name}")
        if fn.rotation is not None:
            name = f"{fn.id}.rotation.txt"
            np.savetxt(directory / name, fn.rotation, fmt="%.17g")
            lines.append(f"rotation={name}")
        blocks.append("\n".join(lines))
    path = directory / "suite.txt"
    path.write_text("\n\n".join(blocks) + "\n")
    return path


def load_suite(directory) -> List[BenchmarkFunction]:
    directory = Path(directory)
    text = (directory / "suite.txt").read_text()
    suite = []
    for block in text.strip().split("\n\n"):
        kv = dict(line.split("=", 1) for line in block.strip().splitlines())
        d = int(kv["dimension"])
        space = SearchSpace(
            d,
            np.array(kv["lower"].split(), dtype=float),
            np.array(kv["upper"].split(), dtype=float),
        )
        shift = np.loadtxt(directory / kv["shift"], ndmin=1) if "shift" in kv else None
        rotation = np.loadtxt(directory / kv["rotation"], ndmin=2) if "rotation" in kv else None
        suite.append(
            BenchmarkFunction(kv["id"], space, kv["base"], shift, rotation, float(kv["bias"]))
        )
    return suite
