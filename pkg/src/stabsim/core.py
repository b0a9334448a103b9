"""Shared value types, seeded random streams and execution accounting."""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

RNG_FAMILY = "numpy.Philox(SeedSequence(master_seed, spawn_key=stream_path))"


@dataclass(frozen=True, eq=False)
class FeatureRanking:
    """A total order over feature indices; ``order[0]`` is the best feature."""

    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        n = order.shape[0]
        if order.ndim != 1 or n == 0:
            raise ValueError("ranking must be a non-empty 1-d sequence")
        seen = np.zeros(n, dtype=bool)
        if order.min() < 0 or order.max() >= n:
            raise ValueError("ranking contains an out-of-range feature index")
        seen[order] = True
        if not seen.all():
            raise ValueError("ranking is not a permutation")
        order.flags.writeable = False
        object.__setattr__(self, "order", order)

    @property
    def n_feature(self) -> int:
        return int(self.order.shape[0])

    def top(self, n_target: int) -> "FeatureSubset":
        if not 0 <= n_target <= self.n_feature:
            raise ValueError(f"n_target must lie in [0, {self.n_feature}], got {n_target}")
        return FeatureSubset(frozenset(int(i) for i in self.order[:n_target]), self.n_feature)

    def positions(self) -> np.ndarray:
        """1-based rank position of every feature."""
        pos = np.empty(self.n_feature, dtype=np.int64)
        pos[self.order] = np.arange(1, self.n_feature + 1)
        return pos

    def __eq__(self, other):
        return isinstance(other, FeatureRanking) and np.array_equal(self.order, other.order)

    def __hash__(self):
        return hash(self.order.tobytes())

    def __len__(self):
        return self.n_feature


@dataclass(frozen=True)
class FeatureSubset:
    members: frozenset
    n_feature: int

    def __post_init__(self):
        members = frozenset(int(i) for i in self.members)
        if any(i < 0 or i >= self.n_feature for i in members):
            raise ValueError("subset member outside [0, n_feature)")
        object.__setattr__(self, "members", members)

    @property
    def n_target(self) -> int:
        return len(self.members)

    def sorted(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class SimulatorParams:
    n_feature: int
    n_target: int
    n_useful: int
    p: float

    def __post_init__(self):
        if not 0 < self.n_target <= self.n_useful <= self.n_feature:
            raise ValueError(
                "need 0 < n_target <= n_useful <= n_feature, got "
                f"n_target={self.n_target}, n_useful={self.n_useful}, n_feature={self.n_feature}"
            )
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def with_(self, **changes) -> "SimulatorParams":
        values = {
            "n_feature": self.n_feature,
            "n_target": self.n_target,
            "n_useful": self.n_useful,
            "p": self.p,
        }
        values.update(changes)
        return SimulatorParams(**values)


class RngStream:
    """Single-owner random stream addressed by ``(master_seed, path)``.

    The path starts with the stream id; :meth:`child` appends one more
    component, so any layout of sub-streams is reproducible no matter which
    worker consumes it or in which order.
    """

    def __init__(self, master_seed: int, path: Sequence[int]):
        self.master_seed = int(master_seed)
        self.path = tuple(int(k) for k in path)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.Philox(seq))

    @property
    def stream_id(self) -> int:
        return self.path[0]

    def child(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + (int(index),))

    # thin pass-throughs for the draws used across the package
    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def permutation(self, x):
        return self.generator.permutation(x)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, path={self.path})"


def make_stream(master_seed: int, stream_id: int) -> RngStream:
    return RngStream(master_seed, (stream_id,))


def sample_without_replacement(pool: Iterable[int], k: int, rng: RngStream) -> np.ndarray:
    """Draw ``k`` distinct members of ``pool`` uniformly, in draw order."""
    pool = np.fromiter(pool, dtype=np.int64) if not isinstance(pool, np.ndarray) else pool
    if k > pool.shape[0]:
        raise ValueError(f"cannot draw {k} items from a pool of {pool.shape[0]}")
    if k < 0:
        raise ValueError("k must be non-negative")
    return rng.generator.choice(pool, size=k, replace=False, shuffle=True)


@dataclass
class ExecutionCounter:
    """Thread-safe tally of selector invocations."""

    real_runs: int = 0
    simulated_runs: int = 0
    uniform_runs: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add_real(self, n: int = 1) -> None:
        with self._lock:
            self.real_runs += n

    def add_simulated(self, n: int = 1) -> None:
        with self._lock:
            self.simulated_runs += n

    def add_uniform(self, n: int = 1) -> None:
        with self._lock:
            self.uniform_runs += n

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "real_runs": self.real_runs,
                "simulated_runs": self.simulated_runs,
                "uniform_runs": self.uniform_runs,
            }


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Order-preserving map; results never depend on ``workers``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
