"""Mean-rank aggregation of weak-selector rankings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ExecutionCounter, FeatureRanking, FeatureSubset, RngStream, SimulatorParams
from .data import Dataset
from .forest import ForestConfig
from .selectors import ForestSelector, SimulatedSelector


@dataclass(frozen=True)
class EnsembleConfig:
    m_ensemble: int
    n_target: int
    aggregation: str = "mean_rank"

    def __post_init__(self):
        if self.m_ensemble < 1:
            raise ValueError("m_ensemble must be >= 1")
        if self.n_target < 1:
            raise ValueError("n_target must be >= 1")
        if self.aggregation != "mean_rank":
            raise ValueError(f"unsupported aggregation {self.aggregation!r}")


def rank_sums(rankings: Sequence[FeatureRanking]) -> np.ndarray:
    """Sum of 1-based positions per feature (mean rank times the ranking count)."""
    if not rankings:
        raise ValueError("need at least one ranking")
    n = rankings[0].n_feature
    total = np.zeros(n, dtype=np.int64)
    steps = np.arange(1, n + 1, dtype=np.int64)
    for r in rankings:
        if r.n_feature != n:
            raise ValueError(f"inconsistent ranking lengths: {r.n_feature} vs {n}")
        total[r.order] += steps
    return total


def top_by_sums(sums: np.ndarray, n_target: int) -> FeatureSubset:
    if n_target > sums.shape[0]:
        raise ValueError(f"n_target={n_target} exceeds n_feature={sums.shape[0]}")
    # stable sort: equal mean rank -> lower feature index first
    best = np.argsort(sums, kind="stable")[:n_target]
    return FeatureSubset(frozenset(best.tolist()), sums.shape[0])


def mean_rank_aggregate(rankings: Sequence[FeatureRanking], n_target: int) -> FeatureSubset:
    """The ``n_target`` features with the smallest mean 1-based rank."""
    # integer sums order features exactly as the means do
    return top_by_sums(rank_sums(rankings), n_target)


def run_ensemble(selector, config: EnsembleConfig, rng: RngStream) -> FeatureSubset:
    """Aggregate ``config.m_ensemble`` weak runs of ``selector``; weak run i uses ``rng.child(i)``."""
    rankings = [selector.rank(rng.child(i)) for i in range(config.m_ensemble)]
    return mean_rank_aggregate(rankings, config.n_target)


def run_simulated_ensemble(
    params: SimulatorParams,
    config: EnsembleConfig,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
) -> FeatureSubset:
    if config.n_target != params.n_target:
        raise ValueError("ensemble and simulator disagree on n_target")
    return run_ensemble(SimulatedSelector(params, counter), config, rng)


def run_real_ensemble(
    dataset: Dataset,
    rows,
    fconfig: ForestConfig,
    config: EnsembleConfig,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
) -> FeatureSubset:
    selector = ForestSelector(dataset, np.asarray(rows, dtype=np.int64), fconfig, counter)
    return run_ensemble(selector, config, rng)
