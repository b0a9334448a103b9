"""The uniform, simulated and random-forest feature selectors.

All three produce a full :class:`FeatureRanking`. The selector classes at
the bottom give them a common ``rank(rng)`` call so the estimation code can
treat a forest and a simulated stand-in for it interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import ExecutionCounter, FeatureRanking, RngStream, SimulatorParams, sample_without_replacement
from .data import Dataset
from .forest import ForestConfig, fit_forest, gini_importance


def sample_s_m(params: SimulatorParams, rng: RngStream) -> np.ndarray:
    """Uniform ``n_target``-subset of the useful pool ``{0, ..., n_useful-1}``."""
    return sample_without_replacement(np.arange(params.n_useful), params.n_target, rng)


def simulated_rank(
    params: SimulatorParams,
    s_m,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
) -> FeatureRanking:
    """Rank every feature by repeated p-coin draws from S_m or its complement.

    Heads takes a uniformly chosen remaining member of ``s_m``, tails a
    uniformly chosen remaining non-member; a draw aimed at an empty pool is
    served by the other pool. Pre-shuffling both pools and consuming them in
    order is the same process, which is what the kernel does.
    """
    s_m = np.asarray(s_m, dtype=np.int64)
    if s_m.shape[0] != params.n_target:
        raise ValueError(f"|S_m| = {s_m.shape[0]} but n_target = {params.n_target}")
    mask = np.ones(params.n_feature, dtype=bool)
    mask[s_m] = False
    members = rng.permutation(np.sort(s_m))
    others = rng.permutation(np.flatnonzero(mask).astype(np.int64))
    heads = rng.random(params.n_feature) < params.p
    order = kernels.interleave_ranking(members, others, heads)
    if counter is not None:
        counter.add_simulated()
    return FeatureRanking(order)


def uniform_rank(n_feature: int, rng: RngStream, counter: Optional[ExecutionCounter] = None) -> FeatureRanking:
    if n_feature < 1:
        raise ValueError("n_feature must be >= 1")
    if counter is not None:
        counter.add_uniform()
    return FeatureRanking(rng.permutation(n_feature))


def real_rank(
    dataset: Dataset,
    rows,
    config: ForestConfig,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
) -> FeatureRanking:
    """Fit a forest and sort features by descending Gini importance (ties: lower index).

    With ``subsample_fraction < 1`` the forest sees a random row subset drawn
    without replacement first (bagging-style weak selector).
    """
    rows = np.asarray(rows, dtype=np.int64)
    if config.subsample_fraction < 1.0:
        k = max(config.min_samples_split, int(round(config.subsample_fraction * rows.shape[0])))
        rows = np.sort(sample_without_replacement(rows, min(k, rows.shape[0]), rng.child(1)))
    forest = fit_forest(dataset, rows, config, rng.child(0))
    imp = gini_importance(forest, dataset.n_feature)
    if counter is not None:
        counter.add_real()
    return FeatureRanking(np.argsort(-imp, kind="stable"))


# -- common selector surface -------------------------------------------------


@dataclass
class UniformSelector:
    n_feature: int
    counter: Optional[ExecutionCounter] = None

    def rank(self, rng: RngStream) -> FeatureRanking:
        return uniform_rank(self.n_feature, rng, self.counter)


@dataclass
class SimulatedSelector:
    """A fresh simulated weak selector per call: new S_m, then a ranking.

    With ``as_real`` the runs are booked as real-selector runs, which is how a
    simulated ground truth stands in for an expensive selector.
    """

    params: SimulatorParams
    counter: Optional[ExecutionCounter] = None
    as_real: bool = False

    @property
    def n_feature(self) -> int:
        return self.params.n_feature

    def rank(self, rng: RngStream) -> FeatureRanking:
        s_m = sample_s_m(self.params, rng.child(0))
        ranking = simulated_rank(self.params, s_m, rng.child(1))
        if self.counter is not None:
            (self.counter.add_real if self.as_real else self.counter.add_simulated)()
        return ranking


@dataclass
class ForestSelector:
    dataset: Dataset
    rows: np.ndarray
    config: ForestConfig
    counter: Optional[ExecutionCounter] = None

    @property
    def n_feature(self) -> int:
        return self.dataset.n_feature

    def rank(self, rng: RngStream) -> FeatureRanking:
        return real_rank(self.dataset, self.rows, self.config, rng, self.counter)
