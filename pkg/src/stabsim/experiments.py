"""Drivers behind the CLI: stability sweeps, timing benchmarks, n_target scans."""

from __future__ import annotations

import time
from dataclasses import replace
from typing import Sequence

import numpy as np

from .core import ExecutionCounter, RngStream, SimulatorParams
from .data import Dataset, leave_one_out_splits
from .ensemble import EnsembleConfig, rank_sums, run_real_ensemble, top_by_sums
from .estimation import simulated_stability
from .forest import ForestConfig, loo_accuracy
from .selectors import ForestSelector
from .stability import estimate_stability


def stability_sweep(
    base: SimulatorParams,
    ps: Sequence[float],
    m_ensembles: Sequence[int],
    m_stability: int,
    rng: RngStream,
    workers: int = 1,
) -> list:
    """Simulated stability for every (p, m_ensemble); all cells replay ``rng``.

    Returns rows ``(p, m_ensemble, m_stability, J)``.
    """
    rows = []
    for p in ps:
        params = base.with_(p=p)
        for m in m_ensembles:
            rows.append((float(p), int(m), int(m_stability), simulated_stability(params, m, m_stability, rng, workers=workers)))
    return rows


def real_ensemble_stability(
    dataset: Dataset,
    fconfig: ForestConfig,
    m_ensemble: int,
    n_target: int,
    m_stability: int,
    rng: RngStream,
    counter: ExecutionCounter,
    workers: int = 1,
) -> float:
    """Naive stability of the real ensemble: ``m_stability * m_ensemble`` forest runs."""
    rows = np.arange(dataset.n_sample)
    config = EnsembleConfig(m_ensemble, n_target)
    run = estimate_stability(
        lambda r: run_real_ensemble(dataset, rows, fconfig, config, r, counter), m_stability, rng, workers=workers
    )
    return run.J


def bench(
    dataset: Dataset,
    fconfig: ForestConfig,
    params: SimulatorParams,
    m_ensembles: Sequence[int],
    m_stability: int,
    rng: RngStream,
    workers: int = 1,
    modes: Sequence[str] = ("real", "simulated"),
) -> list:
    """Wall-clock seconds of each stability computation; rows ``(mode, m_ensemble, m_stability, seconds, workers)``.

    Real mode only runs the feature selectors (no predictor training).
    """
    out = []
    for mode in modes:
        for m in m_ensembles:
            start = time.perf_counter()
            if mode == "real":
                real_ensemble_stability(dataset, fconfig, m, params.n_target, m_stability, rng, ExecutionCounter(), workers)
            elif mode == "simulated":
                simulated_stability(params, m, m_stability, rng, workers=workers)
            else:
                raise ValueError(f"unknown bench mode {mode!r}")
            out.append((mode, int(m), int(m_stability), time.perf_counter() - start, int(workers)))
    return out


def linear_fit_r2(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0


def ntarget_scan(
    dataset: Dataset,
    n_targets: Sequence[int],
    n_trees: Sequence[int],
    m_ensemble: int,
    fconfig: ForestConfig,
    rng: RngStream,
) -> list:
    """Leave-one-out accuracy per (n_target, n_tree).

    For every split the real ensemble ranks features on train1; the top
    ``n_target`` of that ranking feed a forest trained on train2 and scored
    on the held-out row. Rows ``(n_target, n_tree, accuracy)``.
    """
    splits = leave_one_out_splits(dataset, rng.child(0))
    position = {id(s): i for i, s in enumerate(splits)}
    out = []
    for ti, n_tree in enumerate(n_trees):
        cfg = replace(fconfig, n_tree=n_tree)
        stream = rng.child(1).child(ti)
        sums = []
        for si, split in enumerate(splits):
            selector = ForestSelector(dataset, split.train1, cfg)
            weak = stream.child(0).child(si)
            sums.append(rank_sums([selector.rank(weak.child(i)) for i in range(m_ensemble)]))
        for n_target in n_targets:

            def chosen(split, _rng, _n=n_target):
                return top_by_sums(sums[position[id(split)]], _n)

            acc = loo_accuracy(dataset, chosen, cfg, stream.child(1).child(n_target), splits=splits)
            out.append((int(n_target), int(n_tree), float(acc)))
    return out
