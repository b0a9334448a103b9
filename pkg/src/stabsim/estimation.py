"""Calibrating the simulated selector against a real one.

The pipeline measures how often each feature lands in the real selector's
top ``n_target`` (against a uniform-selector threshold) to get ``n_useful``,
matches single-selector stability over a grid of ``p``, then re-runs the
``n_useful`` estimator on the calibrated simulator as a consistency check.
Only two steps ever touch the real selector.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ExecutionCounter, RngStream, SimulatorParams
from .ensemble import EnsembleConfig, run_ensemble
from .selectors import SimulatedSelector, UniformSelector
from .stability import DEFAULT_M_STABILITY, estimate_stability

DEFAULT_P_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_CURVE_M_ENSEMBLE = (1, 5, 10, 20, 30, 40, 50)


# -- n_useful -------------------------------------------------------------------


def collect_counts(selector, m_ensemble: int, n_target: int, rng: RngStream) -> np.ndarray:
    """How many of ``m_ensemble`` runs put each feature in their top ``n_target``."""
    if m_ensemble < 1:
        raise ValueError("m_ensemble must be >= 1")
    counts = np.zeros(selector.n_feature, dtype=np.int64)
    for i in range(m_ensemble):
        counts[selector.rank(rng.child(i)).order[:n_target]] += 1
    return counts


def uniform_threshold(
    n_feature: int,
    n_target: int,
    m_ensemble: int,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
) -> int:
    """Largest per-feature top-``n_target`` count over ``m_ensemble`` uniform runs."""
    counts = collect_counts(UniformSelector(n_feature, counter), m_ensemble, n_target, rng)
    return int(counts.max())


def uniform_threshold_stats(n_feature: int, n_target: int, m_ensemble: int, reps: int, rng: RngStream):
    """Repeat :func:`uniform_threshold` ``reps`` times; returns (values, mean, std)."""
    values = np.array([uniform_threshold(n_feature, n_target, m_ensemble, rng.child(r)) for r in range(reps)])
    return values, float(values.mean()), float(values.std())


def estimate_n_useful(counts, t_uniform: int) -> int:
    return int(np.count_nonzero(np.asarray(counts) > t_uniform))


def simulation_n_useful(n_useful: int, n_feature: int, n_target: int) -> int:
    """Clamp an estimate into the simulator's valid range [n_target, n_feature]."""
    return int(min(max(n_useful, n_target), n_feature))


# -- p --------------------------------------------------------------------------


def simulated_stability(
    params: SimulatorParams,
    m_ensemble: int,
    m_stability: int,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
    workers: int = 1,
) -> float:
    selector = SimulatedSelector(params, counter)
    config = EnsembleConfig(m_ensemble, params.n_target)
    run = estimate_stability(lambda r: run_ensemble(selector, config, r), m_stability, rng, workers=workers)
    return run.J


def estimate_p(
    stability_target: float,
    n_useful: int,
    base: SimulatorParams,
    grid: Sequence[float] = DEFAULT_P_GRID,
    m_ensemble: int = 1,
    m_stability: int = DEFAULT_M_STABILITY,
    rng: Optional[RngStream] = None,
    counter: Optional[ExecutionCounter] = None,
    workers: int = 1,
    common_random_numbers: bool = True,
):
    """Grid value of p whose simulated stability is closest to ``stability_target``.

    Returns ``(p_hat, [(p, J), ...])``. Ties go to the smaller p. With
    ``common_random_numbers`` every grid point replays the same stream, so
    differences between points come from p alone.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty p grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("p grid must be sorted ascending")
    params = base.with_(n_useful=n_useful)
    results = []
    for g, p in enumerate(grid):
        stream = rng.child(0) if common_random_numbers else rng.child(g)
        results.append((p, simulated_stability(params.with_(p=p), m_ensemble, m_stability, stream, counter, workers)))
    best_p, best_gap = grid[0], np.inf
    for p, j in results:
        gap = abs(j - stability_target)
        if gap < best_gap:
            best_p, best_gap = p, gap
    return best_p, results


@dataclass
class BinarySearchResult:
    p_hat: float
    converged: bool
    evaluations: list = field(default_factory=list)  # (p, J) in evaluation order


def estimate_p_binary_search(
    stability_target: float,
    n_useful: int,
    base: SimulatorParams,
    tolerance: float = 0.02,
    max_iter: int = 8,
    m_ensemble: int = 1,
    m_stability: int = DEFAULT_M_STABILITY,
    rng: Optional[RngStream] = None,
    counter: Optional[ExecutionCounter] = None,
    workers: int = 1,
) -> BinarySearchResult:
    """Bisection on p in [0, 1] using that simulated stability rises with p.

    Every evaluation replays the same stream. Targets outside
    ``[J(0), J(1)]`` return the nearer endpoint unconverged.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    params = base.with_(n_useful=n_useful)
    evals = []

    def J(p):
        j = simulated_stability(params.with_(p=p), m_ensemble, m_stability, rng.child(0), counter, workers)
        evals.append((p, j))
        return j

    j_lo = J(0.0)
    if abs(j_lo - stability_target) <= tolerance:
        return BinarySearchResult(0.0, True, evals)
    if stability_target < j_lo:
        return BinarySearchResult(0.0, False, evals)
    j_hi = J(1.0)
    if abs(j_hi - stability_target) <= tolerance:
        return BinarySearchResult(1.0, True, evals)
    if stability_target > j_hi:
        return BinarySearchResult(1.0, False, evals)
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = (lo + hi) / 2.0
        j = J(mid)
        if abs(j - stability_target) <= tolerance:
            return BinarySearchResult(mid, True, evals)
        if j < stability_target:
            lo = mid
        else:
            hi = mid
    p_best = min(evals, key=lambda e: (abs(e[1] - stability_target), e[0]))[0]
    return BinarySearchResult(p_best, False, evals)


# -- verification -----------------------------------------------------------------


def verify_n_useful(
    n_useful: int,
    p: float,
    base: SimulatorParams,
    m_ensemble: int,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
) -> int:
    """Re-run the n_useful estimator with the simulator ``(n_useful, p)`` as the selector."""
    n_sim = simulation_n_useful(n_useful, base.n_feature, base.n_target)
    params = base.with_(n_useful=n_sim, p=p)
    t = uniform_threshold(base.n_feature, base.n_target, m_ensemble, rng.child(0), counter)
    counts = collect_counts(SimulatedSelector(params, counter), m_ensemble, base.n_target, rng.child(1))
    return estimate_n_useful(counts, t)


def fixed_point_iterate(
    start: int,
    p: float,
    base: SimulatorParams,
    m_ensemble: int,
    rng: RngStream,
    max_iter: int = 1,
    slack: Optional[int] = None,
    counter: Optional[ExecutionCounter] = None,
):
    """Iterate ``n <- verify_n_useful(n, p)`` until it moves by at most ``slack``.

    Iteration k uses ``rng.child(k)``. ``slack`` defaults to 0 for a single
    pass and 2 otherwise. Returns ``(n_final, trajectory)``.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if slack is None:
        slack = 0 if max_iter == 1 else 2
    n = int(start)
    trajectory = []
    for k in range(max_iter):
        nv = verify_n_useful(n, p, base, m_ensemble, rng.child(k), counter)
        trajectory.append(nv)
        moved = abs(nv - n)
        n = nv
        if moved <= slack:
            break
    return n, trajectory


# -- full pipeline ------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationConfig:
    n_target: int
    m_ensemble: int = 50
    m_stability: int = DEFAULT_M_STABILITY
    p_grid: tuple = DEFAULT_P_GRID
    p_search: str = "grid"  # or "binary"
    bs_tolerance: float = 0.02
    bs_max_iter: int = 8
    target_m_ensemble: int = 1
    t_reps: int = 1
    fp_max_iter: int = 1
    fp_slack: Optional[int] = None
    curve_m_ensemble: tuple = DEFAULT_CURVE_M_ENSEMBLE
    curve_all_p: bool = False

    def __post_init__(self):
        if self.m_ensemble < 1 or self.m_stability < 2:
            raise ValueError("need m_ensemble >= 1 and m_stability >= 2")
        if self.p_search not in ("grid", "binary"):
            raise ValueError(f"unknown p_search {self.p_search!r}")
        if self.target_m_ensemble < 1 or self.t_reps < 1:
            raise ValueError("target_m_ensemble and t_reps must be >= 1")

    @property
    def expected_real_runs(self) -> int:
        return self.m_ensemble + self.m_stability * self.target_m_ensemble

    def simulated_run_constant(self) -> float:
        """c in ``simulated_runs <= m_stability * (k_p + m_ensemble) * c``."""
        return self.target_m_ensemble + self.fp_max_iter + sum(self.curve_m_ensemble) * (
            len(self.p_grid) if self.curve_all_p else 1
        ) / self.m_ensemble

    def k_p(self) -> int:
        return len(self.p_grid) if self.p_search == "grid" else self.bs_max_iter + 2


@dataclass
class CalibrationReport:
    t_uniform: int
    t_uniform_mean: float
    t_uniform_std: float
    n_useful_hat: int
    n_useful_sim: int
    p_hat: float
    p_converged: bool
    n_useful_v: int
    fixed_point_trajectory: list
    stability_target: float
    grid: list  # [(p, J)]
    curve: list  # [(p, m_ensemble, J)]
    counts: list
    execution_counts: dict
    config: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = [{"p": float(p), "J": float(j)} for p, j in self.grid]
        d["curve"] = [{"p": float(p), "m_ensemble": int(m), "J": float(j)} for p, m, j in self.curve]
        return d


def full_calibration(
    real_selector,
    config: CalibrationConfig,
    rng: RngStream,
    counter: ExecutionCounter,
    workers: int = 1,
) -> CalibrationReport:
    """Threshold, counts, n_useful, stability target, p, verification, curve.

    ``real_selector`` must book its own runs on ``counter.real_runs`` (the
    forest selector and ``SimulatedSelector(as_real=True)`` both do). The
    real selector is run exactly ``m_ensemble + m_stability *
    target_m_ensemble`` times; everything after the stability target is
    simulation only.
    """
    n_f, n_t = real_selector.n_feature, config.n_target
    real_before = counter.real_runs

    t_uniform = uniform_threshold(n_f, n_t, config.m_ensemble, rng.child(0), counter)
    if config.t_reps > 1:
        _, t_mean, t_std = uniform_threshold_stats(n_f, n_t, config.m_ensemble, config.t_reps, rng.child(6))
    else:
        t_mean, t_std = float(t_uniform), 0.0

    counts = collect_counts(real_selector, config.m_ensemble, n_t, rng.child(1))
    n_hat = estimate_n_useful(counts, t_uniform)

    target_cfg = EnsembleConfig(config.target_m_ensemble, n_t)
    target = estimate_stability(
        lambda r: run_ensemble(real_selector, target_cfg, r), config.m_stability, rng.child(2), workers=workers
    ).J

    n_sim = simulation_n_useful(n_hat, n_f, n_t)
    base = SimulatorParams(n_f, n_t, n_sim, 0.5)
    if config.p_search == "grid":
        p_hat, grid = estimate_p(
            target, n_sim, base, config.p_grid, config.target_m_ensemble, config.m_stability,
            rng.child(3), counter, workers,
        )
        converged = True
    else:
        res = estimate_p_binary_search(
            target, n_sim, base, config.bs_tolerance, config.bs_max_iter, config.target_m_ensemble,
            config.m_stability, rng.child(3), counter, workers,
        )
        p_hat, grid, converged = res.p_hat, res.evaluations, res.converged

    n_v, trajectory = fixed_point_iterate(
        n_sim, p_hat, base, config.m_ensemble, rng.child(4), config.fp_max_iter, config.fp_slack, counter
    )

    curve = []
    curve_ps = list(config.p_grid) if config.curve_all_p else [p_hat]
    params = base.with_(n_useful=n_sim)
    for p in curve_ps:
        for m in config.curve_m_ensemble:
            j = simulated_stability(params.with_(p=p), m, config.m_stability, rng.child(5), counter, workers)
            curve.append((p, m, j))

    real_runs = counter.real_runs - real_before
    if real_runs != config.expected_real_runs:
        raise AssertionError(f"real selector ran {real_runs} times, expected {config.expected_real_runs}")

    return CalibrationReport(
        t_uniform=t_uniform,
        t_uniform_mean=t_mean,
        t_uniform_std=t_std,
        n_useful_hat=n_hat,
        n_useful_sim=n_sim,
        p_hat=float(p_hat),
        p_converged=converged,
        n_useful_v=n_v,
        fixed_point_trajectory=trajectory,
        stability_target=target,
        grid=grid,
        curve=curve,
        counts=counts.tolist(),
        execution_counts=counter.snapshot(),
        config={
            **asdict(config),
            "n_feature": n_f,
            "k_p": config.k_p(),
            "expected_real_runs": config.expected_real_runs,
            "simulated_run_constant": config.simulated_run_constant(),
        },
    )


def naive_real_stability_runs(m_stability: int, m_ensembles: Sequence[int]) -> int:
    """Real-selector runs needed to measure ensemble stability directly at each size."""
    return m_stability * sum(m_ensembles)
