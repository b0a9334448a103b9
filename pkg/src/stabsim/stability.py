"""Pairwise Jaccard stability and the replica harness that measures it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import ExecutionCounter, FeatureSubset, RngStream, parallel_map

DEFAULT_M_STABILITY = 30


@dataclass(frozen=True)
class StabilityRun:
    subsets: tuple
    J: float
    counts: Optional[dict] = None

    @property
    def m_stability(self) -> int:
        return len(self.subsets)


def jaccard(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def pairwise_jaccard(subsets: Sequence[FeatureSubset]) -> float:
    """Mean Jaccard index over all unordered pairs, summed in (i<j) ascending order."""
    u = len(subsets)
    if u < 2:
        raise ValueError(f"pairwise Jaccard needs at least 2 subsets, got {u}")
    sets = [s.members if isinstance(s, FeatureSubset) else frozenset(s) for s in subsets]
    total = 0.0
    for i in range(u):
        si = sets[i]
        for j in range(i + 1, u):
            total += jaccard(si, sets[j])
    return 2.0 * total / (u * (u - 1))


def estimate_stability(
    selector_factory: Callable[[RngStream], FeatureSubset],
    m_stability: int,
    rng: RngStream,
    counter: Optional[ExecutionCounter] = None,
    workers: int = 1,
) -> StabilityRun:
    """Run ``selector_factory`` on ``rng.child(r)`` for each replica r and score the outputs."""
    if m_stability < 2:
        raise ValueError("m_stability must be >= 2")
    subsets = parallel_map(lambda r: selector_factory(rng.child(r)), list(range(m_stability)), workers)
    return StabilityRun(tuple(subsets), pairwise_jaccard(subsets), counter.snapshot() if counter else None)
