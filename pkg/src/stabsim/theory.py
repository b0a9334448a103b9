"""First-draw probability of a useful feature: closed form and Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from . import kernels
from .core import RngStream

Number = Union[float, Fraction]


@dataclass(frozen=True)
class Theorem1Inputs:
    n_f: int  # n_feature
    n_t: int  # n_target
    n_m: int  # n_useful
    p: Number

    def __post_init__(self):
        if not 0 < self.n_t <= self.n_m <= self.n_f:
            raise ValueError("need 0 < n_t <= n_m <= n_f")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")


def p0_closed_form(inp: Theorem1Inputs) -> Number:
    """P(first draw = a fixed useful feature) = ((n_f-n_m)p + n_m-n_t) / (n_m (n_f-n_t)).

    Exact when ``inp.p`` is a :class:`Fraction`.
    """
    if inp.n_f == inp.n_t:
        raise ValueError("n_f == n_t: closed form divides by zero")
    num = (inp.n_f - inp.n_m) * inp.p + (inp.n_m - inp.n_t)
    den = inp.n_m * (inp.n_f - inp.n_t)
    if isinstance(inp.p, Fraction):
        return Fraction(num) / den
    return num / den


def p0_minus_uniform(inp: Theorem1Inputs) -> Number:
    """p0 - 1/n_f in factored form; its sign is the sign of ``n_f p - n_t``."""
    coef = Fraction(inp.n_f - inp.n_m, inp.n_m * inp.n_f * (inp.n_f - inp.n_t))
    if isinstance(inp.p, Fraction):
        return coef * (inp.n_f * inp.p - inp.n_t)
    return float(coef) * (inp.n_f * inp.p - inp.n_t)


def theorem1_threshold(n_f: int, n_t: int) -> float:
    if n_f <= 0:
        raise ValueError("n_f must be positive")
    return n_t / n_f


def p0_monte_carlo(
    inp: Theorem1Inputs,
    trials: int,
    rng: RngStream,
    target: int = 0,
    chunk: int = 0,
) -> float:
    """Hit rate of ``target`` (a member of the useful pool) in the first-draw experiment.

    Each trial draws S_0 uniformly from the useful pool, flips a p-coin, and
    picks uniformly from S_0 on heads or from the other features on tails.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= target < inp.n_m:
        raise ValueError("target must be a useful-pool feature")
    n_f, n_t, n_m, p = inp.n_f, inp.n_t, inp.n_m, float(inp.p)
    if chunk <= 0:
        chunk = max(1, 4_000_000 // (n_t + n_m))
    hits = 0
    done = 0
    c = 0
    lows = np.arange(n_t, dtype=np.int64)
    while done < trials:
        t = min(chunk, trials - done)
        g = rng.child(c).generator
        swaps = np.ascontiguousarray(g.integers(lows, n_m, size=(t, n_t), dtype=np.int64))
        heads = g.random(t) < p
        pick_in = g.integers(0, n_t, size=t, dtype=np.int64)
        if n_f > n_t:
            pick_out = g.integers(0, n_f - n_t, size=t, dtype=np.int64)
        else:
            pick_out = np.zeros(t, dtype=np.int64)
            heads[:] = True  # no feature outside S_0 exists
        hits += kernels.theorem_hits(swaps, heads, pick_in, pick_out, n_f, n_t, n_m, target)
        done += t
        c += 1
    return hits / trials


def standard_error(prob: float, trials: int) -> float:
    return math.sqrt(max(prob * (1.0 - prob), 0.0) / trials)


def theorem_check(inp: Theorem1Inputs, trials: int, rng: RngStream) -> dict:
    """Closed form, Monte Carlo estimate, threshold and the theorem's verdict."""
    closed = float(p0_closed_form(inp))
    mc = p0_monte_carlo(inp, trials, rng)
    threshold = theorem1_threshold(inp.n_f, inp.n_t)
    p = float(inp.p)
    uniform = 1.0 / inp.n_f
    exact = p0_minus_uniform(Theorem1Inputs(inp.n_f, inp.n_t, inp.n_m, Fraction(inp.p).limit_denominator(10**9)))
    if p > threshold:
        verdict = "above"  # useful features beat the uniform selector
    elif p < threshold:
        verdict = "below"
    else:
        verdict = "boundary"
    se = standard_error(closed, trials)
    return {
        "n_feature": inp.n_f,
        "n_target": inp.n_t,
        "n_useful": inp.n_m,
        "p": p,
        "p0_closed": closed,
        "p0_mc": mc,
        "p1_uniform": uniform,
        "threshold": threshold,
        "verdict": verdict,
        "trials": trials,
        "standard_error": se,
        "mc_within_4se": abs(mc - closed) <= 4 * se + 1e-15,
        "sign_consistent": (
            exact == 0
            if inp.n_m == inp.n_f
            else (exact > 0) == (p > threshold) and (exact < 0) == (p < threshold)
        ),
    }
