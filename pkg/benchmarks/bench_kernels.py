"""Compare the compiled kernels against the pure-Python fallback.

Run after ``pip install -e . --no-build-isolation``::

    python benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]

Each kernel is timed on both backends with identical inputs, and the outputs
are checked for equality before any timing is reported. The end-to-end rows
swap the backend under a full forest fit and a Monte Carlo theorem check.
"""

from __future__ import annotations

import argparse
import csv
import sys
import timeit
from contextlib import contextmanager

import numpy as np

from stabsim import _fallback, kernels
from stabsim.core import make_stream
from stabsim.data import SynthConfig, synth_generate
from stabsim.forest import ForestConfig, fit_forest, gini_importance
from stabsim.theory import Theorem1Inputs, p0_monte_carlo

try:
    from stabsim import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

KERNEL_NAMES = ("best_split", "interleave_ranking", "theorem_hits")


@contextmanager
def backend(module):
    saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    try:
        for name in KERNEL_NAMES:
            setattr(kernels, name, getattr(module, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def kernel_cases(seed: int):
    g = np.random.default_rng(seed)
    xt = np.ascontiguousarray(g.normal(size=(500, 60)))
    y = g.integers(0, 2, 60).astype(np.int64)
    rows = g.integers(0, 60, 60).astype(np.int64)
    feats = np.sort(g.choice(500, 22, replace=False)).astype(np.int64)
    members = g.permutation(20).astype(np.int64)
    others = g.permutation(np.arange(20, 2000)).astype(np.int64)
    heads = g.random(2000) < 0.7
    t, n_t, n_m = 20000, 20, 60
    swaps = np.ascontiguousarray(g.integers(np.arange(n_t), n_m, size=(t, n_t), dtype=np.int64))
    coin = g.random(t) < 0.7
    pick_in = g.integers(0, n_t, size=t, dtype=np.int64)
    pick_out = g.integers(0, 2000 - n_t, size=t, dtype=np.int64)
    return {
        "best_split (500x60, 22 candidates)": ("best_split", (xt, y, rows, feats, 2)),
        "interleave_ranking (n_feature=2000)": ("interleave_ranking", (members, others, heads)),
        "theorem_hits (20000 trials)": ("theorem_hits", (swaps, coin, pick_in, pick_out, 2000, n_t, n_m, 0)),
    }


def _same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def time_call(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1_000_000:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-tree", type=int, default=100)
    ap.add_argument("--csv", default=None, help="also write rows to this CSV path")
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    rows = []
    for label, (name, call_args) in kernel_cases(args.seed).items():
        fast, slow = getattr(_kernels, name), getattr(_fallback, name)
        if not _same(fast(*call_args), slow(*call_args)):
            print(f"MISMATCH in {name}", file=sys.stderr)
            return 1
        tc = time_call(lambda: fast(*call_args), args.repeat)
        tp = time_call(lambda: slow(*call_args), args.repeat)
        rows.append((label, tc, tp))

    ds = synth_generate(SynthConfig(60, 500, 10, 2, 1.0), make_stream(args.seed, 0))
    cfg = ForestConfig(n_tree=args.n_tree)
    imps, times = [], []
    for module in (_kernels, _fallback):
        with backend(module):
            fit = lambda: fit_forest(ds, np.arange(60), cfg, make_stream(args.seed, 1))  # noqa: E731
            imps.append(gini_importance(fit()))
            times.append(time_call(fit, max(1, args.repeat // 2)))
    if not np.array_equal(*imps):
        print("MISMATCH in forest importances", file=sys.stderr)
        return 1
    rows.append((f"fit_forest (60x500, n_tree={args.n_tree})", *times))

    inp = Theorem1Inputs(2000, 20, 60, 0.7)
    mcs, times = [], []
    for module in (_kernels, _fallback):
        with backend(module):
            mc = lambda: p0_monte_carlo(inp, 100_000, make_stream(args.seed, 2))  # noqa: E731
            mcs.append(mc())
            times.append(time_call(mc, max(1, args.repeat // 2)))
    if mcs[0] != mcs[1]:
        print("MISMATCH in p0_monte_carlo", file=sys.stderr)
        return 1
    rows.append(("p0_monte_carlo (100000 trials)", *times))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'cython':>12}  {'python':>12}  {'speedup':>8}")
    for label, tc, tp in rows:
        print(f"{label:<{width}}  {tc * 1e3:>10.3f}ms  {tp * 1e3:>10.3f}ms  {tp / tc:>7.1f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["case", "cython_seconds", "python_seconds"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
