"""Pure numpy implementations of the hot kernels.

Each function mirrors one in ``_kernels.pyx`` and must return identical
values for identical inputs. Split scores are computed from exact integer
sums followed by a single float division so both backends round alike.
"""

import numpy as np

BACKEND = "python"


def best_split(XT, y, rows, features, n_class):
    """Best Gini split of ``rows`` over candidate ``features``.

    ``XT`` is the feature-major data matrix (n_feature x n_sample), ``y`` the
    integer class labels. Features are scanned in the order given (callers
    pass them sorted), thresholds in ascending order, and only a strictly
    better score replaces the incumbent.

    Returns ``(feature, threshold, score)`` where score is
    ``sum(cL**2)/nL + sum(cR**2)/nR``; feature is -1 when no candidate has
    two distinct values.
    """
    n = rows.shape[0]
    if n < 2 or features.shape[0] == 0:
        return -1, 0.0, -np.inf
    vals = XT[features][:, rows]
    order = np.argsort(vals, axis=1, kind="stable")
    sv = np.take_along_axis(vals, order, axis=1)
    cls = y[rows][order]
    onehot = (cls[:, :, None] == np.arange(n_class)[None, None, :]).astype(np.int64)
    left = np.cumsum(onehot, axis=1)[:, :-1, :]
    total = left[:, -1:, :] + onehot[:, -1:, :]
    right = total - left
    a = (left * left).sum(axis=2)
    b = (right * right).sum(axis=2)
    n_left = np.arange(1, n, dtype=np.int64)
    n_right = n - n_left
    score = (a * n_right + b * n_left).astype(np.float64) / (n_left * n_right).astype(np.float64)
    valid = sv[:, :-1] < sv[:, 1:]
    score = np.where(valid, score, -np.inf)
    per_feature = score.max(axis=1)
    fi = int(np.argmax(per_feature))
    if per_feature[fi] == -np.inf:
        return -1, 0.0, -np.inf
    pos = int(np.argmax(score[fi]))
    lo, hi = sv[fi, pos], sv[fi, pos + 1]
    threshold = (lo + hi) / 2.0
    if threshold == hi:
        threshold = lo
    return int(features[fi]), float(threshold), float(score[fi, pos])


def interleave_ranking(members, others, heads):
    """Merge two pre-shuffled pools by a coin sequence.

    Step ``i`` takes the next member when ``heads[i]`` is set and the next
    non-member otherwise; once a pool is empty the other one supplies the
    remaining positions.
    """
    n_m = members.shape[0]
    n_o = others.shape[0]
    n = n_m + n_o
    h = heads[:n].astype(bool)
    taken_h = np.cumsum(h)
    taken_t = np.arange(1, n + 1) - taken_h
    before_h = taken_h - h
    before_t = taken_t - (~h)
    exhausted = (before_h >= n_m) | (before_t >= n_o)
    k = int(np.argmax(exhausted)) if exhausted.any() else n
    choice = h.copy()
    if k < n:
        choice[k:] = before_h[k] < n_m
    out = np.empty(n, dtype=np.int64)
    out[choice] = members
    out[~choice] = others
    return out


def theorem_hits(swaps, heads, pick_in, pick_out, n_f, n_t, n_m, target):
    """Count trials of the first-draw experiment that hit ``target``.

    Per trial: a partial Fisher-Yates shuffle of ``0..n_m-1`` driven by
    ``swaps`` (row k holds an index in ``[k, n_m)``) yields S_0 as the first
    ``n_t`` slots; the draw is ``S_0[pick_in]`` on heads and the
    ``pick_out``-th smallest feature outside S_0 on tails.
    """
    t = swaps.shape[0]
    rows = np.arange(t)
    pool = np.tile(np.arange(n_m, dtype=np.int64), (t, 1))
    for k in range(n_t):
        j = swaps[:, k]
        tmp = pool[rows, k].copy()
        pool[rows, k] = pool[rows, j]
        pool[rows, j] = tmp
    s0 = pool[:, :n_t]
    s_in = s0[rows, pick_in]
    s_out = pick_out.astype(np.int64).copy()
    while True:
        nxt = pick_out + (s0 <= s_out[:, None]).sum(axis=1)
        if np.array_equal(nxt, s_out):
            break
        s_out = nxt
    drawn = np.where(heads.astype(bool), s_in, s_out)
    return int(np.count_nonzero(drawn == target))
