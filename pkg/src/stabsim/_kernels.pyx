# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_fallback.py`` (same contracts)."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

BACKEND = "cython"

ctypedef struct Item:
    double value
    cnp.int64_t label


cdef inline void _insertion_sort(Item* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Item key
    for i in range(1, n):
        key = a[i]
        j = i - 1
        while j >= 0 and a[j].value > key.value:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


cdef inline void _swap(Item* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Item t = a[i]
    a[i] = a[j]
    a[j] = t


cdef void _sort_items(Item* a, Py_ssize_t n) noexcept nogil:
    """Quicksort on value (median-of-three pivot), insertion sort below 16."""
    cdef Py_ssize_t i, j, mid
    cdef double pivot
    while n > 16:
        mid = n // 2
        if a[mid].value < a[0].value:
            _swap(a, mid, 0)
        if a[n - 1].value < a[0].value:
            _swap(a, n - 1, 0)
        if a[n - 1].value < a[mid].value:
            _swap(a, n - 1, mid)
        pivot = a[mid].value
        i = 0
        j = n - 1
        while True:
            while a[i].value < pivot:
                i += 1
            while a[j].value > pivot:
                j -= 1
            if i >= j:
                break
            _swap(a, i, j)
            i += 1
            j -= 1
        # recurse into the smaller side, loop on the larger
        if j + 1 < n - j - 1:
            _sort_items(a, j + 1)
            a = a + j + 1
            n = n - j - 1
        else:
            _sort_items(a + j + 1, n - j - 1)
            n = j + 1
    _insertion_sort(a, n)


def best_split(const double[:, ::1] XT, const cnp.int64_t[::1] y,
               const cnp.int64_t[::1] rows, const cnp.int64_t[::1] features,
               int n_class):
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t m = features.shape[0]
    if n < 2 or m == 0:
        return -1, 0.0, -np.inf
    cdef Item* items = <Item*>malloc(n * sizeof(Item))
    cdef cnp.int64_t* total = <cnp.int64_t*>malloc(n_class * sizeof(cnp.int64_t))
    cdef cnp.int64_t* left = <cnp.int64_t*>malloc(n_class * sizeof(cnp.int64_t))
    if items == NULL or total == NULL or left == NULL:
        free(items); free(total); free(left)
        raise MemoryError()
    cdef Py_ssize_t fi, i, c
    cdef cnp.int64_t f, k, a, b, total_sq, n_left, n_right
    cdef double score, best = -np.inf, threshold = 0.0, lo, hi
    cdef cnp.int64_t best_feature = -1
    try:
        with nogil:
            memset(total, 0, n_class * sizeof(cnp.int64_t))
            for i in range(n):
                total[y[rows[i]]] += 1
            total_sq = 0
            for c in range(n_class):
                total_sq += total[c] * total[c]
            for fi in range(m):
                f = features[fi]
                for i in range(n):
                    items[i].value = XT[f, rows[i]]
                    items[i].label = y[rows[i]]
                _sort_items(items, n)
                memset(left, 0, n_class * sizeof(cnp.int64_t))
                a = 0
                b = total_sq
                for i in range(n - 1):
                    k = items[i].label
                    # move one sample of class k from right to left
                    a += 2 * left[k] + 1
                    b -= 2 * (total[k] - left[k]) - 1
                    left[k] += 1
                    if not (items[i].value < items[i + 1].value):
                        continue
                    n_left = i + 1
                    n_right = n - n_left
                    score = <double>(a * n_right + b * n_left) / <double>(n_left * n_right)
                    if score > best:
                        best = score
                        best_feature = f
                        lo = items[i].value
                        hi = items[i + 1].value
                        threshold = (lo + hi) / 2.0
                        if threshold == hi:
                            threshold = lo
    finally:
        free(items); free(total); free(left)
    if best_feature < 0:
        return -1, 0.0, -np.inf
    return int(best_feature), float(threshold), float(best)


def interleave_ranking(const cnp.int64_t[::1] members, const cnp.int64_t[::1] others,
                       heads):
    cdef const cnp.uint8_t[::1] h = np.ascontiguousarray(heads, dtype=np.uint8)
    cdef Py_ssize_t n_m = members.shape[0]
    cdef Py_ssize_t n_o = others.shape[0]
    cdef Py_ssize_t n = n_m + n_o
    out_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i, hi = 0, ti = 0
    cdef bint take
    with nogil:
        for i in range(n):
            if hi >= n_m:
                take = False
            elif ti >= n_o:
                take = True
            else:
                take = h[i] != 0
            if take:
                out[i] = members[hi]
                hi += 1
            else:
                out[i] = others[ti]
                ti += 1
    return out_arr


def theorem_hits(const cnp.int64_t[:, ::1] swaps, heads, const cnp.int64_t[::1] pick_in,
                 const cnp.int64_t[::1] pick_out, cnp.int64_t n_f, cnp.int64_t n_t,
                 cnp.int64_t n_m, cnp.int64_t target):
    cdef const cnp.uint8_t[::1] h = np.ascontiguousarray(heads, dtype=np.uint8)
    cdef Py_ssize_t t = swaps.shape[0]
    cdef cnp.int64_t* pool = <cnp.int64_t*>malloc(n_m * sizeof(cnp.int64_t))
    if pool == NULL:
        raise MemoryError()
    cdef Py_ssize_t r, k, q
    cdef cnp.int64_t j, tmp, s, nxt, hits = 0
    with nogil:
        for r in range(t):
            for k in range(n_m):
                pool[k] = k
            for k in range(n_t):
                j = swaps[r, k]
                tmp = pool[k]
                pool[k] = pool[j]
                pool[j] = tmp
            if h[r]:
                s = pool[pick_in[r]]
            else:
                s = pick_out[r]
                while True:
                    nxt = pick_out[r]
                    for q in range(n_t):
                        if pool[q] <= s:
                            nxt += 1
                    if nxt == s:
                        break
                    s = nxt
            if s == target:
                hits += 1
    free(pool)
    return int(hits)
