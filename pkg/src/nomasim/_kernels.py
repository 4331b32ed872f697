"""Hot inner-loop kernels, compiled with numba when available.

Set NOMASIM_NO_NUMBA=1 to force the pure-Python fallback. Both paths run
the exact same function body (sequential scalar arithmetic only), so
results are bit-identical either way; `python_impl` exposes the
uncompiled version for parity tests and benchmarks.
"""

import os

import numpy as np


def _use_numba():
    flag = os.environ.get("NOMASIM_NO_NUMBA", "0").strip().lower()
    if flag in ("1", "true", "yes"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _use_numba()

if NUMBA_ENABLED:
    from numba import njit

    def _compiled(fn):
        return njit(cache=True)(fn)
else:
    def _compiled(fn):
        return fn


def python_impl(fn):
    """Return the uncompiled Python version of a kernel."""
    return getattr(fn, "py_func", fn)


@_compiled
def ward_merge_sequence(thetas):
    """Full bottom-up Ward merge sequence over scalar features.

    Starts from one singleton cluster per entry and greedily merges the
    pair with the lowest Ward cost until one cluster remains. Cluster
    slots are indexed by their lowest original member; the surviving
    slot of a merge is always the smaller index, and cost ties resolve
    to the lexicographically smallest (i, j) pair.

    Returns (merge_i, merge_j, cost) arrays of length n - 1.
    """
    n = thetas.shape[0]
    count = np.ones(n, np.float64)
    mean = thetas.astype(np.float64).copy()
    active = np.ones(n, np.bool_)
    merge_i = np.empty(n - 1, np.int64)
    merge_j = np.empty(n - 1, np.int64)
    cost = np.empty(n - 1, np.float64)

    for t in range(n - 1):
        best_i = -1
        best_j = -1
        best = np.inf
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                d = mean[i] - mean[j]
                c = count[i] * count[j] / (count[i] + count[j]) * (d * d)
                if c < best:
                    best = c
                    best_i = i
                    best_j = j
        merge_i[t] = best_i
        merge_j[t] = best_j
        cost[t] = best
        total = count[best_i] + count[best_j]
        mean[best_i] = (count[best_i] * mean[best_i]
                        + count[best_j] * mean[best_j]) / total
        count[best_i] = total
        active[best_j] = False

    return merge_i, merge_j, cost


@_compiled
def lloyd_cluster(thetas, means, max_iter):
    """Lloyd iterations for scalar k-means starting from `means`.

    Assignment ties go to the lowest cluster index. Clusters that come
    up empty are re-seeded at the point farthest from its current mean
    (donor clusters must keep at least one member). Stops when an
    assignment pass changes nothing, or after max_iter passes.

    Mutates `means` in place; returns (assignment, n_iterations).
    """
    n = thetas.shape[0]
    k = means.shape[0]
    assign = np.full(n, -1, np.int64)
    counts = np.zeros(k, np.int64)
    sums = np.zeros(k, np.float64)
    used = np.zeros(n, np.bool_)
    iters = 0

    while iters < max_iter:
        iters += 1
        changed = False
        for p in range(n):
            best_c = 0
            best_d = np.inf
            for c in range(k):
                d = thetas[p] - means[c]
                d2 = d * d
                if d2 < best_d:
                    best_d = d2
                    best_c = c
            if assign[p] != best_c:
                changed = True
                assign[p] = best_c
        if not changed:
            break

        for c in range(k):
            counts[c] = 0
            sums[c] = 0.0
        for p in range(n):
            sums[assign[p]] += thetas[p]
            counts[assign[p]] += 1
        for c in range(k):
            if counts[c] > 0:
                means[c] = sums[c] / counts[c]

        for p in range(n):
            used[p] = False
        for c in range(k):
            if counts[c] != 0:
                continue
            far_p = -1
            far_d = -1.0
            for p in range(n):
                if used[p] or counts[assign[p]] <= 1:
                    continue
                d = thetas[p] - means[assign[p]]
                d2 = d * d
                if d2 > far_d:
                    far_d = d2
                    far_p = p
            if far_p >= 0:
                means[c] = thetas[far_p]
                used[far_p] = True

    return assign, iters
