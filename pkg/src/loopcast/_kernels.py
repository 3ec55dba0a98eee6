"""numba kernels: flat-array CART growth/prediction and an AR(1) filter.

Kept free of Python objects so everything compiles in nopython mode and
releases the GIL (tree fits can run on a thread pool). No fastmath: float
results must be bitwise reproducible, and the code must behave identically
under NUMBA_DISABLE_JIT=1.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def grow_tree(X, y, w, max_depth, min_leaf):
    """Grow one weighted regression tree with exact greedy splits.

    X: (m, k) float64, y: (m,) float64, w: (m,) float64 positive integer
    multiplicities (a bootstrap draw deduplicated into weights behaves
    identically to materialized duplicates: equal rows can never be
    separated by a threshold).

    Split rule: over features ascending, then candidate thresholds
    ascending (midpoints between consecutive distinct sorted values),
    maximize sum_L^2/w_L + sum_R^2/w_R (equivalent to minimizing the summed
    child squared error); strict improvement only, so the first candidate
    wins ties. A node is a leaf at max_depth, when no candidate leaves
    min_leaf weight on both sides, or when y is constant.

    Returns preorder flat arrays (feature, threshold, left, right, value,
    count); feature == -1 marks a leaf.
    """
    m, k = X.shape
    cap = 2 * m + 3
    feat = np.full(cap, -1, np.int64)
    thr = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    val = np.zeros(cap, np.float64)
    cnt = np.zeros(cap, np.float64)

    idx = np.empty((k, m), np.int64)
    for f in range(k):
        idx[f, :] = np.argsort(np.ascontiguousarray(X[:, f]), kind="mergesort")
    tmp = np.empty(m, np.int64)
    goes_left = np.empty(m, np.uint8)

    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_parent = np.empty(cap, np.int64)
    st_isleft = np.empty(cap, np.uint8)
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    st_parent[0] = -1
    st_isleft[0] = 0
    sp = 1
    n_nodes = 0

    while sp > 0:
        sp -= 1
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        parent = st_parent[sp]
        isleft = st_isleft[sp]
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if isleft == 1:
                left[parent] = node
            else:
                right[parent] = node

        sw = 0.0
        sy = 0.0
        ymin = y[idx[0, start]]
        ymax = ymin
        for i in range(start, end):
            r = idx[0, i]
            sw += w[r]
            sy += w[r] * y[r]
            yv = y[r]
            if yv < ymin:
                ymin = yv
            if yv > ymax:
                ymax = yv
        val[node] = sy / sw
        cnt[node] = sw

        if depth >= max_depth or sw < 2.0 * min_leaf or ymin == ymax:
            continue

        best_f = -1
        best_thr = 0.0
        best_score = -np.inf
        for f in range(k):
            swl = 0.0
            syl = 0.0
            prev = X[idx[f, start], f]
            for i in range(start + 1, end):
                r = idx[f, i - 1]
                swl += w[r]
                syl += w[r] * y[r]
                xv = X[idx[f, i], f]
                if xv > prev:
                    swr = sw - swl
                    if swl >= min_leaf and swr >= min_leaf:
                        syr = sy - syl
                        score = syl * syl / swl + syr * syr / swr
                        if score > best_score:
                            best_score = score
                            best_f = f
                            t = 0.5 * (prev + xv)
                            if t >= xv:
                                # midpoint of adjacent floats can round up;
                                # keep "x <= thr goes left" consistent
                                t = prev
                            best_thr = t
                    prev = xv
        if best_f < 0:
            continue

        feat[node] = best_f
        thr[node] = best_thr
        for i in range(start, end):
            r = idx[0, i]
            if X[r, best_f] <= best_thr:
                goes_left[r] = 1
            else:
                goes_left[r] = 0
        mid = start
        for f in range(k):
            a = start
            b = 0
            for i in range(start, end):
                r = idx[f, i]
                if goes_left[r] == 1:
                    idx[f, a] = r
                    a += 1
                else:
                    tmp[b] = r
                    b += 1
            for i in range(b):
                idx[f, a + i] = tmp[i]
            mid = a
        # push right first so the left child is processed next (preorder ids)
        st_start[sp] = mid
        st_end[sp] = end
        st_depth[sp] = depth + 1
        st_parent[sp] = node
        st_isleft[sp] = 0
        sp += 1
        st_start[sp] = start
        st_end[sp] = mid
        st_depth[sp] = depth + 1
        st_parent[sp] = node
        st_isleft[sp] = 1
        sp += 1

    return (feat[:n_nodes].copy(), thr[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), val[:n_nodes].copy(), cnt[:n_nodes].copy())


@njit(cache=True, nogil=True)
def predict_tree(X, feat, thr, left, right, val, out):
    for i in range(X.shape[0]):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = val[node]


@njit(cache=True, nogil=True)
def ar1_filter(innovations, rho, out):
    """out[t] = rho * out[t-1] + innovations[t], seeded with innovations[0].

    The caller scales innovations[0] to the marginal standard deviation and
    the rest by sqrt(1 - rho^2) to make the output stationary.
    """
    out[0] = innovations[0]
    for t in range(1, innovations.shape[0]):
        out[t] = rho * out[t - 1] + innovations[t]
