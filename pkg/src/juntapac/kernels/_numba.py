"""numba-compiled kernels; same contracts as the numpy module."""
import warnings

import numpy as np
from numba import njit, prange
from numba.core.errors import NumbaWarning

# Old system TBB: numba falls back to another threading layer; nothing to act on.
warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)


@njit(cache=True)
def fwht(a):
    n = a.shape[0]
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                u = a[j]
                v = a[j + h]
                a[j] = u + v
                a[j + h] = u - v
        h *= 2
    return a


@njit(cache=True, inline="always")
def _popcount(v):
    c = 0
    while v:
        v &= v - 1
        c += 1
    return c


@njit(cache=True, parallel=True)
def parity(points, masks):
    out = np.empty((points.shape[0], masks.shape[0]), dtype=np.int8)
    for i in prange(points.shape[0]):
        x = points[i]
        for t in range(masks.shape[0]):
            out[i, t] = 1 - 2 * (_popcount(x & masks[t]) & 1)
    return out


@njit(cache=True)
def extract_bits(points, positions):
    out = np.zeros(points.shape[0], dtype=np.int64)
    for i in range(points.shape[0]):
        x = points[i]
        z = 0
        for b in range(positions.shape[0]):
            z |= ((x >> positions[b]) & 1) << b
        out[i] = z
    return out


@njit(cache=True, parallel=True)
def restriction_counts(xs, ys, positions):
    m, k = positions.shape
    width = 1 << k
    out = np.zeros((m, width, 2), dtype=np.int64)
    for j in prange(m):
        for i in range(xs.shape[0]):
            x = xs[i]
            z = 0
            for b in range(k):
                z |= ((x >> positions[j, b]) & 1) << b
            out[j, z, 1 if ys[i] < 0 else 0] += 1
    return out


@njit(cache=True, parallel=True)
def label_parity_sums(xs, ys, masks):
    out = np.empty(masks.shape[0], dtype=np.float64)
    for t in prange(masks.shape[0]):
        s = masks[t]
        acc = 0
        for i in range(xs.shape[0]):
            if _popcount(xs[i] & s) & 1:
                acc -= ys[i]
            else:
                acc += ys[i]
        out[t] = acc
    return out


@njit(cache=True, parallel=True)
def poly_eval(points, masks, coeffs):
    out = np.zeros(points.shape[0], dtype=np.float64)
    for i in prange(points.shape[0]):
        x = points[i]
        acc = 0.0
        for t in range(masks.shape[0]):
            if _popcount(x & masks[t]) & 1:
                acc -= coeffs[t]
            else:
                acc += coeffs[t]
        out[i] = acc
    return out


@njit(cache=True, parallel=True)
def truth_table_search(counts):
    m, width, _ = counts.shape
    ntab = 1 << width
    best_t = np.empty(m, dtype=np.int64)
    best_e = np.empty(m, dtype=np.int64)
    for j in prange(m):
        base = 0
        for z in range(width):
            base += counts[j, z, 1]
        # Gray-code walk: consecutive tables differ in one restriction
        bt = 0
        be = base
        e = base
        g = 0
        for i in range(1, ntab):
            z = 0
            while not (i >> z) & 1:
                z += 1
            g ^= 1 << z
            d = counts[j, z, 0] - counts[j, z, 1]
            e += d if (g >> z) & 1 else -d
            if e < be or (e == be and g < bt):
                be = e
                bt = g
        best_t[j] = bt
        best_e[j] = be
    return best_t, best_e
