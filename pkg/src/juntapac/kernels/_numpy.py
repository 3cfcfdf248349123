"""Pure-numpy kernels. Reference path and fallback when numba is unavailable."""
import numpy as np

_CHUNK = 1 << 22  # max elements in a temporary (rows x cols) block


def fwht(a):
    """In-place unnormalized Walsh-Hadamard transform of a length-2^d float buffer."""
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] += hi
        v[:, 1, :] = lo - hi
        h *= 2
    return a


def parity(points, masks):
    """(len(points), len(masks)) int8 array of (-1)^popcount(x & s)."""
    odd = np.bitwise_count(points[:, None] & masks[None, :]) & 1
    return (1 - 2 * odd.astype(np.int8)).astype(np.int8)


def extract_bits(points, positions):
    """Gather the bits of every point at ``positions`` into a compact index (pext)."""
    out = np.zeros(points.shape[0], dtype=np.int64)
    for b, pos in enumerate(positions):
        out |= ((points >> pos) & 1) << b
    return out


def restriction_counts(xs, ys, positions):
    """Label counts per restriction for each subset.

    positions: (m, k) bit positions of m subsets of equal size k.
    Returns (m, 2^k, 2) int64; column 0 counts y=+1, column 1 counts y=-1.
    """
    m, k = positions.shape
    n = xs.shape[0]
    width = 1 << k
    out = np.empty((m, width, 2), dtype=np.int64)
    lab = (ys < 0).astype(np.int64)
    step = max(1, _CHUNK // max(n, 1))
    for lo in range(0, m, step):
        pos = positions[lo:lo + step]
        idx = np.zeros((pos.shape[0], n), dtype=np.int64)
        for b in range(k):
            idx |= ((xs[None, :] >> pos[:, b, None]) & 1) << b
        flat = (idx * 2 + lab[None, :]) + (np.arange(pos.shape[0])[:, None] * 2 * width)
        cnt = np.bincount(flat.ravel(), minlength=pos.shape[0] * 2 * width)
        out[lo:lo + pos.shape[0]] = cnt.reshape(pos.shape[0], width, 2)
    return out


def label_parity_sums(xs, ys, masks):
    """sum_i y_i chi_S(x_i) for every mask S."""
    out = np.empty(masks.shape[0], dtype=np.float64)
    step = max(1, _CHUNK // max(xs.shape[0], 1))
    y = ys.astype(np.int64)
    for lo in range(0, masks.shape[0], step):
        chi = parity(xs, masks[lo:lo + step]).astype(np.int64)
        out[lo:lo + step] = y @ chi
    return out


def poly_eval(points, masks, coeffs):
    """sum_t coeffs[t] * chi_{masks[t]}(x) for every point."""
    out = np.zeros(points.shape[0], dtype=np.float64)
    step = max(1, _CHUNK // max(points.shape[0], 1))
    for lo in range(0, masks.shape[0], step):
        chi = parity(points, masks[lo:lo + step]).astype(np.float64)
        out += chi @ coeffs[lo:lo + step]
    return out


def truth_table_search(counts):
    """Exhaustive search over all 2^(2^k) truth tables for each subset.

    counts: (m, 2^k, 2) label counts per restriction. Table t predicts -1 on
    restriction z iff bit z of t is set. Returns (best_table, best_errors) per
    subset; ties resolve to the smallest table index.
    """
    m, width, _ = counts.shape
    ntab = 1 << width
    tables = np.arange(ntab, dtype=np.int64)
    bits = ((tables[:, None] >> np.arange(width)[None, :]) & 1).astype(np.int64)
    base = counts[:, :, 1].sum(axis=1)
    delta = counts[:, :, 0] - counts[:, :, 1]
    best_t = np.empty(m, dtype=np.int64)
    best_e = np.empty(m, dtype=np.int64)
    step = max(1, _CHUNK // ntab)
    for lo in range(0, m, step):
        errs = bits @ delta[lo:lo + step].T + base[None, lo:lo + step]
        t = np.argmin(errs, axis=0)
        best_t[lo:lo + step] = t
        best_e[lo:lo + step] = errs[t, np.arange(errs.shape[1])]
    return best_t, best_e
