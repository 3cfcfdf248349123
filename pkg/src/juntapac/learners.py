"""Learning procedures. Each returns ``(Predictor, LearnReport)``.

All ties (subset, truth table, threshold) break toward the smallest index, so
runs are reproducible bit for bit.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cube import (MAX_TABLE_DIM, Dataset, DimensionError, SubsetMask,
                   deposit_bits, empirical_distribution, local_hadamard,
                   mask_positions, subset_masks)
from .fourier import empirical_coeffs, uniform_fourier
from .oracle import empirical_loss
from .regression import (MAX_SUBSET_SIZE, Predictor, SparsePolynomial,
                         fit_subsets, psd_solve, sign)

log = logging.getLogger(__name__)

ERM_MAX_K = 4
ERM_MAX_D = 16
_GRAM_BUDGET = 1 << 22  # doubles per batched Gram stack


@dataclass
class LearnReport:
    algorithm: str
    subset: int
    empirical_loss: float
    square_loss: float
    seconds: float = 0.0
    subset_losses: dict[int, float] | None = field(default=None, repr=False)
    theta: float = 0.0

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "algorithm": self.algorithm,
            "subset": self.subset,
            "empirical_loss": self.empirical_loss,
            "square_loss": self.square_loss,
            "theta": self.theta,
        }
        if timing:
            out["seconds"] = self.seconds
        if self.subset_losses is not None:
            out["subset_losses"] = {str(k): v for k, v in self.subset_losses.items()}
        return out


def _check_k(data: Dataset, k: int, cap: int = MAX_SUBSET_SIZE):
    if not 0 <= k <= data.dim:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={data.dim}")
    if k > cap:
        raise ValueError(f"k={k} exceeds the cap {cap} for this learner")


def _errors(counts, values):
    # Misclassified samples of sign(values) per subset, from restriction counts.
    return np.where(values >= 0, counts[:, :, 1], counts[:, :, 0]).sum(axis=1)


def _finish(name, data, pred, square, t0, per_subset, theta=0.0):
    report = LearnReport(
        algorithm=name,
        subset=int(pred.subset),
        empirical_loss=empirical_loss(data, pred).zero_one,
        square_loss=float(square),
        seconds=time.perf_counter() - t0,
        subset_losses=per_subset,
        theta=float(theta),
    )
    return pred, report


def l2_algorithm(data: Dataset, k: int, select: str = "zero_one"):
    """Least squares on every k-subset J, return sign of the selected fit.

    ``select="zero_one"`` picks the J whose sign[p_J] has the fewest training
    errors; ``select="square"`` picks the J with the smallest square loss.
    Only the first guarantees that the returned training error equals the
    minimum over all k-juntas (see README, "Subset selection").
    """
    if select not in ("zero_one", "square"):
        raise ValueError(f"unknown selection rule {select!r}")
    _check_k(data, k)
    t0 = time.perf_counter()
    masks = subset_masks(data.dim, k)
    step = max(1, _GRAM_BUDGET // (1 << 2 * k))
    errs, sq, best = [], [], None
    fits = []
    for lo in range(0, masks.shape[0], step):
        f = fit_subsets(data, masks[lo:lo + step], k)
        fits.append(f)
        errs.append(_errors(f.counts, f.values))
        sq.append(f.square_loss)
    errs = np.concatenate(errs)
    sq = np.concatenate(sq)
    if select == "zero_one":
        i = int(np.argmin(errs))
    else:
        i = int(np.flatnonzero(sq <= sq.min() + 1e-12)[0])
    chunk, off = divmod(i, step)
    poly = fits[chunk].polynomial(off, data.dim)
    pred = Predictor(poly, 0.0, int(masks[i]))
    per = {int(m): float(e) / data.n for m, e in zip(masks, errs)}
    return _finish("l2", data, pred, sq[i], t0, per)


def stochastic_fourier(data: Dataset, k: int):
    """Empirical label coefficients for |S| <= k; sign of the best f_hat^J."""
    _check_k(data, k)
    t0 = time.perf_counter()
    d = data.dim
    all_masks = subset_masks(d, k, "up_to_k")
    a_hat = empirical_coeffs(data, all_masks)
    masks = subset_masks(d, k)
    pos = mask_positions(masks, k)
    local = np.arange(1 << k)
    sub = np.stack([deposit_bits(local, p) for p in pos])  # (m, 2^k) global masks of S in J
    coeffs = a_hat[np.searchsorted(all_masks, sub)]
    values = coeffs @ local_hadamard(k)
    counts = kernels.restriction_counts(data.xs, data.ys, pos)
    errs = _errors(counts, values)
    i = int(np.argmin(errs))
    poly = SparsePolynomial(d, sub[i], coeffs[i])
    pred = Predictor(poly, 0.0, int(masks[i]))
    v = poly.evaluate(data.xs)
    square = float(np.mean((data.ys - v) ** 2))
    per = {int(m): float(e) / data.n for m, e in zip(masks, errs)}
    return _finish("fourier", data, pred, square, t0, per)


def threshold_candidates(values) -> np.ndarray:
    """Thresholds covering every distinct labelling by sign(v - theta), theta in [-1, 1]."""
    u = np.unique(np.asarray(values, dtype=np.float64))
    mids = 0.5 * (u[:-1] + u[1:])
    return np.unique(np.clip(np.concatenate([[-1.0], mids, [1.0]]), -1.0, 1.0))


def threshold_scan(values, ys):
    """(theta, errors) minimizing training errors of sign(v - theta); smallest theta on ties."""
    values = np.asarray(values, dtype=np.float64)
    ys = np.asarray(ys)
    cand = threshold_candidates(values)
    pos_v = np.sort(values[ys > 0])
    neg_v = np.sort(values[ys < 0])
    # y=+1 wrong iff v < theta; y=-1 wrong iff v >= theta
    errs = np.searchsorted(pos_v, cand, side="left") + (neg_v.shape[0] - np.searchsorted(neg_v, cand, side="left"))
    i = int(np.argmin(errs))
    return float(cand[i]), int(errs[i])


def l2_threshold(data: Dataset, k: int):
    """Least squares over all monomials of degree <= k, then the best threshold."""
    _check_k(data, k)
    t0 = time.perf_counter()
    masks = subset_masks(data.dim, k, "up_to_k")
    if masks.shape[0] > data.n:
        log.warning("degree-%d design has %d columns for %d samples; using the pseudoinverse",
                    k, masks.shape[0], data.n)
    X = kernels.parity(data.xs, masks).astype(np.float64)
    y = data.ys.astype(np.float64)
    coeffs = psd_solve(X.T @ X / data.n, X.T @ y / data.n)
    poly = SparsePolynomial(data.dim, masks, coeffs)
    v = poly.evaluate(data.xs)
    theta, _ = threshold_scan(v, data.ys)
    pred = Predictor(poly, theta, (1 << data.dim) - 1)
    square = float(np.mean((y - v) ** 2))
    return _finish("threshold", data, pred, square, t0, None, theta)


def erm_bruteforce(data: Dataset, k: int):
    """Exhaustive empirical risk minimization over all k-juntas."""
    if k > ERM_MAX_K or data.dim > ERM_MAX_D:
        raise ValueError(f"erm limited to k <= {ERM_MAX_K} and d <= {ERM_MAX_D} (got k={k}, d={data.dim})")
    _check_k(data, k)
    t0 = time.perf_counter()
    masks = subset_masks(data.dim, k)
    pos = mask_positions(masks, k)
    counts = kernels.restriction_counts(data.xs, data.ys, pos)
    tables, errs = kernels.truth_table_search(counts)
    i = int(np.argmin(errs))
    t = int(tables[i])
    values = np.array([-1.0 if (t >> z) & 1 else 1.0 for z in range(1 << k)])
    poly = SparsePolynomial.from_values(data.dim, SubsetMask(int(masks[i]), data.dim), values)
    pred = Predictor(poly, 0.0, int(masks[i]))
    per = {int(m): float(e) / data.n for m, e in zip(masks, errs)}
    return _finish("erm", data, pred, 4.0 * errs[i] / data.n, t0, per)


def sign_mmse(data: Dataset, k: int | None = None):
    """Sign of the empirical conditional mean E_hat[Y | X = x] (0 on unseen x)."""
    if data.dim > MAX_TABLE_DIM:
        raise DimensionError(f"sign-mmse needs d <= {MAX_TABLE_DIM}")
    t0 = time.perf_counter()
    emp = empirical_distribution(data)
    cond = emp.conditional_mean()
    spectrum = uniform_fourier(cond)
    keep = spectrum.values != 0.0
    poly = SparsePolynomial(data.dim, spectrum.masks[keep], spectrum.values[keep])
    pred = Predictor(poly, 0.0, (1 << data.dim) - 1)
    v = poly.evaluate(data.xs)
    square = float(np.mean((data.ys - v) ** 2))
    return _finish("mmse-sign", data, pred, square, t0, None)


LEARNERS = {
    "l2": l2_algorithm,
    "fourier": stochastic_fourier,
    "erm": erm_bruteforce,
    "threshold": l2_threshold,
    "mmse-sign": sign_mmse,
}


def learn(name: str, data: Dataset, k: int):
    try:
        fn = LEARNERS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(LEARNERS)}") from None
    return fn(data, k)
