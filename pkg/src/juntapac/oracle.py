"""Exact and empirical evaluation: losses, optimal junta loss, and the
closed-form identities and bounds relating 0-1 loss to square loss."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .cube import (Dataset, DimensionError, JointDistribution, SubsetMask,
                   deposit_bits, local_hadamard, subset_masks)
from .fourier import stochastic_spectrum, uniform_fourier
from .regression import (Predictor, SparsePolynomial, conditional_table,
                         fourier_projection, u_poly)

INEQ_SLACK = 1e-12
MAX_OPT_DIM = 16


@dataclass(frozen=True)
class LossReport:
    zero_one: float
    square: float
    inner: float

    def as_dict(self):
        return {"zero_one": self.zero_one, "square": self.square, "inner": self.inner}


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        """lhs - rhs; positive means the inequality is violated."""
        return self.lhs - self.rhs

    def holds(self, slack: float = INEQ_SLACK) -> bool:
        return self.lhs <= self.rhs + slack


def _same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def exact_loss(dist: JointDistribution, g: Predictor) -> LossReport:
    """0-1 loss, squared distance and correlation of g with Y under ``dist``."""
    _same_dim(dist, g)
    pred = g.table()
    plus, minus = dist.table[:, 0], dist.table[:, 1]
    zero_one = float(np.sum(np.where(pred == 1, minus, plus)))
    inner = float(np.sum((plus - minus) * pred))
    square = float(np.sum(plus * (1 - pred) ** 2 + minus * (1 + pred) ** 2))
    return LossReport(zero_one, square, inner)


def empirical_loss(data: Dataset, g: Predictor) -> LossReport:
    _same_dim(data, g)
    pred = g.predict(data.xs)
    y = data.ys.astype(np.int64)
    return LossReport(float(np.mean(y != pred)), float(np.mean((y - pred) ** 2)), float(np.mean(y * pred)))


def subset_opt_terms(dist: JointDistribution, k: int):
    """(masks, E_D|E_D[Y | X^J]|) for every J with |J| = k."""
    if dist.dim > MAX_OPT_DIM:
        raise DimensionError(f"opt scan limited to d <= {MAX_OPT_DIM}")
    masks = subset_masks(dist.dim, k)
    norms = np.empty(masks.shape[0])
    for i, m in enumerate(masks):
        cond, pz = conditional_table(dist, SubsetMask(int(m), dist.dim))
        norms[i] = np.sum(pz * np.abs(cond))
    return masks, norms


def opt_exact(dist: JointDistribution, k: int) -> tuple[float, SubsetMask]:
    """Minimum 0-1 loss over k-juntas, 1/2 - 1/2 max_J ||E[Y|X^J]||_1, and the argmax J."""
    masks, norms = subset_opt_terms(dist, k)
    i = int(np.argmax(norms))
    return 0.5 - 0.5 * float(norms[i]), SubsetMask(int(masks[i]), dist.dim)


def fourier_one_norms(dist: JointDistribution, k: int):
    """(masks, sum_x |f^J(x)|) for every |J| = k, from the label coefficients."""
    if dist.dim > MAX_OPT_DIM:
        raise DimensionError(f"opt scan limited to d <= {MAX_OPT_DIM}")
    d = dist.dim
    a = stochastic_spectrum(dist).to_dense()
    H = local_hadamard(k)
    masks = subset_masks(d, k)
    out = np.empty(masks.shape[0])
    local = np.arange(1 << k)
    for i, m in enumerate(masks):
        pos = SubsetMask(int(m), d).positions()
        vals = H @ a[deposit_bits(local, pos)]  # f^J at each restriction
        out[i] = float(1 << (d - k)) * np.sum(np.abs(vals))
    return masks, out


def opt_fourier(dist: JointDistribution, k: int) -> float:
    _, norms = fourier_one_norms(dist, k)
    return 0.5 - 0.5 * float(np.max(norms))


def loss_from_spectrum(dist: JointDistribution, g: Predictor) -> float:
    """1/2 - 2^(d-1) sum_S a_S g_S with g_S the uniform coefficients of g."""
    _same_dim(dist, g)
    a = stochastic_spectrum(dist).values
    gs = uniform_fourier(g.table()).values
    return 0.5 - 2.0 ** (dist.dim - 1) * float(np.dot(a, gs))


def _mmse_terms(dist, h, j):
    j = SubsetMask((1 << dist.dim) - 1, dist.dim) if j is None else j
    _same_dim(dist, j)
    cond, pz = conditional_table(dist, j)
    z = kernels.extract_bits(np.arange(1 << dist.dim), j.positions())
    f = cond[z]
    opt_z = 0.5 - 0.5 * float(np.sum(pz * np.abs(cond)))
    err2 = float(np.sum(dist.marginal * (f - h.table()) ** 2))
    lhs = exact_loss(dist, Predictor(h)).zero_one
    return lhs, opt_z, err2


def mmse_sign_bound(dist: JointDistribution, h: SparsePolynomial, j: SubsetMask | None = None) -> BoundCheck:
    """P(Y != sign h) against opt_Z + U(||E[Y|Z] - h||_2), Z = X^J (all of X if j is None)."""
    lhs, opt_z, err2 = _mmse_terms(dist, h, j)
    return BoundCheck(lhs, opt_z + u_poly(math.sqrt(err2)))


def mmse_sign_bound_squared(dist: JointDistribution, h: SparsePolynomial, j: SubsetMask | None = None) -> BoundCheck:
    """Variant with U applied to the squared distance E[(E[Y|Z] - h)^2].

    Not a valid bound in general (U(e^2) < e for small e); measured, never asserted.
    """
    lhs, opt_z, err2 = _mmse_terms(dist, h, j)
    return BoundCheck(lhs, opt_z + u_poly(err2))


def threshold_error_probability(y, v):
    """P_theta(y != sign(v - theta)) for theta with density 1 - |t| on [-1, 1]."""
    w = np.where(np.asarray(y) > 0, v, -np.asarray(v, dtype=np.float64))
    return np.select(
        [w > 1, w >= 0, w >= -1],
        [0.0, 0.5 * (1 - w) ** 2, 0.5 - w - 0.5 * w ** 2],
        default=1.0,
    )


def threshold_expectation(data: Dataset, p: SparsePolynomial) -> BoundCheck:
    """(E_theta[empirical loss of sign(p - theta)], 1/2 empirical square loss of p)."""
    _same_dim(data, p)
    v = p.evaluate(data.xs)
    y = data.ys.astype(np.float64)
    expected = float(np.mean(threshold_error_probability(y, v)))
    bound = 0.5 * float(np.mean((y - v) ** 2))
    return BoundCheck(expected, bound)


def fourier_framework_bound(dist: JointDistribution, j: SubsetMask, h: SparsePolynomial) -> BoundCheck:
    """P(Y != sign h) against 1/2 - 1/2 sum_x |f^J(x)| + U(||2^d f^J - h||_{2,unif}).

    h lives on the label scale (compare with 2^d f^J, which equals E[Y|X^J]
    under a uniform marginal); this is the 2^d-inside-U form with h/2^d as
    the function on the f^J scale.
    """
    _same_dim(dist, j)
    if h.support & ~j.bits:
        raise ValueError("h must depend only on the coordinates of j")
    fj = fourier_projection(dist, j).table()
    scale = float(1 << dist.dim)
    one_norm = float(np.sum(np.abs(fj)))
    dist2 = math.sqrt(float(np.mean((scale * fj - h.table()) ** 2)))
    lhs = exact_loss(dist, Predictor(h)).zero_one
    return BoundCheck(lhs, 0.5 - 0.5 * one_norm + u_poly(dist2))
