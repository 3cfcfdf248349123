"""Sparse polynomials on the cube, sign predictors, least squares on subsets,
exact MMSE projections and the U polynomial."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels
from .cube import (MAX_TABLE_DIM, Dataset, DimensionError, JointDistribution,
                   SubsetMask, _check_dim, _readonly, deposit_bits, local_hadamard,
                   mask_positions)
from .fourier import empirical_coeffs, stochastic_spectrum

MAX_SUBSET_SIZE = 8
PINV_RCOND = 1e-10


def sign(values):
    """Elementwise sign with sign(0) = +1."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class SparsePolynomial:
    """p(x) = sum_S c_S chi_S(x) over the listed masks."""

    dim: int
    masks: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        _check_dim(self.dim)
        m = np.asarray(self.masks, dtype=np.int64).ravel()
        c = np.asarray(self.coeffs, dtype=np.float64).ravel()
        if m.shape != c.shape:
            raise ValueError("masks and coeffs differ in length")
        if np.any(m < 0) or np.any(m >> self.dim):
            raise DimensionError("monomial outside dimension")
        order = np.argsort(m, kind="stable")
        m, c = m[order], c[order]
        if np.any(np.diff(m) == 0):
            raise ValueError("duplicate monomials")
        object.__setattr__(self, "masks", _readonly(m))
        object.__setattr__(self, "coeffs", _readonly(c))

    @classmethod
    def from_terms(cls, dim, terms: dict) -> SparsePolynomial:
        keys = [k.bits if isinstance(k, SubsetMask) else int(k) for k in terms]
        return cls(dim, keys, list(terms.values()))

    @classmethod
    def zero(cls, dim) -> SparsePolynomial:
        return cls(dim, [], [])

    @classmethod
    def from_values(cls, dim, subset: SubsetMask, values) -> SparsePolynomial:
        """Polynomial on ``subset`` taking ``values[z]`` at restriction index z."""
        k = subset.size
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (1 << k,):
            raise ValueError(f"need 2^{k} values")
        coeffs = local_hadamard(k) @ values / float(1 << k)
        return cls(dim, deposit_bits(np.arange(1 << k), subset.positions()), coeffs)

    @property
    def terms(self) -> dict[int, float]:
        return {int(m): float(c) for m, c in zip(self.masks, self.coeffs)}

    @property
    def degree(self) -> int:
        nz = self.masks[self.coeffs != 0]
        return int(np.bitwise_count(nz).max()) if nz.size else 0

    @property
    def support(self) -> int:
        """Mask of the variables any listed monomial touches."""
        return int(np.bitwise_or.reduce(self.masks)) if self.masks.size else 0

    @cached_property
    def _local(self):
        # Values on the cube of support variables; used when that cube is small.
        sup = SubsetMask(self.support, self.dim)
        if sup.size > MAX_TABLE_DIM:
            return None
        pos = sup.positions()
        buf = np.zeros(1 << sup.size)
        buf[kernels.extract_bits(self.masks, pos)] = self.coeffs
        kernels.fwht(buf)
        return pos, buf

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.int64)
        local = self._local
        if local is None:
            return kernels.poly_eval(points, self.masks, self.coeffs)
        pos, table = local
        return table[kernels.extract_bits(points, pos)]

    def __call__(self, points):
        return self.evaluate(points)

    def table(self) -> np.ndarray:
        _check_dim(self.dim, MAX_TABLE_DIM)
        return self.evaluate(np.arange(1 << self.dim))

    def __add__(self, other):
        terms = self.terms
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return SparsePolynomial.from_terms(self.dim, terms)

    def scaled(self, factor: float) -> SparsePolynomial:
        return SparsePolynomial(self.dim, self.masks, self.coeffs * factor)


@dataclass(frozen=True, eq=False)
class Predictor:
    """g(x) = sign(poly(x) - theta) with sign(0) = +1."""

    poly: SparsePolynomial
    theta: float = 0.0
    subset: int | None = None

    def __post_init__(self):
        if not -1.0 <= self.theta <= 1.0:
            raise ValueError(f"threshold {self.theta} outside [-1, 1]")
        if self.subset is None:
            object.__setattr__(self, "subset", self.poly.support)

    @property
    def dim(self) -> int:
        return self.poly.dim

    def predict(self, points) -> np.ndarray:
        return sign(self.poly.evaluate(points) - self.theta)

    def table(self) -> np.ndarray:
        _check_dim(self.dim, MAX_TABLE_DIM)
        return self.predict(np.arange(1 << self.dim))

    def to_json(self) -> str:
        obj = {
            "type": "sign-poly",
            "dim": self.dim,
            "subset": int(self.subset),
            "terms": [{"s": int(m), "c": float(c)} for m, c in zip(self.poly.masks, self.poly.coeffs)],
            "theta": float(self.theta),
        }
        return json.dumps(obj, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Predictor:
        obj = json.loads(text)
        if obj.get("type") != "sign-poly":
            raise ValueError(f"unsupported model type {obj.get('type')!r}")
        d = int(obj["dim"])
        poly = SparsePolynomial(d, [t["s"] for t in obj["terms"]], [t["c"] for t in obj["terms"]])
        return cls(poly, float(obj["theta"]), int(obj["subset"]))

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> Predictor:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def u_poly(x):
    """U(x) = x^3 + 1.5 x^2 + 1.5 x for x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("U is defined for x >= 0")
    out = x ** 3 + 1.5 * x ** 2 + 1.5 * x
    return float(out) if out.ndim == 0 else out


def psd_solve(gram, rhs, rcond=PINV_RCOND):
    """Minimum-norm solution of gram @ c = rhs via eigendecomposition pseudoinverse.

    Works on stacks: gram (..., m, m), rhs (..., m). Eigenvalues below
    ``rcond`` times the largest are treated as zero.
    """
    w, v = np.linalg.eigh(gram)
    cutoff = rcond * np.max(w, axis=-1, keepdims=True)
    inv = np.divide(1.0, w, out=np.zeros_like(w), where=w > cutoff)
    proj = np.einsum("...ji,...j->...i", v, rhs)
    return np.einsum("...ij,...j->...i", v, inv * proj)


@dataclass(frozen=True)
class SubsetFits:
    """Batch of least-squares fits, one per subset of a common size k."""

    masks: np.ndarray       # (m,) subset masks
    positions: np.ndarray   # (m, k)
    counts: np.ndarray      # (m, 2^k, 2) label counts per restriction
    coeffs: np.ndarray      # (m, 2^k) coefficients on local monomials
    values: np.ndarray      # (m, 2^k) fitted values per restriction
    square_loss: np.ndarray  # (m,)

    def polynomial(self, i: int, dim: int) -> SparsePolynomial:
        k = self.positions.shape[1]
        return SparsePolynomial(dim, deposit_bits(np.arange(1 << k), self.positions[i]), self.coeffs[i])


def fit_subsets(data: Dataset, masks, k: int) -> SubsetFits:
    """Least squares over span{chi_S : S subset of J} for every J in ``masks``.

    The 2^k x 2^k normal equations are assembled from per-restriction label
    counts: Gram = H diag(n_z / n) H and rhs = H (c+_z - c-_z) / n.
    """
    if k > MAX_SUBSET_SIZE:
        raise ValueError(f"subset size {k} exceeds cap {MAX_SUBSET_SIZE}")
    masks = np.asarray(masks, dtype=np.int64)
    pos = mask_positions(masks, k)
    counts = kernels.restriction_counts(data.xs, data.ys, pos)
    H = local_hadamard(k)
    n = float(data.n)
    nz = counts.sum(axis=2) / n
    mz = (counts[:, :, 0] - counts[:, :, 1]) / n
    gram = np.einsum("sz,jz,tz->jst", H, nz, H)
    rhs = mz @ H
    coeffs = psd_solve(gram, rhs)
    values = coeffs @ H
    sq = (counts[:, :, 0] * (1 - values) ** 2 + counts[:, :, 1] * (1 + values) ** 2).sum(axis=1) / n
    return SubsetFits(masks, pos, counts, coeffs, values, sq)


def least_squares_fit(data: Dataset, j: SubsetMask) -> SparsePolynomial:
    """argmin_p (1/n) sum_i (y_i - p(x_i))^2 over polynomials on the variables of j."""
    if j.dim != data.dim:
        raise DimensionError("subset and dataset dimensions differ")
    return fit_subsets(data, [j.bits], j.size).polynomial(0, data.dim)


def conditional_table(dist: JointDistribution, j: SubsetMask):
    """(E[Y | X^J = z], P(X^J = z)) over restriction indices z; 0 where P = 0."""
    if j.dim != dist.dim:
        raise DimensionError("subset and distribution dimensions differ")
    w = 1 << j.size
    z = kernels.extract_bits(np.arange(1 << dist.dim), j.positions())
    num = np.bincount(z, weights=dist.label_margin, minlength=w)
    den = np.bincount(z, weights=dist.marginal, minlength=w)
    return np.divide(num, den, out=np.zeros(w), where=den > 0), den


def mmse_projection_exact(dist: JointDistribution, j: SubsetMask) -> SparsePolynomial:
    """Pi_Y^J: the conditional expectation E_D[Y | X^J] in the chi_S (S in J) basis."""
    values, _ = conditional_table(dist, j)
    return SparsePolynomial.from_values(dist.dim, j, values)


def fourier_projection(source, j: SubsetMask) -> SparsePolynomial:
    """f^J = sum_{S in J} a_S chi_S, exact for a distribution, empirical for a dataset."""
    if j.dim != source.dim:
        raise DimensionError("subset and source dimensions differ")
    masks = deposit_bits(np.arange(1 << j.size), j.positions())
    if isinstance(source, JointDistribution):
        coeffs = stochastic_spectrum(source).lookup(masks)
    elif isinstance(source, Dataset):
        coeffs = empirical_coeffs(source, masks)
    else:
        raise TypeError("source must be a JointDistribution or a Dataset")
    return SparsePolynomial(source.dim, masks, coeffs)
