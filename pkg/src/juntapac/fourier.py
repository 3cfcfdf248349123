"""Uniform Boolean Fourier transform and stochastic/empirical label coefficients.

Coefficients of the label keep the 2^-d scale factor:

    a_S     = 2^-d E[Y chi_S(X)]                  (exact, under a distribution)
    a_hat_S = 2^-d (1/n) sum_i y_i chi_S(x_i)     (empirical)

``Spectrum.rescaled()`` multiplies by 2^d where an identity needs the unscaled value.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cube import (MAX_TABLE_DIM, Dataset, DimensionError, JointDistribution,
                   SubsetMask, _check_dim, _readonly)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sparse map from subset masks to coefficients; absent masks are zero."""

    dim: int
    masks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _check_dim(self.dim)
        m = np.asarray(self.masks, dtype=np.int64).ravel()
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if m.shape != v.shape:
            raise ValueError("masks and values differ in length")
        if np.any(m < 0) or np.any(m >> self.dim):
            raise DimensionError("mask outside dimension")
        order = np.argsort(m, kind="stable")
        m, v = m[order], v[order]
        if np.any(np.diff(m) == 0):
            raise ValueError("duplicate masks in spectrum")
        object.__setattr__(self, "masks", _readonly(m))
        object.__setattr__(self, "values", _readonly(v))

    @classmethod
    def from_dense(cls, dim, values) -> Spectrum:
        return cls(dim, np.arange(1 << dim), values)

    @classmethod
    def from_dict(cls, dim, coeffs: dict) -> Spectrum:
        keys = [k.bits if isinstance(k, SubsetMask) else int(k) for k in coeffs]
        return cls(dim, keys, list(coeffs.values()))

    def __getitem__(self, s) -> float:
        s = s.bits if isinstance(s, SubsetMask) else int(s)
        i = np.searchsorted(self.masks, s)
        if i < self.masks.shape[0] and self.masks[i] == s:
            return float(self.values[i])
        return 0.0

    def lookup(self, masks) -> np.ndarray:
        """Vectorized ``__getitem__``."""
        masks = np.asarray(masks, dtype=np.int64)
        i = np.minimum(np.searchsorted(self.masks, masks), max(self.masks.shape[0] - 1, 0))
        if self.masks.shape[0] == 0:
            return np.zeros(masks.shape)
        hit = self.masks[i] == masks
        return np.where(hit, self.values[i], 0.0)

    def to_dense(self) -> np.ndarray:
        _check_dim(self.dim, MAX_TABLE_DIM)
        out = np.zeros(1 << self.dim)
        out[self.masks] = self.values
        return out

    def rescaled(self) -> Spectrum:
        return Spectrum(self.dim, self.masks, self.values * float(1 << self.dim))

    def as_dict(self) -> dict[int, float]:
        return {int(m): float(v) for m, v in zip(self.masks, self.values)}

    def to_json(self) -> str:
        keep = np.abs(self.values) >= 1e-15
        coeffs = [{"s": int(m), "v": float(v)} for m, v in zip(self.masks[keep], self.values[keep])]
        return json.dumps({"dim": self.dim, "coeffs": coeffs}, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text) -> Spectrum:
        obj = json.loads(text)
        c = obj["coeffs"]
        return cls(int(obj["dim"]), [e["s"] for e in c], [e["v"] for e in c])


def _table(f, dim=None):
    f = np.array(f, dtype=np.float64).ravel()
    d = f.shape[0].bit_length() - 1
    if f.shape[0] != 1 << d or (dim is not None and d != dim):
        raise DimensionError(f"function table length {f.shape[0]} is not 2^d")
    _check_dim(d, MAX_TABLE_DIM)
    return f, d


def uniform_fourier(f) -> Spectrum:
    """f_S = 2^-d sum_x f(x) chi_S(x) for every S, by fast Walsh-Hadamard transform."""
    buf, d = _table(f)
    kernels.fwht(buf)
    buf /= float(1 << d)
    return Spectrum.from_dense(d, buf)


def inverse_fourier(s: Spectrum) -> np.ndarray:
    """Function table f(x) = sum_S f_S chi_S(x)."""
    buf = s.to_dense()
    kernels.fwht(buf)
    return buf


def naive_fourier(f) -> np.ndarray:
    """O(4^d) reference transform; dense coefficient array indexed by mask."""
    f, d = _table(f)
    idx = np.arange(1 << d, dtype=np.int64)
    chi = kernels.parity(idx, idx).astype(np.float64)
    return (f @ chi) / float(1 << d)


def stochastic_coeff(dist: JointDistribution, s: SubsetMask) -> float:
    """a_S = 2^-d E[Y chi_S(X)], summed exactly over the table."""
    if s.dim != dist.dim:
        raise DimensionError("subset and distribution dimensions differ")
    chi = kernels.parity(np.arange(1 << dist.dim), np.array([s.bits]))[:, 0]
    return float(np.dot(dist.label_margin, chi)) / float(1 << dist.dim)


def stochastic_spectrum(dist: JointDistribution) -> Spectrum:
    """All a_S at once: the uniform transform of x -> E[Y 1{X=x}]."""
    return uniform_fourier(dist.label_margin)


def empirical_coeff(data: Dataset, s: SubsetMask) -> float:
    if s.dim != data.dim:
        raise DimensionError("subset and dataset dimensions differ")
    return float(empirical_coeffs(data, [s.bits])[0])


def empirical_coeffs(data: Dataset, masks) -> np.ndarray:
    """a_hat_S for each mask in ``masks`` (same order)."""
    masks = np.asarray(masks, dtype=np.int64)
    sums = kernels.label_parity_sums(data.xs, data.ys, masks)
    return sums / data.n / float(1 << data.dim)


def empirical_spectrum(data: Dataset, masks) -> Spectrum:
    masks = np.asarray(masks, dtype=np.int64)
    return Spectrum(data.dim, masks, empirical_coeffs(data, masks))


def concentration_bound(n: int, m: int, delta: float, d: int) -> float:
    """Deviation bound on sup_j |a_hat_Sj - a_Sj| stated for m subsets:

        2^-d sqrt(log(2m/delta) / (2n))

    This is the bound as published. Hoeffding for y*chi in [-1, 1] only
    supports the larger :func:`hoeffding_bound`; see that function.
    """
    _check_args(n, m, delta)
    return math.sqrt(math.log(2 * m / delta) / (2 * n)) / 2.0 ** d


def hoeffding_bound(n: int, m: int, delta: float, d: int) -> float:
    """Union-bounded Hoeffding deviation for a [-1, 1]-valued mean, scaled by 2^-d:

        2^-d sqrt(2 log(2m/delta) / n)
    """
    _check_args(n, m, delta)
    return math.sqrt(2.0 * math.log(2 * m / delta) / n) / 2.0 ** d


def _check_args(n, m, delta):
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta {delta} outside (0, 1)")
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
