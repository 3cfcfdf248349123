"""Boolean-cube primitives: points, subsets, parities, distributions, datasets.

Bit conventions (frozen; model and data files depend on them):

* a point x in {-1,+1}^d is a d-bit integer with bit j set iff x_{j+1} = -1;
* a subset S of [d] is a d-bit integer with bit j set iff j+1 is in S.

With these conventions chi_S(x) = (-1)^popcount(S & x).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import kernels

MAX_DIM = 24
MAX_TABLE_DIM = 20


class DimensionError(ValueError):
    """Raised on dimension mismatch or when a dimension cap is exceeded."""


def _check_dim(d, cap=MAX_DIM):
    if not 1 <= d <= cap:
        raise DimensionError(f"dimension {d} outside supported range 1..{cap}")


def popcount(v: int) -> int:
    return int(v).bit_count()


@dataclass(frozen=True)
class CubePoint:
    bits: int
    dim: int

    def __post_init__(self):
        _check_dim(self.dim)
        if self.bits < 0 or self.bits >> self.dim:
            raise DimensionError(f"point bits {self.bits:#x} exceed dim {self.dim}")

    @classmethod
    def from_coords(cls, coords) -> CubePoint:
        bits = 0
        for j, c in enumerate(coords):
            if c not in (1, -1):
                raise ValueError(f"coordinate {c!r} is not +1/-1")
            if c == -1:
                bits |= 1 << j
        return cls(bits, len(coords))

    def coord(self, i: int) -> int:
        """Coordinate x_i for 1-based i."""
        if not 1 <= i <= self.dim:
            raise IndexError(i)
        return -1 if (self.bits >> (i - 1)) & 1 else 1

    def coords(self) -> tuple[int, ...]:
        return tuple(self.coord(i) for i in range(1, self.dim + 1))


@dataclass(frozen=True)
class SubsetMask:
    bits: int
    dim: int

    def __post_init__(self):
        _check_dim(self.dim)
        if self.bits < 0 or self.bits >> self.dim:
            raise DimensionError(f"subset bits {self.bits:#x} exceed dim {self.dim}")

    @classmethod
    def from_indices(cls, indices, dim: int) -> SubsetMask:
        """Build from 1-based coordinate indices."""
        bits = 0
        for i in indices:
            if not 1 <= i <= dim:
                raise DimensionError(f"index {i} outside 1..{dim}")
            bits |= 1 << (i - 1)
        return cls(bits, dim)

    @property
    def size(self) -> int:
        return popcount(self.bits)

    def indices(self) -> tuple[int, ...]:
        return tuple(j + 1 for j in range(self.dim) if (self.bits >> j) & 1)

    def positions(self) -> np.ndarray:
        """0-based bit positions, ascending."""
        return np.array([j for j in range(self.dim) if (self.bits >> j) & 1], dtype=np.int64)

    def __len__(self):
        return self.size


def chi_eval(s: SubsetMask, x: CubePoint) -> int:
    if s.dim != x.dim:
        raise DimensionError(f"subset dim {s.dim} != point dim {x.dim}")
    return -1 if popcount(s.bits & x.bits) & 1 else 1


def enumerate_subsets(d: int, k: int, mode: str = "exactly_k") -> list[SubsetMask]:
    """All subsets of [d] of size k (or up to k) in ascending mask order."""
    return [SubsetMask(int(b), d) for b in subset_masks(d, k, mode)]


def subset_masks(d: int, k: int, mode: str = "exactly_k") -> np.ndarray:
    """Array form of :func:`enumerate_subsets`."""
    _check_dim(d)
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    if mode == "exactly_k":
        sizes = [k]
    elif mode == "up_to_k":
        sizes = range(k + 1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = [sum(1 << j for j in c) for size in sizes for c in combinations(range(d), size)]
    return np.sort(np.array(out, dtype=np.int64))


def mask_positions(masks, k: int) -> np.ndarray:
    """(m, k) array of the ascending bit positions of equal-size masks."""
    masks = np.asarray(masks, dtype=np.int64)
    pos = np.zeros((masks.shape[0], k), dtype=np.int64)
    for r, m in enumerate(masks):
        bits = [j for j in range(63) if (int(m) >> j) & 1]
        if len(bits) != k:
            raise ValueError(f"mask {int(m):#x} does not have {k} bits")
        pos[r] = bits
    return pos


def deposit_bits(local, positions) -> np.ndarray:
    """Inverse of extract_bits: scatter compact indices onto ``positions`` (pdep)."""
    local = np.asarray(local, dtype=np.int64)
    out = np.zeros_like(local)
    for b, p in enumerate(positions):
        out |= ((local >> b) & 1) << int(p)
    return out


def local_hadamard(k: int) -> np.ndarray:
    """2^k x 2^k matrix H[s, z] = (-1)^popcount(s & z)."""
    idx = np.arange(1 << k, dtype=np.int64)
    return kernels.parity(idx, idx).astype(np.float64)


@dataclass(frozen=True)
class RngSeed:
    """Key of a counter-based (Philox) stream: equal keys give equal streams."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for v in (self.seed, self.stream):
            if not 0 <= v < 1 << 64:
                raise ValueError(f"seed/stream {v} outside unsigned 64-bit range")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> RngSeed:
        return RngSeed(self.seed, stream)


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Explicit probability table over {-1,+1}^d x {-1,+1}.

    ``table[x, 0]`` is P(X=x, Y=+1) and ``table[x, 1]`` is P(X=x, Y=-1).
    """

    dim: int
    table: np.ndarray

    def __post_init__(self):
        _check_dim(self.dim, MAX_TABLE_DIM)
        t = np.asarray(self.table, dtype=np.float64).reshape(1 << self.dim, 2)
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = t.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "table", _readonly(t))

    @classmethod
    def normalized(cls, dim, weights) -> JointDistribution:
        w = np.asarray(weights, dtype=np.float64).reshape(1 << dim, 2)
        return cls(dim, w / w.sum())

    @property
    def marginal(self) -> np.ndarray:
        """P(X = x) for every point index."""
        return self.table.sum(axis=1)

    @property
    def label_margin(self) -> np.ndarray:
        """P(X=x, Y=+1) - P(X=x, Y=-1), i.e. E[Y 1{X=x}]."""
        return self.table[:, 0] - self.table[:, 1]

    def conditional_mean(self) -> np.ndarray:
        """E[Y | X=x]; 0 where P(X=x) = 0."""
        px = self.marginal
        return np.divide(self.label_margin, px, out=np.zeros_like(px), where=px > 0)

    def __eq__(self, other):
        return (isinstance(other, JointDistribution) and self.dim == other.dim
                and np.array_equal(self.table, other.table))

    def to_json(self) -> str:
        entries = []
        for x in range(1 << self.dim):
            for col, y in ((0, 1), (1, -1)):
                p = float(self.table[x, col])
                if p != 0.0:
                    entries.append({"x": x, "y": y, "p": p})
        return json.dumps({"dim": self.dim, "table": entries}, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> JointDistribution:
        obj = json.loads(text)
        d = int(obj["dim"])
        _check_dim(d, MAX_TABLE_DIM)
        t = np.zeros((1 << d, 2))
        for e in obj["table"]:
            x, y = int(e["x"]), int(e["y"])
            if not 0 <= x < 1 << d or y not in (1, -1):
                raise ValueError(f"bad table entry {e!r}")
            t[x, 0 if y == 1 else 1] += float(e["p"])
        return cls(d, t)

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> JointDistribution:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, eq=False)
class Dataset:
    """n labeled samples; ``xs`` holds point masks and ``ys`` labels in {-1,+1}."""

    dim: int
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        _check_dim(self.dim)
        xs = np.asarray(self.xs, dtype=np.int64).ravel()
        ys = np.asarray(self.ys, dtype=np.int64).ravel()
        if xs.shape != ys.shape:
            raise ValueError("xs and ys differ in length")
        if xs.size == 0:
            raise ValueError("dataset must hold at least one sample")
        if np.any(xs < 0) or np.any(xs >> self.dim):
            raise DimensionError(f"sample point outside {{-1,+1}}^{self.dim}")
        if not np.all((ys == 1) | (ys == -1)):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "xs", _readonly(xs))
        object.__setattr__(self, "ys", _readonly(ys.astype(np.int8)))

    @classmethod
    def from_samples(cls, samples) -> Dataset:
        samples = list(samples)
        if not samples:
            raise ValueError("dataset must hold at least one sample")
        d = samples[0][0].dim
        if any(p.dim != d for p, _ in samples):
            raise DimensionError("samples have mixed dimensions")
        return cls(d, [p.bits for p, _ in samples], [y for _, y in samples])

    @property
    def n(self) -> int:
        return int(self.xs.shape[0])

    def __len__(self):
        return self.n

    @property
    def samples(self) -> list[tuple[CubePoint, int]]:
        return [(CubePoint(int(x), self.dim), int(y)) for x, y in zip(self.xs, self.ys)]

    def head(self, n: int) -> Dataset:
        return Dataset(self.dim, self.xs[:n], self.ys[:n])

    def __eq__(self, other):
        return (isinstance(other, Dataset) and self.dim == other.dim
                and np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join([f"x{i}" for i in range(1, self.dim + 1)] + ["y"]) + "\n")
        shifts = np.arange(self.dim, dtype=np.int64)
        coords = 1 - 2 * ((self.xs[:, None] >> shifts[None, :]) & 1)
        for row, y in zip(coords, self.ys):
            buf.write(",".join(map(str, row.tolist())) + f",{int(y)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> Dataset:
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("line 1: empty CSV") from None
        d = len(header) - 1
        expected = [f"x{i}" for i in range(1, d + 1)] + ["y"]
        if d < 1 or [h.strip() for h in header] != expected:
            raise ValueError(f"line 1: header must be {','.join(expected) if d >= 1 else 'x1,...,xd,y'}")
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise ValueError(f"line {lineno}: expected {d + 1} fields, got {len(row)}")
            vals = []
            for f in row:
                f = f.strip()
                if f not in ("1", "-1"):
                    raise ValueError(f"line {lineno}: value {f!r} is not 1 or -1")
                vals.append(int(f))
            xs.append(sum(1 << j for j, v in enumerate(vals[:-1]) if v == -1))
            ys.append(vals[-1])
        if not xs:
            raise ValueError("CSV holds no samples")
        return cls(d, xs, ys)

    def save(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path) -> Dataset:
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))


def sample(dist: JointDistribution, n: int, seed: RngSeed = RngSeed()) -> Dataset:
    """n i.i.d. draws from ``dist`` by inverse CDF over the flattened table."""
    if n < 1:
        raise ValueError("n must be >= 1")
    flat = dist.table.ravel()
    cdf = np.cumsum(flat)
    u = seed.generator().random(n) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    last = int(np.flatnonzero(flat)[-1])
    idx = np.minimum(idx, last)
    return Dataset(dist.dim, idx >> 1, 1 - 2 * (idx & 1))


def empirical_distribution(data: Dataset) -> JointDistribution:
    _check_dim(data.dim, MAX_TABLE_DIM)
    flat = np.bincount(data.xs * 2 + (data.ys < 0), minlength=2 << data.dim)
    return JointDistribution(data.dim, flat.astype(np.float64) / data.n)


def planted_junta_distribution(d: int, j: SubsetMask, truth_table, marginal=None,
                               noise: float = 0.0) -> JointDistribution:
    """Label = f(x restricted to j), flipped independently with probability ``noise``.

    ``truth_table`` maps the compact restriction index z (bit b of z set iff the
    b-th coordinate of j, ascending, is -1) to +1/-1; a sequence of length 2^|j|
    or a callable on z. ``marginal`` defaults to uniform on {-1,+1}^d.
    """
    _check_dim(d, MAX_TABLE_DIM)
    if j.dim != d:
        raise DimensionError("junta subset dimension mismatch")
    if not 0.0 <= noise < 0.5:
        raise ValueError(f"noise {noise} outside [0, 1/2)")
    k = j.size
    if callable(truth_table):
        f = np.array([truth_table(z) for z in range(1 << k)], dtype=np.int64)
    else:
        f = np.asarray(truth_table, dtype=np.int64).ravel()
    if f.shape[0] != 1 << k or not np.all((f == 1) | (f == -1)):
        raise ValueError(f"truth table must hold 2^{k} values in {{-1,+1}}")
    px = np.full(1 << d, 1.0 / (1 << d)) if marginal is None else np.asarray(marginal, dtype=np.float64)
    if px.shape != (1 << d,) or np.any(px < 0) or abs(px.sum() - 1.0) > 1e-12:
        raise ValueError("marginal must be a probability vector over 2^d points")
    fx = f[kernels.extract_bits(np.arange(1 << d), j.positions())]
    agree = np.where(fx == 1, 0, 1)
    t = np.empty((1 << d, 2))
    t[np.arange(1 << d), agree] = px * (1.0 - noise)
    t[np.arange(1 << d), 1 - agree] = px * noise
    return JointDistribution(d, t)


def parity_table(k: int) -> np.ndarray:
    """Truth table of chi over all k junta coordinates, indexed by restriction."""
    z = np.arange(1 << k, dtype=np.int64)
    return 1 - 2 * (np.bitwise_count(z) & 1).astype(np.int64)


def random_distribution(d: int, rng: np.random.Generator, zero_fraction: float = 0.0) -> JointDistribution:
    """Dirichlet(1) table; optionally zero out a fraction of points (keeps >= 1)."""
    w = rng.dirichlet(np.ones(2 << d)).reshape(1 << d, 2)
    if zero_fraction > 0:
        drop = rng.random(1 << d) < zero_fraction
        if drop.all():
            drop[rng.integers(1 << d)] = False
        w[drop] = 0.0
    return JointDistribution.normalized(d, w)


def n_subsets_up_to(d: int, k: int) -> int:
    return sum(math.comb(d, i) for i in range(k + 1))
