"""Seeded experiment runner: learn on nested samples, score against exact loss."""
from __future__ import annotations

import csv
import io
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .cube import (JointDistribution, RngSeed, SubsetMask, parity_table,
                   planted_junta_distribution, sample)
from .learners import LEARNERS, learn
from .oracle import exact_loss, opt_exact

RESULTS_HEADER = ["algorithm", "n", "seed", "emp_loss", "exact_loss", "opt", "subset_mask", "seconds"]
SUMMARY_HEADER = ["algorithm", "n", "median_exact_loss"]


def truth_table(name, k: int) -> np.ndarray:
    """Named k-input truth table indexed by restriction (bit b set iff coordinate b is -1)."""
    z = np.arange(1 << k, dtype=np.int64)
    minus = np.bitwise_count(z).astype(np.int64)
    if isinstance(name, (list, tuple)):
        return np.asarray(name, dtype=np.int64)
    if name == "parity":
        return parity_table(k)
    if name == "majority":
        return np.where(2 * minus > k, -1, 1)
    if name == "and":  # -1 only when every coordinate is -1
        return np.where(minus == k, -1, 1)
    if name == "or":
        return np.where(minus > 0, -1, 1)
    if name == "dictator":
        return np.where(z & 1, -1, 1)
    if "," in str(name):
        return np.array([int(v) for v in str(name).split(",")], dtype=np.int64)
    raise ValueError(f"unknown truth table {name!r}")


def product_marginal(d: int, bias: float) -> np.ndarray:
    """P(x) with independent coordinates, P(x_j = -1) = bias."""
    if not 0.0 <= bias <= 1.0:
        raise ValueError("bias must lie in [0, 1]")
    minus = np.bitwise_count(np.arange(1 << d, dtype=np.int64)).astype(np.float64)
    p = bias ** minus * (1 - bias) ** (d - minus)
    return p / p.sum()


def distribution_from_spec(spec: dict, base_dir: Path | None = None) -> JointDistribution:
    """Build a distribution from a config table: ``path``, a planted junta, or ``uniform_label``."""
    if "path" in spec:
        p = Path(spec["path"])
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return JointDistribution.load(p)
    d = int(spec["d"])
    marginal = product_marginal(d, float(spec["bias"])) if "bias" in spec else None
    if spec.get("uniform_label"):
        px = np.full(1 << d, 1.0 / (1 << d)) if marginal is None else marginal
        return JointDistribution(d, np.stack([px / 2, px / 2], axis=1))
    j = SubsetMask.from_indices([int(i) for i in spec["junta"]], d)
    table = truth_table(spec.get("table", "parity"), j.size)
    return planted_junta_distribution(d, j, table, marginal, float(spec.get("eta", 0.0)))


@dataclass
class ExperimentConfig:
    distribution: dict
    algorithms: list[str]
    k: int
    n_grid: list[int]
    seeds: int = 1
    delta: float = 0.05
    output: str | None = None
    seed: int = 0
    timing: bool = True
    base_dir: Path | None = field(default=None, repr=False)

    def __post_init__(self):
        bad = [a for a in self.algorithms if a not in LEARNERS]
        if bad or not self.algorithms:
            raise ValueError(f"unknown algorithms {bad}; choose from {sorted(LEARNERS)}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])) or not self.n_grid:
            raise ValueError("n_grid must be non-empty and strictly increasing")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        known = {"distribution", "algorithms", "k", "n_grid", "seeds", "delta", "output", "seed", "timing"}
        extra = set(raw) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(base_dir=path.parent, **raw)


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    n: int
    seed: int
    emp_loss: float
    exact_loss: float
    opt: float
    subset_mask: int
    seconds: float

    def fields(self):
        return [self.algorithm, str(self.n), str(self.seed), repr(self.emp_loss), repr(self.exact_loss),
                repr(self.opt), str(self.subset_mask), repr(self.seconds)]


def run_experiment(cfg: ExperimentConfig):
    """Rows sorted by (algorithm, n, seed) and the median exact loss per (algorithm, n).

    The dataset for seed index s is the first n draws of stream (cfg.seed, s),
    so the same seed yields nested datasets across the n grid.
    """
    dist = distribution_from_spec(cfg.distribution, cfg.base_dir)
    opt, _ = opt_exact(dist, cfg.k)
    rows = []
    for s in range(cfg.seeds):
        full = sample(dist, cfg.n_grid[-1], RngSeed(cfg.seed, s))
        for n in cfg.n_grid:
            data = full.head(n)
            for alg in cfg.algorithms:
                pred, rep = learn(alg, data, cfg.k)
                rows.append(ResultRow(alg, n, s, rep.empirical_loss, exact_loss(dist, pred).zero_one,
                                      opt, rep.subset, rep.seconds if cfg.timing else 0.0))
    rows.sort(key=lambda r: (r.algorithm, r.n, r.seed))
    summary = {}
    for alg in sorted(set(cfg.algorithms)):
        for n in cfg.n_grid:
            summary[(alg, n)] = statistics.median(r.exact_loss for r in rows if r.algorithm == alg and r.n == n)
    return rows, summary


def results_csv(rows, summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in rows:
        w.writerow(r.fields())
    buf.write("\n")
    w.writerow(SUMMARY_HEADER)
    for (alg, n), med in summary.items():
        w.writerow([alg, n, repr(float(med))])
    return buf.getvalue()


def parse_results_csv(text: str):
    """Inverse of :func:`results_csv`."""
    main, _, tail = text.partition("\n\n")
    reader = csv.reader(io.StringIO(main))
    if next(reader) != RESULTS_HEADER:
        raise ValueError("unexpected results header")
    rows = [ResultRow(a, int(n), int(s), float(e), float(x), float(o), int(m), float(t))
            for a, n, s, e, x, o, m, t in reader]
    summary = {}
    if tail:
        reader = csv.reader(io.StringIO(tail))
        if next(reader) != SUMMARY_HEADER:
            raise ValueError("unexpected summary header")
        for alg, n, med in reader:
            summary[(alg, int(n))] = float(med)
    return rows, summary
