"""Randomized identity and inequality suites over exact small instances.

Every trial draws from its own counter-based stream ``RngSeed(seed, trial)``,
so a failing instance is reproduced from the (seed, trial) pair alone.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cube import (Dataset, JointDistribution, RngSeed, SubsetMask,
                   parity_table, planted_junta_distribution, random_distribution, sample,
                   subset_masks)
from .fourier import (concentration_bound, empirical_coeffs, hoeffding_bound,
                      stochastic_spectrum)
from .learners import erm_bruteforce, l2_algorithm, l2_threshold, threshold_scan
from .oracle import (INEQ_SLACK, exact_loss, fourier_framework_bound,
                     fourier_projection, loss_from_spectrum, mmse_sign_bound,
                     mmse_sign_bound_squared, opt_exact, opt_fourier,
                     threshold_expectation)
from .regression import Predictor, SparsePolynomial, conditional_table

DEFAULT_SEED = 20240601


@dataclass
class CheckResult:
    check: str
    trials: int
    violations: int
    max_gap: float
    passed: bool
    failing: list[int] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"check": self.check, "trials": self.trials,
               "violations": self.violations, "max_gap": self.max_gap}
        out.update(self.extra)
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), separators=(",", ":"))


class _Tally:
    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.trials = self.violations = 0
        self.max_gap = -np.inf
        self.failing = []
        self.extra = {}

    def add(self, trial, gap):
        self.max_gap = max(self.max_gap, float(gap))
        if gap > self.tol:
            self.violations += 1
            if trial not in self.failing:
                self.failing.append(trial)

    def result(self, trials, passed=None):
        ok = self.violations == 0 if passed is None else passed
        return CheckResult(self.name, trials, self.violations, float(self.max_gap), ok,
                           self.failing, self.extra)


def _rng(seed, trial):
    return RngSeed(seed, trial).generator()


def _random_dist(rng, d):
    return random_distribution(d, rng, zero_fraction=0.3 if rng.random() < 0.3 else 0.0)


def _random_poly(rng, d, max_terms=8, scale=1.0):
    t = int(rng.integers(1, min(max_terms, 1 << d) + 1))
    masks = rng.choice(1 << d, size=t, replace=False)
    return SparsePolynomial(d, masks, rng.uniform(-scale, scale, size=t))


def _random_subset(rng, d, min_size=0):
    size = int(rng.integers(min_size, d + 1))
    idx = rng.choice(d, size=size, replace=False)
    return SubsetMask(int(sum(1 << int(i) for i in idx)), d)


def _table_poly(rng, d, j, lo=-2.0, hi=2.0):
    return SparsePolynomial.from_values(d, j, rng.uniform(lo, hi, size=1 << j.size))


def check_loss_identity(trials=100, seed=DEFAULT_SEED):
    """L = 1/2 - 1/2 <Y,g> = 1/4 ||Y - g||^2 on random (distribution, predictor) pairs."""
    tally = _Tally("loss-identity", 1e-12)
    for t in range(trials):
        rng = _rng(seed, t)
        d = int(rng.integers(1, 9))
        dist = _random_dist(rng, d)
        g = Predictor(_random_poly(rng, d), float(rng.uniform(-1, 1)))
        r = exact_loss(dist, g)
        tally.add(t, max(abs(r.zero_one - (0.5 - 0.5 * r.inner)), abs(r.zero_one - 0.25 * r.square)))
    return tally.result(trials)


def check_spectrum_identity(trials=100, seed=DEFAULT_SEED):
    """Loss from the label spectrum equals the exact loss."""
    tally = _Tally("spectrum-identity", 1e-10)
    for t in range(trials):
        rng = _rng(seed, t)
        d = int(rng.integers(1, 9))
        dist = _random_dist(rng, d)
        g = Predictor(_random_poly(rng, d), float(rng.uniform(-1, 1)))
        tally.add(t, abs(loss_from_spectrum(dist, g) - exact_loss(dist, g).zero_one))
    return tally.result(trials)


def _all_tables(w):
    t = np.arange(1 << w, dtype=np.int64)
    return 1 - 2 * ((t[:, None] >> np.arange(w)[None, :]) & 1)


def check_bayes_optimal(trials=50, seed=DEFAULT_SEED):
    """Brute force over all 2^(2^d) predictors: min loss = 1/2 - 1/2 E|E[Y|X]|, attained by sign E[Y|X]."""
    tally = _Tally("bayes-optimal", 1e-12)
    for t in range(trials):
        rng = _rng(seed, t)
        d = int(rng.integers(1, 5))
        dist = _random_dist(rng, d)
        g = _all_tables(1 << d)
        losses = np.where(g == 1, dist.table[:, 1], dist.table[:, 0]).sum(axis=1)
        formula = 0.5 - 0.5 * float(np.sum(np.abs(dist.label_margin)))
        full = SubsetMask((1 << d) - 1, d)
        cond, _ = conditional_table(dist, full)
        bayes = Predictor(SparsePolynomial.from_values(d, full, cond))
        tally.add(t, max(abs(losses.min() - formula), abs(exact_loss(dist, bayes).zero_one - formula)))
    return tally.result(trials)


def junta_bruteforce_opt(dist: JointDistribution, k: int) -> float:
    """min exact loss over every k-junta, each evaluated as an explicit predictor."""
    best = np.inf
    for m in subset_masks(dist.dim, k):
        j = SubsetMask(int(m), dist.dim)
        for row in _all_tables(1 << k):
            g = Predictor(SparsePolynomial.from_values(dist.dim, j, row.astype(float)))
            best = min(best, exact_loss(dist, g).zero_one)
    return float(best)


def check_junta_opt(trials=50, seed=DEFAULT_SEED, d=6, k=2):
    """Conditional-mean opt, Fourier opt and explicit junta enumeration agree."""
    tally = _Tally("junta-opt", 1e-12)
    for t in range(trials):
        rng = _rng(seed, t)
        dist = _random_dist(rng, d)
        oe, _ = opt_exact(dist, k)
        of = opt_fourier(dist, k)
        brute = junta_bruteforce_opt(dist, k)
        tally.add(t, max(abs(oe - of), abs(oe - brute)))
    return tally.result(trials)


def _suite5_dataset(rng):
    d = int(rng.integers(2, 7))
    k = int(rng.integers(1, 3))
    n = int(rng.integers(20, 201))
    dist = _random_dist(rng, d)
    data = sample(dist, n, RngSeed(int(rng.integers(1 << 62)), 0))
    return data, k


def check_erm_match(trials=50, seed=DEFAULT_SEED):
    """Training error of the L2 subset algorithm equals exhaustive k-junta ERM."""
    tally = _Tally("erm-match", 1e-12)
    square_rule_misses = 0
    for t in range(trials):
        data, k = _suite5_dataset(_rng(seed, t))
        _, r_l2 = l2_algorithm(data, k)
        _, r_erm = erm_bruteforce(data, k)
        tally.add(t, abs(r_l2.empirical_loss - r_erm.empirical_loss))
        _, r_sq = l2_algorithm(data, k, select="square")
        square_rule_misses += r_sq.empirical_loss > r_erm.empirical_loss + 1e-12
    tally.extra["square_rule_misses"] = int(square_rule_misses)
    return tally.result(trials)


def warmup_gaps(data: Dataset, k: int) -> tuple[float, float]:
    """(loss - square loss) for the L2 subset algorithm, (loss - square/2) for the threshold variant."""
    _, r1 = l2_algorithm(data, k)
    _, r3 = l2_threshold(data, k)
    return r1.empirical_loss - r1.square_loss, r3.empirical_loss - 0.5 * r3.square_loss


def check_sign_of_fit(trials=50, seed=DEFAULT_SEED):
    """0-1 loss <= square loss (sign of the fit) and <= square/2 (threshold scan)."""
    tally = _Tally("sign-of-fit", INEQ_SLACK)
    for t in range(trials):
        data, k = _suite5_dataset(_rng(seed, t))
        tally.add(t, max(warmup_gaps(data, k)))
    return tally.result(trials)


def check_mmse_sign(trials=500, seed=DEFAULT_SEED):
    """P(Y != sign h) <= opt_Z + U(||E[Y|Z] - h||_2), plus boundary probes."""
    tally = _Tally("mmse-sign", INEQ_SLACK)
    squared_form_violations = 0
    for t in range(trials):
        rng = _rng(seed, t)
        d = int(rng.integers(1, 7))
        dist = _random_dist(rng, d)
        j = None if rng.random() < 0.2 else _random_subset(rng, d)
        jj = j if j is not None else SubsetMask((1 << d) - 1, d)
        h = _table_poly(rng, d, jj)
        tally.add(t, mmse_sign_bound(dist, h, j).gap)
        squared_form_violations += not mmse_sign_bound_squared(dist, h, j).holds()
        # h = E[Y|Z]: the bound is tight
        cond, _ = conditional_table(dist, jj)
        tight = mmse_sign_bound(dist, SparsePolynomial.from_values(d, jj, cond), j)
        tally.add(t, abs(tight.lhs - tight.rhs))
        # h = 0: sign(0) = +1, so the loss is P(Y = -1)
        zero = mmse_sign_bound(dist, SparsePolynomial.zero(d), j)
        tally.add(t, max(zero.gap, abs(zero.lhs - float(dist.table[:, 1].sum()))))
    tally.extra["squared_form_violations"] = int(squared_form_violations)
    return tally.result(trials)


def check_fourier_framework(trials=200, seed=DEFAULT_SEED):
    """P(Y != sign h_J) <= 1/2 - 1/2 sum|f^J| + U(||2^d f^J - h_J||_unif)."""
    tally = _Tally("fourier-framework", INEQ_SLACK)
    for t in range(trials):
        rng = _rng(seed, t)
        d = int(rng.integers(1, 7))
        dist = _random_dist(rng, d)
        j = _random_subset(rng, d)
        tally.add(t, fourier_framework_bound(dist, j, _table_poly(rng, d, j)).gap)
        rescaled = fourier_projection(dist, j).scaled(float(1 << d))
        tally.add(t, fourier_framework_bound(dist, j, rescaled).gap)
        zero = fourier_framework_bound(dist, j, SparsePolynomial.zero(d))
        tally.add(t, max(zero.gap, 0.5 - zero.rhs))
    return tally.result(trials)


def check_threshold_average(trials=200, seed=DEFAULT_SEED):
    """E_theta[loss of sign(p - theta)] <= 1/2 square loss, and the theta scan is no worse."""
    tally = _Tally("threshold-average", INEQ_SLACK)
    for t in range(trials):
        rng = _rng(seed, t)
        d = int(rng.integers(1, 7))
        n = int(rng.integers(1, 201))
        data = sample(_random_dist(rng, d), n, RngSeed(int(rng.integers(1 << 62)), 0))
        p = _random_poly(rng, d, max_terms=1 << d, scale=2.0)
        chk = threshold_expectation(data, p)
        _, errs = threshold_scan(p.evaluate(data.xs), data.ys)
        tally.add(t, max(chk.gap, errs / data.n - chk.lhs))
    return tally.result(trials)


def sup_coefficient_deviation(data: Dataset, dist: JointDistribution, masks) -> float:
    """sup over masks of |a_hat_S - a_S|."""
    exact = stochastic_spectrum(dist).lookup(masks)
    return float(np.max(np.abs(empirical_coeffs(data, masks) - exact)))


def check_coefficient_deviation(trials=500, seed=DEFAULT_SEED, d=8, n=2000, k=2, delta=0.05, bound="stated"):
    """Frequency with which sup_S |a_hat_S - a_S| exceeds the bound stays <= delta + 0.03."""
    masks = subset_masks(d, k, "up_to_k")
    m = masks.shape[0]
    forms = {"stated": concentration_bound, "hoeffding": hoeffding_bound}
    if bound not in forms:
        raise ValueError(f"unknown bound form {bound!r}")
    b = forms[bound](n, m, delta, d)
    tally = _Tally("coefficient-deviation", 0.0)
    for t in range(trials):
        rng = _rng(seed, t)
        dist = random_distribution(d, rng)
        data = sample(dist, n, RngSeed(int(rng.integers(1 << 62)), 0))
        tally.add(t, sup_coefficient_deviation(data, dist, masks) - b)
    rate = tally.violations / trials
    allowed = delta + 0.03
    tally.extra.update({"bound_form": bound, "bound": b, "m": int(m),
                        "violation_rate": rate, "allowed_rate": allowed})
    return tally.result(trials, passed=rate <= allowed)


CHECKS = {
    "loss-identity": check_loss_identity,
    "spectrum-identity": check_spectrum_identity,
    "bayes-optimal": check_bayes_optimal,
    "junta-opt": check_junta_opt,
    "erm-match": check_erm_match,
    "sign-of-fit": check_sign_of_fit,
    "mmse-sign": check_mmse_sign,
    "fourier-framework": check_fourier_framework,
    "threshold-average": check_threshold_average,
    "coefficient-deviation": check_coefficient_deviation,
}

# short names accepted on the command line
ALIASES = {
    "eq1": "loss-identity",
    "lemma5": "spectrum-identity",
    "lemma2": "bayes-optimal",
    "cor12": "junta-opt",
    "thm1": "erm-match",
    "warmup": "sign-of-fit",
    "lemma3": "mmse-sign",
    "lemma6": "fourier-framework",
    "lemma8": "threshold-average",
    "lemma1": "coefficient-deviation",
}


def planted_parity(d=10, junta=(1, 4, 7), noise=0.1) -> JointDistribution:
    j = SubsetMask.from_indices(junta, d)
    return planted_junta_distribution(d, j, parity_table(j.size), noise=noise)
