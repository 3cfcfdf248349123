import statistics

import numpy as np
import pytest

from juntapac.cube import (Dataset, JointDistribution, RngSeed, SubsetMask,
                           empirical_distribution, random_distribution, sample)
from juntapac.learners import (LEARNERS, erm_bruteforce, l2_algorithm,
                               l2_threshold, learn, sign_mmse,
                               stochastic_fourier, threshold_candidates,
                               threshold_scan)
from juntapac.oracle import (empirical_loss, exact_loss, opt_exact,
                             threshold_expectation)
from juntapac.regression import mmse_projection_exact

from conftest import planted, random_dataset


@pytest.mark.parametrize("name", sorted(LEARNERS))
def test_reported_loss_is_reproduced_by_the_predictor(name, rng):
    for _ in range(10):
        data = random_dataset(rng, 6, int(rng.integers(5, 150)))
        pred, rep = learn(name, data, 2)
        assert rep.empirical_loss == empirical_loss(data, pred).zero_one
        assert pred.subset == rep.subset


@pytest.mark.parametrize("name", ["l2", "fourier", "erm", "threshold", "mmse-sign"])
def test_realizable_planted_junta(name):
    dist = planted(6, [2, 5])
    data = sample(dist, 500, RngSeed(1))
    pred, rep = learn(name, data, 2)
    assert rep.empirical_loss == 0.0
    if name != "threshold":  # degree-2 fit over all variables cannot express the parity
        assert exact_loss(dist, pred).zero_one == 0.0


def test_l2_with_k_equal_d_is_sign_of_full_table(rng):
    data = random_dataset(rng, 5, 60)
    pred, rep = l2_algorithm(data, 5)
    cond = empirical_distribution(data).conditional_mean()
    seen = np.unique(data.xs)
    clear = seen[np.abs(cond[seen]) > 1e-9]
    assert np.array_equal(pred.predict(clear), np.where(cond[clear] > 0, 1, -1))


@pytest.mark.parametrize("seed", range(50))
def test_l2_matches_erm_and_beats_fourier(seed):
    r = np.random.default_rng(seed)
    d, k = int(r.integers(2, 7)), int(r.integers(1, 3))
    data = random_dataset(r, d, int(r.integers(20, 201)))
    _, l2 = l2_algorithm(data, k)
    _, erm = erm_bruteforce(data, k)
    _, fo = stochastic_fourier(data, k)
    assert abs(l2.empirical_loss - erm.empirical_loss) <= 1e-12
    assert erm.empirical_loss <= fo.empirical_loss
    assert l2.empirical_loss <= l2.square_loss + 1e-12


def test_square_selection_rule_can_miss_the_minimum():
    misses = 0
    for seed in range(50):
        r = np.random.default_rng(seed)
        data = random_dataset(r, int(r.integers(2, 7)), int(r.integers(20, 201)))
        _, lit = l2_algorithm(data, 2, select="square")
        _, erm = erm_bruteforce(data, 2)
        assert lit.empirical_loss >= erm.empirical_loss
        misses += lit.empirical_loss > erm.empirical_loss
    assert misses > 0


def test_erm_equals_opt_on_empirical_distribution(rng):
    for _ in range(10):
        data = random_dataset(rng, 5, 80)
        for k in (1, 2):
            _, rep = erm_bruteforce(data, k)
            assert rep.empirical_loss == pytest.approx(opt_exact(empirical_distribution(data), k)[0], abs=1e-12)


def test_erm_caps(rng):
    with pytest.raises(ValueError):
        erm_bruteforce(random_dataset(rng, 6, 10), 5)
    with pytest.raises(ValueError):
        erm_bruteforce(random_dataset(rng, 17, 10), 2)
    with pytest.raises(ValueError):
        learn("nope", random_dataset(rng, 3, 5), 1)


def test_fourier_realizable_uniform_parity():
    dist = planted(8, [3, 8])
    pred, _ = stochastic_fourier(sample(dist, 2000, RngSeed(5)), 2)
    assert exact_loss(dist, pred).zero_one == 0.0


def test_fourier_and_l2_agree_on_uniform_marginal():
    dist = planted(7, [1, 5], 0.2)
    agree = 0
    for s in range(50):
        data = sample(dist, 400, RngSeed(11, s))
        _, a = l2_algorithm(data, 2)
        _, b = stochastic_fourier(data, 2)
        losses = sorted(a.subset_losses.values())
        if losses[0] < losses[1]:  # non-degenerate winner
            agree += a.subset == b.subset
            assert a.subset == b.subset
    assert agree > 40


def test_fair_coin_label_gives_half():
    coin = JointDistribution(5, np.full((32, 2), 1 / 64))
    data = sample(coin, 300, RngSeed(2))
    for name in ("l2", "fourier", "erm"):
        pred, _ = learn(name, data, 2)
        assert exact_loss(coin, pred).zero_one == pytest.approx(0.5)


def test_threshold_scan_is_exhaustive(rng):
    for _ in range(100):
        v = np.round(rng.uniform(-1.5, 1.5, 30), 1)
        y = np.where(rng.random(30) < 0.5, 1, -1)
        theta, errs = threshold_scan(v, y)
        grid = np.linspace(-1, 1, 4001)
        brute = [np.sum(np.where(v - t >= 0, 1, -1) != y) for t in grid]
        assert errs == min(brute) and -1 <= theta <= 1
        assert errs == np.sum(np.where(v - theta >= 0, 1, -1) != y)
    assert threshold_candidates([0.5, 0.5, 3.0]).tolist() == [-1.0, 1.0]


def test_threshold_learner_bounds(rng):
    for _ in range(100):
        data = random_dataset(rng, 6, int(rng.integers(10, 120)))
        pred, rep = l2_threshold(data, 2)
        assert rep.empirical_loss <= 0.5 * rep.square_loss + 1e-12
        assert rep.empirical_loss <= threshold_expectation(data, pred.poly).lhs + 1e-12


def test_threshold_monotone_one_junta():
    d = 4
    xs = np.arange(16).repeat(3)
    ys = np.where(xs & 1, -1, 1)
    pred, rep = l2_threshold(Dataset(d, xs, ys), 1)
    assert rep.empirical_loss == 0.0


def test_threshold_warns_when_underdetermined(rng, caplog):
    with caplog.at_level("WARNING"):
        l2_threshold(random_dataset(rng, 8, 10), 2)
    assert "pseudoinverse" in caplog.text


def test_sign_mmse_matches_empirical_bayes(rng):
    data = random_dataset(rng, 5, 200)
    _, rep = sign_mmse(data)
    emp = empirical_distribution(data)
    assert rep.empirical_loss == pytest.approx(0.5 - 0.5 * np.sum(np.abs(emp.label_margin)), abs=1e-12)
    pred, _ = sign_mmse(Dataset(4, [9] * 5, [1] * 5))
    assert pred.predict([9])[0] == 1


def test_sign_mmse_agrees_with_bayes_rule():
    dist = planted(6, [1, 2, 3], 0.2)
    pred, _ = sign_mmse(sample(dist, 10 ** 5, RngSeed(8)))
    bayes = np.where(dist.conditional_mean() > 0, 1, -1)
    assert np.array_equal(pred.table(), bayes)


def test_median_loss_non_increasing_in_n():
    dist = planted(8, [2, 4, 7], 0.15)
    for name in ("l2", "fourier"):
        medians = []
        for n in (250, 1000, 4000):
            losses = [exact_loss(dist, learn(name, sample(dist, n, RngSeed(21, s)), 3)[0]).zero_one
                      for s in range(20)]
            medians.append(statistics.median(losses))
        assert all(b <= a + 0.02 for a, b in zip(medians, medians[1:])), medians
