import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from juntapac import regression
from juntapac.cube import (CubePoint, Dataset, JointDistribution, SubsetMask,
                           chi_eval, empirical_distribution, random_distribution,
                           subset_masks)
from juntapac.fourier import stochastic_spectrum
from juntapac.kernels import extract_bits, parity
from juntapac.regression import (Predictor, SparsePolynomial, conditional_table,
                                 fourier_projection, least_squares_fit,
                                 mmse_projection_exact, psd_solve, u_poly)

from conftest import planted, random_dataset


def _design(data, j):
    masks = [s for s in range(1 << data.dim) if s & ~j.bits == 0]
    return np.array(masks), parity(data.xs, np.array(masks)).astype(float)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.data())
def test_polynomial_evaluation_matches_character_sum(d, data):
    terms = data.draw(st.dictionaries(st.integers(0, (1 << d) - 1), st.floats(-3, 3), max_size=6))
    p = SparsePolynomial.from_terms(d, terms)
    for x in range(1 << d):
        want = sum(c * chi_eval(SubsetMask(s, d), CubePoint(x, d)) for s, c in terms.items())
        assert p.evaluate([x])[0] == pytest.approx(want, abs=1e-12)
    assert p.degree == max((bin(s).count("1") for s, c in terms.items() if c), default=0)


def test_large_support_uses_direct_evaluation(rng):
    d = 22
    p = SparsePolynomial(d, [0, (1 << 22) - 1, 5], [0.5, -1.0, 2.0])
    xs = rng.integers(0, 1 << d, 50)
    want = 0.5 - parity(xs, [(1 << 22) - 1])[:, 0] + 2.0 * parity(xs, [5])[:, 0]
    assert np.allclose(p.evaluate(xs), want)


def test_realizable_character_is_recovered_exactly():
    d, j = 5, SubsetMask.from_indices([2, 4], 5)
    xs = np.arange(1 << d)
    ys = parity(xs, [j.bits])[:, 0]
    p = least_squares_fit(Dataset(d, xs, ys), j)
    assert np.allclose(p.terms[j.bits], 1.0) and np.allclose(np.delete(p.coeffs, list(p.masks).index(j.bits)), 0, atol=1e-12)
    assert np.allclose(p.evaluate(xs), ys)


def test_empty_subset_gives_label_mean(rng):
    data = random_dataset(rng, 4, 37)
    p = least_squares_fit(data, SubsetMask(0, 4))
    assert p.terms == {0: pytest.approx(float(np.mean(data.ys)))}


@pytest.mark.parametrize("seed", range(10))
def test_square_loss_matches_dense_pseudoinverse(seed):
    r = np.random.default_rng(seed)
    data = random_dataset(r, 6, int(r.integers(3, 60)))
    j = SubsetMask(int(r.choice(subset_masks(6, 2))), 6)
    masks, X = _design(data, j)
    c = np.linalg.pinv(X) @ data.ys
    want = np.mean((data.ys - X @ c) ** 2)
    p = least_squares_fit(data, j)
    assert np.mean((data.ys - p.evaluate(data.xs)) ** 2) == pytest.approx(want, abs=1e-8)
    # minimum norm: agrees with pinv coefficients
    assert np.allclose(p.coeffs, c, atol=1e-8)


def test_fit_equals_projection_under_empirical_distribution(rng):
    data = random_dataset(rng, 5, 80)
    emp = empirical_distribution(data)
    for bits in subset_masks(5, 3):
        j = SubsetMask(int(bits), 5)
        a, b = least_squares_fit(data, j), mmse_projection_exact(emp, j)
        assert np.allclose(a.table(), b.table(), atol=1e-10)


def test_projection_of_noisy_planted_junta():
    dist = planted(6, [1, 3, 6], 0.15)
    pi = mmse_projection_exact(dist, SubsetMask.from_indices([1, 3, 6], 6))
    f = parity(np.arange(64), [SubsetMask.from_indices([1, 3, 6], 6).bits])[:, 0]
    assert np.allclose(pi.table(), 0.7 * f)


def test_projection_of_independent_label():
    px = np.random.default_rng(2).dirichlet(np.ones(16))
    mu = 0.3
    dist = JointDistribution(4, np.stack([px * (1 + mu) / 2, px * (1 - mu) / 2], axis=1))
    for bits in (0, 0b11, 0b1011):
        assert np.allclose(mmse_projection_exact(dist, SubsetMask(bits, 4)).table(), mu)


def _norm2(dist, values):
    # ||Y - v||_{2,D}^2
    t = dist.table
    return float(np.sum(t[:, 0] * (1 - values) ** 2 + t[:, 1] * (1 + values) ** 2))


def test_projection_minimizes_square_error_over_random_probes(rng):
    dist = random_distribution(5, rng, zero_fraction=0.2)
    j = SubsetMask.from_indices([1, 2, 4], 5)
    best = _norm2(dist, mmse_projection_exact(dist, j).table())
    for _ in range(1000):
        p = SparsePolynomial.from_values(5, j, rng.uniform(-2, 2, 8))
        assert best <= _norm2(dist, p.table()) + 1e-12


def test_projection_residual_is_orthogonal(rng):
    dist = random_distribution(5, rng)
    j = SubsetMask.from_indices([2, 5], 5)
    pi = mmse_projection_exact(dist, j).table()
    x = np.arange(32)
    for s in (0, 0b00010, 0b10000, 0b10010):
        chi = parity(x, [s])[:, 0]
        inner = np.sum(dist.label_margin * chi) - np.sum(dist.marginal * pi * chi)
        assert abs(inner) <= 1e-10


def test_unobserved_restriction_projects_to_zero():
    t = np.zeros((4, 2))
    t[0, 0], t[1, 1] = 0.5, 0.5  # x2 never -1
    cond, pz = conditional_table(JointDistribution(2, t), SubsetMask(0b11, 2))
    assert cond.tolist() == [1.0, -1.0, 0.0, 0.0] and pz[2:].sum() == 0


def test_fourier_projection_identities(rng):
    d = 5
    j = SubsetMask.from_indices([1, 4], d)
    uni = random_distribution(d, rng)
    uni = JointDistribution.normalized(d, uni.table / uni.marginal[:, None])  # uniform marginal
    assert np.allclose((2 ** d) * fourier_projection(uni, j).table(), mmse_projection_exact(uni, j).table())
    chi = planted(d, [4])
    assert np.allclose(fourier_projection(chi, j).table(), parity(np.arange(32), [0b1000])[:, 0] / 32)
    for _ in range(20):
        dist = random_distribution(d, rng, zero_fraction=0.3)
        f = fourier_projection(dist, j).table()
        cond, pz = conditional_table(dist, j)
        z = extract_bits(np.arange(32), j.positions())
        seen = (pz[z] > 0) & (np.abs(cond[z]) > 1e-12)
        assert np.array_equal(np.sign(f[seen]), np.sign(cond[z][seen]))
    data = random_dataset(rng, d, 40)
    assert np.allclose(fourier_projection(data, j).table(), fourier_projection(empirical_distribution(data), j).table())


def test_u_poly_values_and_shape():
    assert u_poly(0.0) == 0.0 and u_poly(1.0) == 4.0 and u_poly(0.5) == 1.25
    x = np.linspace(0, 5, 501)
    u = u_poly(x)
    assert np.all(np.diff(u) > 0) and np.all(np.diff(u, 2) >= -1e-12)
    small = x[x <= 1]
    assert np.all(u_poly(small) <= 4 * small + 1e-15)
    with pytest.raises(ValueError):
        u_poly(-0.1)


def test_sign_of_zero_is_plus_one():
    assert regression.sign(np.array([0.0, -0.0, -1e-300, 2.0])).tolist() == [1, 1, -1, 1]
    pred = Predictor(SparsePolynomial.zero(3))
    assert np.all(pred.table() == 1)


def test_predictor_json_round_trip(tmp_path, rng):
    p = SparsePolynomial(4, [0, 3, 9], rng.normal(size=3))
    g = Predictor(p, 0.25)
    text = g.to_json()
    doc = json.loads(text)
    assert doc["type"] == "sign-poly" and doc["dim"] == 4 and doc["theta"] == 0.25
    again = Predictor.from_json(text)
    assert again.to_json() == text and np.array_equal(again.table(), g.table())
    with pytest.raises(ValueError):
        Predictor(p, 1.5)


def test_psd_solve_minimum_norm():
    gram = np.diag([2.0, 0.0])
    assert np.allclose(psd_solve(gram, np.array([4.0, 0.0])), [2.0, 0.0])
