import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from juntapac.cube import (CubePoint, Dataset, DimensionError, JointDistribution,
                           RngSeed, SubsetMask, chi_eval, deposit_bits,
                           empirical_distribution, enumerate_subsets,
                           local_hadamard, mask_positions, n_subsets_up_to,
                           random_distribution, sample, subset_masks)
from juntapac.kernels import extract_bits

from conftest import planted


def test_chi_examples():
    x = CubePoint.from_coords((1, -1, 1, -1))
    assert chi_eval(SubsetMask(0, 4), x) == 1
    assert chi_eval(SubsetMask.from_indices([1, 3], 4), x) == 1
    assert chi_eval(SubsetMask.from_indices([1, 2], 4), x) == -1


@given(st.lists(st.sampled_from([1, -1]), min_size=1, max_size=12), st.data())
def test_chi_is_product_of_coordinates(coords, data):
    d = len(coords)
    idx = data.draw(st.sets(st.integers(1, d)))
    x = CubePoint.from_coords(coords)
    assert x.coords() == tuple(coords)
    assert chi_eval(SubsetMask.from_indices(idx, d), x) == math.prod(coords[i - 1] for i in idx)


def test_dimension_mismatch_and_bounds():
    with pytest.raises(DimensionError):
        chi_eval(SubsetMask(1, 3), CubePoint(1, 4))
    with pytest.raises(DimensionError):
        SubsetMask(8, 3)
    with pytest.raises(DimensionError):
        SubsetMask.from_indices([0], 3)
    with pytest.raises(ValueError):
        CubePoint.from_coords((1, 0))


def test_enumerate_subsets_counts():
    assert [s.bits for s in enumerate_subsets(3, 3)] == [0b111]
    assert len(enumerate_subsets(4, 2)) == 6
    assert len(enumerate_subsets(10, 3, "up_to_k")) == 176 == n_subsets_up_to(10, 3)
    m = subset_masks(7, 3, "up_to_k")
    assert np.all(np.diff(m) > 0)
    with pytest.raises(ValueError):
        enumerate_subsets(3, 4)


def test_deposit_inverts_extract():
    pos = np.array([0, 3, 6])
    z = np.arange(8)
    x = deposit_bits(z, pos)
    assert np.array_equal(extract_bits(x, pos), z)
    H = local_hadamard(3)
    assert np.allclose(H @ H, 8 * np.eye(8))
    assert np.array_equal(mask_positions(np.array([0b1001001]), 3), [[0, 3, 6]])


def test_joint_distribution_validation():
    with pytest.raises(ValueError):
        JointDistribution(1, np.array([[0.5, 0.5], [0.5, -0.5]]))
    with pytest.raises(ValueError):
        JointDistribution(1, np.array([[0.5, 0.5], [0.5, 0.5]]))


def test_json_round_trip_is_byte_identical(rng, tmp_path):
    dist = random_distribution(4, rng, zero_fraction=0.3)
    text = dist.to_json()
    again = JointDistribution.from_json(text)
    assert again == dist and again.to_json() == text
    dist.save(tmp_path / "d.json")
    assert (tmp_path / "d.json").read_text() == text
    assert all(e["p"] > 0 for e in json.loads(text)["table"])


def test_sample_point_mass_and_determinism():
    t = np.zeros((8, 2))
    t[5, 0] = 1.0
    data = sample(JointDistribution(3, t), 5, RngSeed(1))
    assert data.xs.tolist() == [5] * 5 and data.ys.tolist() == [1] * 5
    dist = planted(6, [1, 2], 0.2)
    a, b = sample(dist, 300, RngSeed(9, 2)), sample(dist, 300, RngSeed(9, 2))
    assert a == b and a.to_csv() == b.to_csv()
    assert sample(dist, 100, RngSeed(9, 2)) == a.head(100)  # nested prefixes
    assert sample(dist, 300, RngSeed(9, 3)) != a


def test_sample_frequencies_uniform():
    t = np.full((8, 2), 1 / 16)
    data = sample(JointDistribution(3, t), 10000, RngSeed(4))
    freq = empirical_distribution(data).table
    assert np.all(np.abs(freq - 1 / 16) <= 0.02)


def test_empirical_distribution_examples():
    one = empirical_distribution(Dataset(3, [2], [1]))
    assert one.table[2, 0] == 1.0 and one.table.sum() == 1.0
    two = empirical_distribution(Dataset(3, [2, 6], [1, -1]))
    assert two.table[2, 0] == 0.5 and two.table[6, 1] == 0.5


def test_empirical_distribution_converges(rng):
    dist = random_distribution(5, rng)
    tv = [0.5 * np.abs(empirical_distribution(sample(dist, n, RngSeed(3))).table - dist.table).sum()
          for n in (1000, 10000, 100000)]
    assert tv[0] > tv[1] > tv[2] and tv[2] < 0.05


def test_planted_junta_basics():
    dist = planted(6, [2, 5], 0.0)
    cm = dist.conditional_mean()
    assert set(np.unique(cm)) == {-1.0, 1.0}
    noisy = planted(6, [2, 5], 0.1)
    assert np.allclose(np.abs(noisy.conditional_mean()), 0.8)
    with pytest.raises(ValueError):
        planted(4, [1], 0.5)


def test_csv_round_trip_and_errors(rng):
    data = Dataset(4, rng.integers(0, 16, 30), np.where(rng.random(30) < 0.5, 1, -1))
    assert Dataset.from_csv(data.to_csv()) == data
    with pytest.raises(ValueError, match="line 3"):
        Dataset.from_csv("x1,x2,y\n1,1,1\n1,1\n")
    with pytest.raises(ValueError, match="line 1"):
        Dataset.from_csv("a,b,y\n1,1,1\n")
    with pytest.raises(ValueError):
        Dataset(2, [], [])


def test_rng_seed_range():
    with pytest.raises(ValueError):
        RngSeed(-1)
    g1, g2 = RngSeed(5, 1).generator(), RngSeed(5, 1).generator()
    assert g1.random() == g2.random()
