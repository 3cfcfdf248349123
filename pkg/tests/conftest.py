import numpy as np
import pytest

from juntapac.cube import (Dataset, JointDistribution, RngSeed, SubsetMask,
                           parity_table, planted_junta_distribution,
                           random_distribution, sample)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def planted(d, junta, eta=0.0, table=None, marginal=None):
    j = SubsetMask.from_indices(junta, d)
    f = parity_table(j.size) if table is None else table
    return planted_junta_distribution(d, j, f, marginal, eta)


def random_dataset(rng, d, n):
    return Dataset(d, rng.integers(0, 1 << d, n), np.where(rng.random(n) < 0.5, 1, -1))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.report_lines():
            terminalreporter.write_line(line)
