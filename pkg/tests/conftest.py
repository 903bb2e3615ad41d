import numpy as np
import pytest

from sublinear_dp.harness import generate_synthetic
from sublinear_dp.metric import Dataset, MetricSpace


def line_space(xs):
    """Explicit-matrix metric of points on a line."""
    xs = np.asarray(xs, dtype=float)
    return MetricSpace.from_matrix(np.abs(xs[:, None] - xs[None, :]))


def small_instances(count=20, seed=2024):
    """Random explicit metrics with |V| <= 12 and datasets drawn from V."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(4, 13))
        space, _ = generate_synthetic({"kind": "uniform_metric", "n": n}, rng)
        members = rng.integers(0, n, size=int(rng.integers(n, 3 * n)))
        k = int(rng.integers(1, 4))
        out.append((space, Dataset(space, members), k))
    return out


@pytest.fixture
def line4():
    space = line_space([0, 1, 10, 11])
    return space, Dataset.full(space)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
