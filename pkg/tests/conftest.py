"""Shared fixtures: normalized random instances and small frozen point sets."""

import numpy as np
import pytest

from navgraph import EuclideanSpace, PointSet, normalize


def uniform_points(n, d, seed):
    rng = np.random.default_rng(seed)
    return PointSet(rng.random((n, d)))


def normalized_instance(n, d, seed, norm="l2"):
    """Uniform points rescaled so the minimum pairwise distance is 2."""
    space = EuclideanSpace(d, norm=norm)
    res = normalize(space, uniform_points(n, d, seed))
    return res.space, res.points


@pytest.fixture
def small_instance():
    return normalized_instance(60, 2, seed=11)


@pytest.fixture
def line_points():
    # 1-D set with power-of-two gaps; hierarchy levels are known by hand
    return PointSet(np.array([[0.0], [2.0], [4.0], [8.0]]))
