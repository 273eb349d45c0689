"""Greedy r-nets and the level hierarchy: invariants plus a hand-checked set."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navgraph import (
    DomainError,
    EuclideanSpace,
    PointSet,
    build_net_hierarchy,
    greedy_r_net,
    normalize,
    verify_r_net,
)
from conftest import uniform_points


@given(st.integers(0, 2**31 - 1), st.integers(2, 40), st.floats(0.05, 1.5))
@settings(max_examples=40, deadline=None)
def test_greedy_net_is_verified_net(seed, n, radius):
    space = EuclideanSpace(2)
    pts = uniform_points(n, 2, seed)
    members = greedy_r_net(space, pts, radius)
    assert verify_r_net(space, pts, radius, members) is None
    # index-order greediness: point 0 always enters
    assert members[0] == 0


@given(st.integers(0, 2**31 - 1), st.integers(2, 30), st.floats(0.05, 1.5))
@settings(max_examples=30, deadline=None)
def test_net_invariants_by_direct_loop(seed, n, radius):
    # independent oracle: quantifier evaluation straight from the definition
    space = EuclideanSpace(2)
    pts = uniform_points(n, 2, seed)
    members = set(int(m) for m in greedy_r_net(space, pts, radius))
    for a in members:
        for b in members:
            if a != b:
                assert space.distance(pts.points[a], pts.points[b]) >= radius
    for i in range(n):
        assert any(
            space.distance(pts.points[i], pts.points[m]) <= radius for m in members
        )


def test_verify_r_net_flags_planted_violations():
    space = EuclideanSpace(1)
    pts = PointSet(np.array([[0.0], [1.0], [5.0]]))
    sep = verify_r_net(space, pts, 2.0, np.array([0, 1]))
    assert sep is not None and sep.kind == "separation"
    cov = verify_r_net(space, pts, 2.0, np.array([0]))
    assert cov is not None and cov.kind == "covering" and cov.index_b == 2


def test_net_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        greedy_r_net(EuclideanSpace(1), PointSet(np.array([[0.0], [2.0]])), 0.0)


def test_hierarchy_on_hand_checked_line(line_points):
    # points 0, 2, 4, 8 on a line: min distance 2, diameter 8
    space = EuclideanSpace(1)
    h = build_net_hierarchy(space, line_points)
    # level 0 keeps everything
    assert h.members(0).tolist() == [0, 1, 2, 3]
    # radius 2: point 1 (=2.0) is at distance 2 from 0, so it stays;
    # the greedy sweep keeps all four (gaps are exactly 2, 2, 4)
    assert h.members(1).tolist() == [0, 1, 2, 3]
    # radius 4: 2.0 dropped (distance 2 < 4), 4.0 kept, 8.0 kept
    assert h.members(2).tolist() == [0, 2, 3]
    for level in range(h.top_level + 1):
        radius = 2.0**level
        assert verify_r_net(space, line_points, radius, h.members(level)) is None
    # the coarsest net is a single point
    assert len(h.members(h.top_level)) == 1


def test_hierarchy_requires_normalized_min_distance():
    space = EuclideanSpace(1)
    with pytest.raises(DomainError):
        build_net_hierarchy(space, PointSet(np.array([[0.0], [1.0]])))


@given(st.integers(0, 2**31 - 1), st.integers(2, 50))
@settings(max_examples=25, deadline=None)
def test_hierarchy_levels_nest_and_shrink(seed, n):
    space = EuclideanSpace(2)
    norm = normalize(space, uniform_points(n, 2, seed))
    h = build_net_hierarchy(norm.space, norm.points)
    assert h.members(0).tolist() == list(range(n))
    sizes = [len(h.members(i)) for i in range(h.top_level + 1)]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))
    assert sizes[-1] == 1
    for level in range(h.top_level + 1):
        v = verify_r_net(norm.space, norm.points, 2.0**level, h.members(level))
        assert v is None, (level, v)
