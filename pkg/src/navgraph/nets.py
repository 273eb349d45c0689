"""Greedy r-nets and the hierarchy of nets underlying the graph construction.

An r-net of P is a subset Y that is r-separated (distinct net points lie at
distance >= r) and r-covering (every point of P lies within r of some net
point).  The hierarchy stacks nets at radii 2^0, 2^1, ..., 2^top_level over a
point set normalized so its minimum inter-point distance is 2, which makes
level 0 the whole set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._util import DomainError, ceil_log2
from .metrics import ExtremeEstimate, MetricSpace, PointSet, estimate_extremes

__all__ = [
    "Net",
    "NetHierarchy",
    "NetViolation",
    "greedy_r_net",
    "verify_r_net",
    "build_net_hierarchy",
]

#: Relative slack when validating that a normalized input has min distance 2.
MIN_DISTANCE_RTOL = 1e-9


@dataclass(frozen=True)
class Net:
    """An r-net given by the indices of its members within the point set."""

    radius: float
    members: np.ndarray  # sorted int64 indices into the point set


@dataclass(frozen=True)
class NetViolation:
    """Witness that a candidate net fails separation or covering."""

    kind: str  # "separation" or "covering"
    index_a: int
    index_b: int  # for covering: the uncovered point; for separation: second member
    distance: float


def greedy_r_net(space: MetricSpace, pts: PointSet, radius: float) -> np.ndarray:
    """Indices of the net produced by the index-order greedy sweep.

    Walk points in index order; accept a point iff it lies at distance >= r
    from every point accepted so far.  The result is r-separated by
    construction and r-covering because every rejected point saw an accepted
    point within r.  Deterministic: no RNG, ties resolved by index order.
    """
    if radius <= 0:
        raise DomainError(f"net radius must be positive, got {radius}")
    accepted: list[int] = []
    for i in range(pts.n):
        if not accepted:
            accepted.append(i)
            continue
        row = space.distances(pts.points[np.asarray(accepted)], pts.points[i])
        if (row >= radius).all():
            accepted.append(i)
    return np.asarray(accepted, dtype=np.int64)


def verify_r_net(
    space: MetricSpace, pts: PointSet, radius: float, members: np.ndarray
) -> Optional[NetViolation]:
    """Check separation and covering; return the first violation or None."""
    members = np.asarray(members, dtype=np.int64)
    if len(members) == 0:
        return NetViolation(kind="covering", index_a=-1, index_b=0, distance=np.inf)
    net_pts = pts.points[members]
    for k in range(len(members)):
        row = space.distances(net_pts, net_pts[k])
        row[k] = np.inf
        j = int(np.argmin(row))
        if row[j] < radius:
            return NetViolation(
                kind="separation",
                index_a=int(members[k]),
                index_b=int(members[j]),
                distance=float(row[j]),
            )
    member_set = set(int(m) for m in members)
    for i in range(pts.n):
        if i in member_set:
            continue
        row = space.distances(net_pts, pts.points[i])
        j = int(np.argmin(row))
        if row[j] > radius:
            return NetViolation(
                kind="covering",
                index_a=int(members[j]),
                index_b=i,
                distance=float(row[j]),
            )
    return None


@dataclass(frozen=True)
class NetHierarchy:
    """Nets at radii 2^0 .. 2^top_level over a normalized point set.

    Level 0 is always the full index set: with minimum distance 2, every
    point is 1-separated and covers itself.
    """

    top_level: int
    levels: tuple[Net, ...]
    extremes: ExtremeEstimate

    def members(self, level: int) -> np.ndarray:
        return self.levels[level].members


def build_net_hierarchy(
    space: MetricSpace,
    pts: PointSet,
    extremes: Optional[ExtremeEstimate] = None,
) -> NetHierarchy:
    """Build the full stack of greedy nets for a normalized point set.

    Requires minimum inter-point distance 2 (within relative tolerance); use
    :func:`navgraph.netpg.normalize` to bring raw inputs into that form.  The
    top level is ceil(log2(estimated max distance)), so the coarsest net has
    radius at least the true diameter and is a single point.
    """
    if pts.n < 2:
        raise DomainError("a net hierarchy needs at least two points")
    if extremes is None:
        extremes = estimate_extremes(space, pts)
    observed_min = 2.0 * extremes.min_distance  # the estimate halves it
    if abs(observed_min - 2.0) > MIN_DISTANCE_RTOL * 2.0:
        raise DomainError(
            f"point set is not normalized: min distance {observed_min}, expected 2"
        )
    top = ceil_log2(extremes.max_distance)
    levels = []
    all_indices = np.arange(pts.n, dtype=np.int64)
    for i in range(top + 1):
        radius = float(2.0 ** i)
        if i == 0:
            members = all_indices
        else:
            members = greedy_r_net(space, pts, radius)
        levels.append(Net(radius=radius, members=members))
    return NetHierarchy(top_level=top, levels=tuple(levels), extremes=extremes)
