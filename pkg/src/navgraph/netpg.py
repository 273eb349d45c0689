"""The net-hierarchy proximity graph: definitional and accelerated builders.

The edge rule: after normalizing the point set so its minimum inter-point
distance is 2, build nets Y_0..Y_h at radii 2^0..2^h and connect each point p
to every net point y in Y_i with D(p, y) <= reach_factor * 2^i, at every
level, deduplicated.  The reach factor grows as Theta(1/epsilon) and the
resulting graph is (1+epsilon)-navigable for every query in the metric space.

Two builders produce byte-identical adjacency:

* ``build_net_pg_naive`` evaluates the edge rule literally with one distance
  row per (point, level).
* ``build_net_pg_fast`` only touches candidates near each point: batched
  static-grid ball collection for Euclidean inputs, per-point
  ``collect_ball`` against a dynamic near-neighbor helper otherwise.  The
  helpers answer 2-approximate nearest neighbors with deletions; extraction
  stops once an extracted 2-ANN lies beyond twice the ball radius, at which
  point no remaining point can be inside the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Optional

import numpy as np

from ._util import DomainError, ceil_log2
from .graph import ProximityGraph
from .metrics import (
    EuclideanSpace,
    MetricSpace,
    PointSet,
    ScaledSpace,
    pairwise_min_distance,
)
from .nets import NetHierarchy, build_net_hierarchy

__all__ = [
    "PGParams",
    "pg_params",
    "NormalizedInput",
    "normalize",
    "build_net_pg_naive",
    "build_net_pg_fast",
    "build_net_pg",
    "collect_ball",
    "GridANNHelper",
    "BruteForceANNHelper",
    "make_helper",
    "NetPGViolation",
    "verify_net_pg_properties",
]


@dataclass(frozen=True)
class PGParams:
    """Construction constants derived from epsilon and the hierarchy height.

    ``gap_exponent`` is ceil(log2(1 + 2/epsilon)) and is at least 2;
    ``reach_factor`` is 1 + 2**(gap_exponent+1) and is at least 9.  Edges at
    level i reach out to reach_factor * 2^i.
    """

    epsilon: float
    gap_exponent: int
    reach_factor: float
    top_level: int

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise DomainError(f"epsilon must be in (0, 1], got {self.epsilon}")
        assert self.gap_exponent >= 2
        assert self.reach_factor >= 9.0


def pg_params(epsilon: float, hierarchy: NetHierarchy) -> PGParams:
    """Compute the construction constants for a given epsilon and hierarchy."""
    if not (0.0 < epsilon <= 1.0):
        raise DomainError(f"epsilon must be in (0, 1], got {epsilon}")
    eta = ceil_log2(1.0 + 2.0 / epsilon)
    phi = float(1 + (1 << (eta + 1)))
    return PGParams(
        epsilon=float(epsilon),
        gap_exponent=eta,
        reach_factor=phi,
        top_level=hierarchy.top_level,
    )


@dataclass(frozen=True)
class NormalizedInput:
    """A point set rescaled so its minimum inter-point distance is 2.

    Euclidean inputs scale coordinates; abstract inputs wrap the space in a
    distance multiplier instead.  ``scale`` maps original distances to
    normalized ones (d_normalized = scale * d_original).
    """

    space: MetricSpace
    points: PointSet
    scale: float


def normalize(space: MetricSpace, pts: PointSet) -> NormalizedInput:
    """Uniformly rescale so the minimum inter-point distance becomes 2."""
    if pts.n < 2:
        raise DomainError("normalization needs at least two points")
    dmin = pairwise_min_distance(space, pts)
    if dmin <= 0:
        raise DomainError("duplicate points: minimum inter-point distance is 0")
    scale = 2.0 / dmin
    if pts.is_abstract:
        return NormalizedInput(
            space=ScaledSpace(space, scale), points=pts, scale=scale
        )
    return NormalizedInput(
        space=space, points=PointSet(pts.points * scale), scale=scale
    )


def _level_threshold(phi: float, level: int) -> float:
    # phi = 1 + 2^(eta+1), so phi * 2^level = 2^level + 2^(eta+1+level):
    # a sum of two exact powers of two, hence exact in float64.
    return phi * float(2.0 ** level)


def build_net_pg_naive(
    space: MetricSpace,
    pts: PointSet,
    epsilon: float,
    hierarchy: Optional[NetHierarchy] = None,
) -> ProximityGraph:
    """Evaluate the edge rule literally, one distance row per (point, level).

    Requires a normalized point set (minimum inter-point distance 2); raises
    a domain error otherwise.  The returned graph carries the hierarchy and
    parameters in ``meta`` for downstream structure checks.
    """
    if hierarchy is None:
        hierarchy = build_net_hierarchy(space, pts)
    params = pg_params(epsilon, hierarchy)
    n = pts.n
    per_vertex: list[set[int]] = [set() for _ in range(n)]
    for level in range(hierarchy.top_level + 1):
        members = hierarchy.members(level)
        member_pts = pts.points[members]
        thr = _level_threshold(params.reach_factor, level)
        for p in range(n):
            row = space.distances(member_pts, pts.points[p])
            hits = members[row <= thr]
            per_vertex[p].update(int(y) for y in hits if y != p)
    rows = [np.array(sorted(s), dtype=np.int64) for s in per_vertex]
    g = ProximityGraph(n, rows, provenance="net")
    g.meta = {"hierarchy": hierarchy, "params": params}
    return g


# ---------------------------------------------------------------------------
# Dynamic 2-approximate nearest neighbor helpers


class BruteForceANNHelper:
    """Deletable exact-NN helper by linear scan (valid as a 2-ANN answer).

    Works for any metric space; used where no coordinate grid exists.
    """

    def __init__(self, space: MetricSpace, all_points, member_ids: np.ndarray):
        self.space = space
        self.all_points = all_points
        self.present = np.zeros(len(all_points), dtype=bool)
        self.present[member_ids] = True

    def two_ann(self, x) -> Optional[tuple[int, float]]:
        ids = np.flatnonzero(self.present)
        if len(ids) == 0:
            return None
        row = self.space.distances(self.all_points[ids], x)
        k = int(np.argmin(row))
        return int(ids[k]), float(row[k])

    def delete(self, idx: int) -> None:
        self.present[idx] = False

    def insert(self, idx: int) -> None:
        self.present[idx] = True


class GridANNHelper:
    """Deletable 2-ANN helper over a uniform grid for Euclidean points.

    Points hash into cells of a fixed side length.  A query expands square
    rings of cells around its own cell; after rings 0..R are scanned, every
    unexplored point lies strictly beyond R * cell (floor-based cell
    assignment makes the bound strict), so the closest scanned present point
    is a valid 2-ANN as soon as its distance is at most 2 * R * cell, and is
    the exact NN once the rings cover the occupied extent.

    Scanned candidates are cached per query point, sorted by (distance, id);
    deletions are skipped lazily at pop time, so the repeated same-point
    queries issued by ``collect_ball`` cost amortized O(1) after the first.
    A failed head check jumps straight to the ring radius that certifies the
    head, so each query point pays for at most a handful of batched distance
    evaluations.  Inserts invalidate the cache.
    """

    def __init__(self, space: MetricSpace, all_points: np.ndarray, member_ids, cell: float):
        if cell <= 0:
            raise DomainError(f"grid cell side must be positive, got {cell}")
        self.space = space
        self.all_points = np.asarray(all_points, dtype=np.float64)
        self.cell = float(cell)
        self.dim = self.all_points.shape[1]
        self.present = np.zeros(len(self.all_points), dtype=bool)
        # cell coordinates of every potential member, computed once
        self.cells = np.floor(self.all_points / self.cell).astype(np.int64)
        self.buckets: dict[tuple, set[int]] = {}
        self.lo: Optional[list[int]] = None  # occupied cell extent
        self.hi: Optional[list[int]] = None
        self.cache: dict[bytes, dict] = {}
        for idx in np.asarray(member_ids, dtype=np.int64):
            self.insert(int(idx))

    def insert(self, idx: int) -> None:
        self.present[idx] = True
        c = tuple(int(v) for v in self.cells[idx])
        self.buckets.setdefault(c, set()).add(idx)
        if self.lo is None:
            self.lo = list(c)
            self.hi = list(c)
        else:
            for k in range(self.dim):
                if c[k] < self.lo[k]:
                    self.lo[k] = c[k]
                if c[k] > self.hi[k]:
                    self.hi[k] = c[k]
        self.cache.clear()

    def delete(self, idx: int) -> None:
        self.present[idx] = False
        members = self.buckets.get(tuple(int(v) for v in self.cells[idx]))
        if members:
            members.discard(idx)
        # extent not shrunk: a stale bound only delays exhaustion, never
        # breaks the lower-bound argument

    def _ring_cells(self, center: tuple, radius: int):
        if radius == 0:
            yield center
            return
        ranges = [range(c - radius, c + radius + 1) for c in center]
        for cell in iter_product(*ranges):
            if max(abs(cell[k] - center[k]) for k in range(self.dim)) == radius:
                yield cell

    def _covers_extent(self, center: tuple, radius: int) -> bool:
        return all(
            center[k] - radius <= self.lo[k] and center[k] + radius >= self.hi[k]
            for k in range(self.dim)
        )

    def _expand(self, x: np.ndarray, e: dict, target: Optional[int]) -> None:
        """Scan rings (e["ring"], target] and fold new candidates into the cache.

        With no target, scan one ring at a time until some candidate appears
        or the occupied extent is exhausted.
        """
        open_ended = target is None
        if open_ended:
            target = e["ring"] + 1
        center = e["center"]
        found: list[int] = []
        while True:
            for radius in range(e["ring"] + 1, target + 1):
                for cell in self._ring_cells(center, radius):
                    members = self.buckets.get(cell)
                    if members:
                        found.extend(members)
            e["ring"] = target
            if self.lo is not None and self._covers_extent(center, target):
                e["done"] = True
            if found or e["done"] or not open_ended:
                break
            target += 1
        if found:
            new_ids = np.array(found, dtype=np.int64)
            new_dists = self.space.distances(self.all_points[new_ids], x)
            ids = np.concatenate([e["ids"], new_ids])
            dists = np.concatenate([e["dists"], new_dists])
            order = np.lexsort((ids, dists))
            e["ids"], e["dists"] = ids[order], dists[order]
            e["ptr"] = 0  # deleted entries are re-skipped cheaply

    def two_ann(self, x) -> Optional[tuple[int, float]]:
        x = np.asarray(x, dtype=np.float64)
        key = x.tobytes()
        e = self.cache.get(key)
        if e is None:
            e = {
                "ids": np.empty(0, dtype=np.int64),
                "dists": np.empty(0, dtype=np.float64),
                "ptr": 0,
                "ring": -1,  # index of the last fully scanned ring
                "done": self.lo is None,
                "center": tuple(int(v) for v in np.floor(x / self.cell)),
            }
            self.cache[key] = e
            if not e["done"]:
                # points within one cell side of x land in rings 0..1, so
                # start with both rings and a single distance batch
                self._expand(x, e, target=1)
        while True:
            ids, dists = e["ids"], e["dists"]
            ptr = e["ptr"]
            while ptr < len(ids) and not self.present[ids[ptr]]:
                ptr += 1
            e["ptr"] = ptr
            if ptr < len(ids):
                d_head = float(dists[ptr])
                if e["done"] or d_head <= 2.0 * e["ring"] * self.cell:
                    return int(ids[ptr]), d_head
                # jump to the radius that certifies this head as a 2-ANN;
                # closer candidates found on the way only strengthen it
                need = math.ceil(d_head / (2.0 * self.cell))
                self._expand(x, e, target=max(need, e["ring"] + 1))
            elif e["done"]:
                return None
            else:
                self._expand(x, e, target=None)


def make_helper(space: MetricSpace, pts: PointSet, member_ids: np.ndarray, cell: float):
    """Pick the grid helper for coordinate spaces, brute force otherwise."""
    if isinstance(space, EuclideanSpace) and not pts.is_abstract:
        return GridANNHelper(space, pts.points, member_ids, cell)
    return BruteForceANNHelper(space, pts.points, member_ids)


def collect_ball(helper, x, threshold: float) -> tuple[np.ndarray, int]:
    """All currently-present helper points within ``threshold`` of ``x``.

    Repeatedly extracts a 2-ANN of x and deletes it, keeping those within the
    threshold, until the first extraction lands beyond twice the threshold;
    at that moment every remaining point is strictly farther than the
    threshold (else the extracted point would not be a 2-ANN), so the
    collected set is the exact ball.  All deletions are reinserted before
    returning.  Returns (sorted member ids, number of points extracted).
    """
    collected: list[int] = []
    deleted: list[int] = []
    while True:
        hit = helper.two_ann(x)
        if hit is None:
            break
        idx, dist = hit
        helper.delete(idx)
        deleted.append(idx)
        if dist > 2.0 * threshold:
            break
        if dist <= threshold:
            collected.append(idx)
    for idx in deleted:
        helper.insert(idx)
    return np.array(sorted(collected), dtype=np.int64), len(deleted)


def _level_balls_grid(
    space: EuclideanSpace, pts: PointSet, members: np.ndarray, thr: float
) -> list[np.ndarray]:
    """All radius-thr balls around every point, via one static grid per level.

    Net members are bucketed into cells of side thr; any point within
    distance thr of p lies in a cell adjacent to p's (coordinate-wise index
    difference at most 1), so the 3^d surrounding cells are a certified
    candidate superset.  Queries sharing a cell share the gather and one
    batched distance matrix.  The distance arithmetic (difference, square,
    sum over the axis of length d, square root) matches the per-row path
    operation for operation, so the balls are bitwise identical to a linear
    scan's.  Returns one sorted id array per point, self included.
    """
    points = pts.points
    n = len(points)
    mpts = points[members]
    dim = points.shape[1]
    mcells = np.floor(mpts / thr).astype(np.int64)
    buckets: dict[tuple, list] = {}
    for row, key in enumerate(map(tuple, mcells.tolist())):
        buckets.setdefault(key, []).append(row)
    packed = {k: np.array(v, dtype=np.int64) for k, v in buckets.items()}
    qcells = np.floor(points / thr).astype(np.int64)
    groups: dict[tuple, list] = {}
    for p, key in enumerate(map(tuple, qcells.tolist())):
        groups.setdefault(key, []).append(p)
    offsets = list(iter_product((-1, 0, 1), repeat=dim))
    empty = np.empty(0, dtype=np.int64)
    result: list = [empty] * n
    for key, plist in groups.items():
        parts = []
        for off in offsets:
            hit = packed.get(tuple(k + o for k, o in zip(key, off)))
            if hit is not None:
                parts.append(hit)
        if not parts:
            continue
        cand = np.concatenate(parts)
        diff = points[np.array(plist)][:, None, :] - mpts[cand][None, :, :]
        if space.norm == "l2":
            dist = np.sqrt(np.sum(diff * diff, axis=2))
        else:
            dist = np.abs(diff).max(axis=2)
        for row_i, p in enumerate(plist):
            result[p] = np.sort(members[cand[dist[row_i] <= thr]])
    return result


def build_net_pg_fast(
    space: MetricSpace,
    pts: PointSet,
    epsilon: float,
    hierarchy: Optional[NetHierarchy] = None,
    check_balls: bool = False,
) -> ProximityGraph:
    """Accelerated builder; byte-identical adjacency to the naive builder.

    Euclidean inputs collect each level's balls through a static grid in
    per-cell batches, which computes exactly the ball ``collect_ball`` yields
    against a level helper while amortizing the per-point overhead that would
    otherwise dominate at desk scale.  Abstract metrics take the per-point
    ``collect_ball`` path against a deletable brute-force helper.  With
    ``check_balls`` every ball is re-verified against a linear scan (slow;
    meant for test builds).  ``meta`` records the largest extraction count
    seen on the helper path, for packing-bound checks.
    """
    if hierarchy is None:
        hierarchy = build_net_hierarchy(space, pts)
    params = pg_params(epsilon, hierarchy)
    n = pts.n
    batched = isinstance(space, EuclideanSpace) and not pts.is_abstract
    per_vertex: list[set[int]] = [set() for _ in range(n)]
    max_extracted = 0
    for level in range(hierarchy.top_level + 1):
        members = hierarchy.members(level)
        thr = _level_threshold(params.reach_factor, level)
        if batched:
            balls = _level_balls_grid(space, pts, members, thr)
        else:
            helper = make_helper(space, pts, members, cell=2.0 * thr)
            balls = []
            for p in range(n):
                ball, extracted = collect_ball(helper, pts.points[p], thr)
                max_extracted = max(max_extracted, extracted)
                balls.append(ball)
        for p in range(n):
            ball = balls[p]
            if check_balls:
                row = space.distances(pts.points[members], pts.points[p])
                expect = np.sort(members[row <= thr])
                if not np.array_equal(ball, expect):
                    raise AssertionError(
                        f"ball mismatch at point {p}, level {level}: "
                        f"{ball.tolist()} vs {expect.tolist()}"
                    )
            per_vertex[p].update(int(y) for y in ball if y != p)
    rows = [np.array(sorted(s), dtype=np.int64) for s in per_vertex]
    g = ProximityGraph(n, rows, provenance="net")
    g.meta = {
        "hierarchy": hierarchy,
        "params": params,
        "max_extracted": max_extracted,
    }
    return g


#: Default construction path used by higher-level builders.
build_net_pg = build_net_pg_fast


@dataclass(frozen=True)
class NetPGViolation:
    """First point where a graph deviates from the level edge rule."""

    kind: str
    vertex: int
    level: int
    details: str


def verify_net_pg_properties(
    space: MetricSpace,
    pts: PointSet,
    graph: ProximityGraph,
    hierarchy: Optional[NetHierarchy] = None,
    params: Optional[PGParams] = None,
) -> Optional[NetPGViolation]:
    """Re-derive the level edge groups and check the graph matches exactly.

    For every vertex p and level i the group is the net members within
    reach_factor * 2^i of p (p excluded).  Checks: group members pairwise at
    least 2^i apart, the union of groups equals p's out-neighbors exactly,
    and every vertex keeps out-degree >= 1.  Returns the first violation or
    None.  Hierarchy and parameters default to the graph's build metadata.
    """
    if hierarchy is None:
        hierarchy = graph.meta.get("hierarchy")
        if hierarchy is None:
            hierarchy = build_net_hierarchy(space, pts)
    if params is None:
        params = graph.meta.get("params")
        if params is None:
            raise DomainError("no parameters: pass params or a graph with build meta")
    if graph.n != pts.n:
        raise DomainError(f"graph has {graph.n} vertices for {pts.n} points")
    n = pts.n
    expected: list[set[int]] = [set() for _ in range(n)]
    for level in range(hierarchy.top_level + 1):
        members = hierarchy.members(level)
        member_pts = pts.points[members]
        thr = _level_threshold(params.reach_factor, level)
        sep = float(2.0 ** level)
        for p in range(n):
            row = space.distances(member_pts, pts.points[p])
            group = members[(row <= thr) & (members != p)]
            if len(group) > 1:
                gpts = pts.points[group]
                for j in range(len(group)):
                    others = space.distances(gpts, gpts[j])
                    others[j] = np.inf
                    if others.min() < sep:
                        return NetPGViolation(
                            kind="level-separation",
                            vertex=p,
                            level=level,
                            details=f"group members closer than {sep}",
                        )
            expected[p].update(int(y) for y in group)
    for p in range(n):
        want = np.array(sorted(expected[p]), dtype=np.int64)
        got = graph.out_edges[p]
        if len(got) == 0:
            return NetPGViolation(
                kind="isolated-vertex", vertex=p, level=-1, details="out-degree 0"
            )
        if not np.array_equal(want, got):
            missing = np.setdiff1d(want, got)
            extra = np.setdiff1d(got, want)
            return NetPGViolation(
                kind="edge-set-mismatch",
                vertex=p,
                level=-1,
                details=f"missing {missing.tolist()}, unjustified {extra.tolist()}",
            )
    return None
