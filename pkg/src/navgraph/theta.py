"""Cone families and theta-graphs for Euclidean point sets (d in {2, 3}).

A cone family partitions direction space into closed cones of angular
diameter at most theta, each carrying a designated interior ray.  The
theta-graph connects every point p, per non-empty cone translated to apex p,
to the point whose projection onto the designated ray lands closest to p.
At theta = epsilon/32 the theta-graph is (1+epsilon)-navigable.

Float exactness of the covering: adjacent cones share their boundary
constraints through exact negation (IEEE fl(a-b) = -fl(b-a)), so a direction
on a shared boundary satisfies at least one side's closed test and no
direction can fall into a crack between cones.

* d=2: ceil(2*pi/theta) equal sectors; shared boundary rays indexed modulo
  the sector count; designated ray = bisector.
* d=3: a latitude/longitude grid with one longitude grid shared by all bands,
  each grid quad split into two spherical triangles along its diagonal, each
  triangle the intersection of three halfspaces whose normals are corner
  cross products; poles pinned to exact (0, 0, +-1); designated ray = the
  normalized corner centroid.

The module also houses three closed-form scalar inequalities that the
navigability argument for theta-graphs leans on; they are checked on dense
grids rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._util import DomainError
from .graph import ProximityGraph
from .metrics import PointSet

__all__ = [
    "Cone",
    "ConeFamily",
    "build_cone_family",
    "cone_contains",
    "nearest_point_on_ray",
    "build_theta_graph",
    "build_theta_graph_brute",
    "check_fact_tan_linear",
    "check_fact_chord_tan",
    "check_fact_reach_margin",
]


@dataclass(frozen=True)
class Cone:
    """A closed polyhedral cone at the origin plus a designated interior ray.

    Membership: x is inside iff normals @ x >= 0 holds row-wise.
    """

    normals: np.ndarray  # (m, d), inward halfspace normals
    ray: np.ndarray  # (d,), unit direction


@dataclass(frozen=True)
class ConeFamily:
    """A covering collection of cones with angular diameter <= theta."""

    dimension: int
    theta: float
    cones: tuple[Cone, ...]
    rays: np.ndarray  # (k, d) stacked designated rays
    #: d=2 only: inward normal of each sector's lower boundary, indexed so
    #: sector j is {x : boundary_normals[j] @ x >= 0 and
    #: boundary_normals[(j+1) % k] @ x <= 0}
    boundary_normals: Optional[np.ndarray] = None
    #: d=3 only: (k, 3, 3) per-cone halfspace normals
    normals_stacked: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.cones)

    def membership(self, rel: np.ndarray) -> np.ndarray:
        """Boolean (len(rel), k) matrix: which cones contain each vector."""
        if self.dimension == 2:
            t = rel @ self.boundary_normals.T
            return (t >= 0.0) & (np.roll(t, -1, axis=1) <= 0.0)
        flat = self.normals_stacked.reshape(-1, 3)  # (3k, 3)
        t = rel @ flat.T
        return (t.reshape(len(rel), -1, 3) >= 0.0).all(axis=2)


def _build_sectors(theta: float) -> ConeFamily:
    k = math.ceil(2.0 * math.pi / theta)
    angles = 2.0 * math.pi * np.arange(k) / k
    # inward normal of the boundary ray at angle a is (-sin a, cos a): points
    # on the counterclockwise side of the ray get a nonnegative dot product
    boundary = np.stack([-np.sin(angles), np.cos(angles)], axis=1)
    mid = angles + math.pi / k  # sector bisectors
    rays = np.stack([np.cos(mid), np.sin(mid)], axis=1)
    cones = []
    for j in range(k):
        normals = np.stack([boundary[j], -boundary[(j + 1) % k]])
        cone = Cone(normals=normals, ray=rays[j])
        assert (normals @ rays[j] >= 0).all(), "bisector fell outside its sector"
        cones.append(cone)
    return ConeFamily(
        dimension=2,
        theta=float(theta),
        cones=tuple(cones),
        rays=rays,
        boundary_normals=boundary,
    )


def _max_corner_angle(corners: np.ndarray) -> float:
    dots = np.clip(corners @ corners.T, -1.0, 1.0)
    return float(np.arccos(dots).max())


def _build_sphere_cells(theta: float) -> ConeFamily:
    n_lat = math.ceil(2.0 * math.pi / theta)  # polar bands of height <= theta/2
    n_lon = math.ceil(4.0 * math.pi / theta)  # azimuth steps of width <= theta/2
    polar = math.pi * np.arange(n_lat + 1) / n_lat
    azim = 2.0 * math.pi * np.arange(n_lon) / n_lon
    # grid vertices, poles pinned exactly so all pole-band cells share them
    verts = np.empty((n_lat + 1, n_lon, 3))
    sp, cp = np.sin(polar), np.cos(polar)
    verts[:, :, 0] = sp[:, None] * np.cos(azim)[None, :]
    verts[:, :, 1] = sp[:, None] * np.sin(azim)[None, :]
    verts[:, :, 2] = cp[:, None]
    verts[0, :] = (0.0, 0.0, 1.0)
    verts[n_lat, :] = (0.0, 0.0, -1.0)
    cones = []
    rays = []
    for i in range(n_lat):
        for j in range(n_lon):
            jn = (j + 1) % n_lon
            a, b = verts[i, j], verts[i + 1, j]
            c, d = verts[i + 1, jn], verts[i, jn]
            # quad a, b, c, d is counterclockwise seen from outside; split
            # along the a-c diagonal; pole bands degenerate one triangle away
            triangles = []
            if i < n_lat - 1:  # (a, b, c) collapses when b = c = south pole
                triangles.append((a, b, c))
            if i > 0:  # (a, c, d) collapses when a = d = north pole
                triangles.append((a, c, d))
            for tri in triangles:
                p, q, r = tri
                normals = np.stack([np.cross(p, q), np.cross(q, r), np.cross(r, p)])
                corners = np.stack(tri)
                assert _max_corner_angle(corners) <= theta * (1 + 1e-12)
                ray = corners.sum(axis=0)
                ray = ray / np.sqrt((ray * ray).sum())
                assert (normals @ ray > 0).all(), "centroid ray left its cone"
                # orientation sanity: each face normal keeps the third corner
                assert normals[0] @ r >= 0 and normals[1] @ p >= 0 and normals[2] @ q >= 0
                cones.append(Cone(normals=normals, ray=ray))
                rays.append(ray)
    return ConeFamily(
        dimension=3,
        theta=float(theta),
        cones=tuple(cones),
        rays=np.stack(rays),
        normals_stacked=np.stack([c.normals for c in cones]),
    )


def build_cone_family(dim: int, theta: float) -> ConeFamily:
    """Covering cone family with angular diameter <= theta per cone."""
    if not (0.0 < theta < math.pi):
        raise DomainError(f"theta must be in (0, pi), got {theta}")
    if dim == 2:
        return _build_sectors(theta)
    if dim == 3:
        return _build_sphere_cells(theta)
    raise DomainError(f"cone families support d in {{2, 3}}, got d={dim}")


def cone_contains(family: ConeFamily, cone_id: int, apex, x) -> bool:
    """Closed membership of x in the cone translated to ``apex``."""
    v = np.asarray(x, dtype=np.float64) - np.asarray(apex, dtype=np.float64)
    return bool((family.cones[cone_id].normals @ v >= 0.0).all())


def nearest_point_on_ray(
    pts: PointSet, p: int, family: ConeFamily, cone_id: int
) -> Optional[int]:
    """Among points in the cone at apex p, the one projecting closest to p.

    The score of a candidate x is |(x - p) . ray|, the distance from p to
    the projection of x onto the designated ray.  Ties break to the smallest
    index.  Returns None for an empty cone.  This is the scalar reference
    route; the builder vectorizes the same arithmetic.
    """
    ray = family.cones[cone_id].ray
    apex = pts.points[p]
    best: Optional[int] = None
    best_score = np.inf
    for x in range(pts.n):
        if x == p:
            continue
        if not cone_contains(family, cone_id, apex, pts.points[x]):
            continue
        score = abs(float((pts.points[x] - apex) @ ray))
        if score < best_score:
            best, best_score = x, score
    return best


def build_theta_graph(
    pts: PointSet, theta: float, family: Optional[ConeFamily] = None
) -> ProximityGraph:
    """One edge per vertex per non-empty translated cone.

    ``meta`` carries the cone family and, aligned with each adjacency row,
    the smallest cone id that produced each edge.
    """
    if pts.is_abstract:
        raise DomainError("theta-graphs need coordinate points")
    if family is None:
        family = build_cone_family(pts.dim, theta)
    elif family.dimension != pts.dim:
        raise DomainError(
            f"family dimension {family.dimension} does not match points ({pts.dim})"
        )
    p_all = pts.points
    rays_t = family.rays.T
    rows = []
    cone_rows = []
    for p in range(pts.n):
        rel = p_all - p_all[p]
        member = family.membership(rel)
        member[p, :] = False
        score = np.abs(rel @ rays_t)
        score[~member] = np.inf
        nonempty = member.any(axis=0)
        targets = np.argmin(score, axis=0)  # first min = smallest index
        tgt = targets[nonempty]
        cid = np.flatnonzero(nonempty)
        uniq, first = np.unique(tgt, return_index=True)
        rows.append(uniq.astype(np.int64))
        cone_rows.append(cid[first].astype(np.int64))
    g = ProximityGraph(pts.n, rows, provenance="theta")
    g.meta = {"family": family, "theta": float(theta), "edge_cones": cone_rows}
    return g


def build_theta_graph_brute(
    pts: PointSet, theta: float, family: Optional[ConeFamily] = None
) -> ProximityGraph:
    """Definitional construction via per-cone scalar argmin; test oracle."""
    if family is None:
        family = build_cone_family(pts.dim, theta)
    rows = []
    cone_rows = []
    for p in range(pts.n):
        chosen: dict[int, int] = {}
        for cone_id in range(len(family)):
            t = nearest_point_on_ray(pts, p, family, cone_id)
            if t is not None and t not in chosen:
                chosen[t] = cone_id
        order = sorted(chosen)
        rows.append(np.array(order, dtype=np.int64))
        cone_rows.append(np.array([chosen[t] for t in order], dtype=np.int64))
    g = ProximityGraph(pts.n, rows, provenance="theta")
    g.meta = {"family": family, "theta": float(theta), "edge_cones": cone_rows}
    return g


# ---------------------------------------------------------------------------
# Closed-form inequalities behind the theta-graph navigability argument


def check_fact_tan_linear(samples: int = 100000) -> Optional[float]:
    """tan(x) <= 2x on [0, 1/2]; returns the first violating x, if any."""
    x = np.linspace(0.0, 0.5, samples)
    bad = np.tan(x) > 2.0 * x
    if bad.any():
        return float(x[np.argmax(bad)])
    return None


def check_fact_chord_tan(samples: int = 100000) -> Optional[float]:
    """2 sin(g/2) < tan(g) strictly on the open interval (0, pi/2).

    Geometrically: the chord between two points at equal distance l from an
    apex with angle g between them is shorter than l * tan(g).  Checked on
    interior grid points.
    """
    g = np.linspace(0.0, math.pi / 2.0, samples + 2)[1:-1]
    bad = 2.0 * np.sin(g / 2.0) >= np.tan(g)
    if bad.any():
        return float(g[np.argmax(bad)])
    return None


def check_fact_reach_margin(
    eps_samples: int = 317, gamma_samples: int = 317
) -> Optional[tuple[float, float]]:
    """(2+eps) * (2 tan(g) + 1 - cos(g)) < eps for g in [0, eps/32], eps in (0, 1].

    The slack that lets a theta-graph hop beat the (1+eps) threshold.
    Checked on a dense (eps, gamma) grid; returns a violating pair, if any.
    """
    eps = np.linspace(0.0, 1.0, eps_samples + 1)[1:]
    unit = np.linspace(0.0, 1.0, gamma_samples)
    g = (eps[:, None] / 32.0) * unit[None, :]
    lhs = (2.0 + eps)[:, None] * (2.0 * np.tan(g) + 1.0 - np.cos(g))
    bad = lhs >= eps[:, None]
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        return float(eps[i]), float(g[i, j])
    return None
