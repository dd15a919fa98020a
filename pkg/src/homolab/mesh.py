"""Boundary-fitted triangulations of planar domains.

Star-shaped domains (all builtin charts qualify) are meshed by Delaunay
triangulation of an exact boundary loop plus a hexagonal lattice of
interior points kept clear of the boundary; triangles outside the domain
are removed by a radial inside test and interior vertices get a few
Laplacian smoothing passes.  Boundary vertices lie exactly on the chart;
boundary edges carry (piece, t0, t1) tags so downstream boundary
quadrature can use the exact curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay


class MeshError(ValueError):
    pass


@dataclass
class TriMesh:
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3) int32, CCW
    boundary_edges: np.ndarray  # (ne, 2) int32, CCW along the boundary
    boundary_tags: np.ndarray  # (ne, 3): piece index, t0, t1
    h: float
    surface: object = None

    @property
    def num_vertices(self):
        return len(self.vertices)

    def areas(self):
        v = self.vertices
        t = self.triangles
        d1 = v[t[:, 1]] - v[t[:, 0]]
        d2 = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def area(self):
        return float(np.sum(self.areas()))

    def min_angle(self):
        v = self.vertices
        t = self.triangles
        ang = np.full(len(t), np.inf)
        for i in range(3):
            a = v[t[:, i]]
            b = v[t[:, (i + 1) % 3]]
            c = v[t[:, (i + 2) % 3]]
            u1 = b - a
            u2 = c - a
            cosang = np.sum(u1 * u2, axis=1) / (
                np.linalg.norm(u1, axis=1) * np.linalg.norm(u2, axis=1)
            )
            ang = np.minimum(ang, np.degrees(np.arccos(np.clip(cosang, -1, 1))))
        return float(np.min(ang))

    def boundary_vertex_ids(self):
        return np.unique(self.boundary_edges)

    def edge_lengths(self):
        v = self.vertices
        e = self.boundary_edges
        return np.linalg.norm(v[e[:, 1]] - v[e[:, 0]], axis=1)


def _loop_from_boundary(surface, spacing):
    """Boundary loop: exact points, (piece, t) tags, normalized arc params."""
    pts, tags = surface.boundary_polyline(spacing)
    seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
    u = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / np.sum(seg)
    return pts, tags, u


def _radial_profile(dense, center):
    """Periodic (angle, radius, slant) profile of a star-shaped boundary.

    slant = cos of the angle between the outward ray and the boundary
    normal; (R(theta) - r) * slant approximates the distance from an
    interior point to the boundary.
    """
    rel = dense - center
    rad = np.linalg.norm(rel, axis=1)
    tang = np.roll(dense, -1, axis=0) - np.roll(dense, 1, axis=0)
    nrm = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
    nrm /= np.maximum(np.linalg.norm(nrm, axis=1), 1e-300)[:, None]
    slant = np.abs(np.sum(rel * nrm, axis=1)) / np.maximum(rad, 1e-300)
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    order = np.argsort(ang)
    ang_s, rad_s, sl_s = ang[order], rad[order], slant[order]
    ang_p = np.concatenate([[ang_s[-1] - 2 * np.pi], ang_s, [ang_s[0] + 2 * np.pi]])
    rad_p = np.concatenate([[rad_s[-1]], rad_s, [rad_s[0]]])
    sl_p = np.concatenate([[sl_s[-1]], sl_s, [sl_s[0]]])
    return ang_p, rad_p, sl_p


def _radius_at(profile, theta):
    return np.interp(theta, profile[0], profile[1])


def _clearance_at(profile, theta, r):
    """Approximate distance from an interior point (theta, r) to the boundary."""
    return (np.interp(theta, profile[0], profile[1]) - r) * np.interp(
        theta, profile[0], profile[2]
    )


def _smooth_interior(vertices, triangles, n_fixed, n_iter=8):
    """Laplacian smoothing of interior vertices; the first n_fixed
    (boundary) vertices stay put."""
    from scipy import sparse

    nv = len(vertices)
    edges = np.vstack(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = sparse.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(nv, nv)
    ).tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    deg[deg == 0] = 1.0
    v = vertices.copy()
    for _ in range(n_iter):
        avg = adj @ v / deg[:, None]
        v[n_fixed:] = avg[n_fixed:]
    return v


def mesh_domain(surface, h, node_budget=12_000_000, oversample=1.08):
    """Quasi-uniform boundary-fitted triangulation with target size h.

    The domain must be star-shaped w.r.t. its centroid (true for every
    builtin chart).  Boundary vertices lie exactly on the chart.
    """
    if surface.d != 2:
        raise MeshError("volume meshing is 2-D only")
    est_nodes = oversample * surface.enclosed_volume() / (h * h * 0.8)
    if est_nodes > node_budget:
        raise MeshError(
            f"h={h} needs ~{est_nodes:.2e} nodes, budget {node_budget:.2e}"
        )

    bpts, btags, _ = _loop_from_boundary(surface, h / oversample)
    n0 = len(bpts)
    center = bpts.mean(axis=0)

    # dense reference polyline for the radial inside test and clearance
    dense, _, _ = _loop_from_boundary(surface, h / 8.0)
    profile = _radial_profile(dense, center)
    rho_min = float(np.min(profile[1]))
    if rho_min <= 0.75 * h:
        raise MeshError("h too coarse for this domain")

    # hexagonal interior lattice, kept clear of the boundary
    lo = dense.min(axis=0)
    hi = dense.max(axis=0)
    dy = h * np.sqrt(3.0) / 2.0
    ys = np.arange(lo[1] + 0.5 * dy, hi[1], dy)
    xs = np.arange(lo[0], hi[0] + h, h)
    X = xs[None, :] + 0.5 * h * (np.arange(len(ys))[:, None] % 2)
    Y = np.broadcast_to(ys[:, None], X.shape)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    relp = pts - center
    rp = np.hypot(relp[:, 0], relp[:, 1])
    thp = np.arctan2(relp[:, 1], relp[:, 0])
    pts = pts[_clearance_at(profile, thp, rp) > 0.7 * h]

    vertices = np.vstack([bpts, pts])
    triangles = Delaunay(vertices).simplices.astype(np.int32)

    # drop triangles outside the (star-shaped) domain
    cen = vertices[triangles].mean(axis=1)
    relc = cen - center
    rc = np.hypot(relc[:, 0], relc[:, 1])
    keep = rc <= _radius_at(profile, np.arctan2(relc[:, 1], relc[:, 0]))
    triangles = triangles[keep]

    used = np.unique(triangles)
    if used[0] != 0 or used[-1] != len(vertices) - 1 or len(used) != len(vertices):
        if not np.array_equal(used[:n0], np.arange(n0)):
            raise MeshError("boundary vertex lost during outside-triangle removal")
        remap = np.full(len(vertices), -1, dtype=np.int32)
        remap[used] = np.arange(len(used), dtype=np.int32)
        vertices = vertices[used]
        triangles = remap[triangles]

    vertices = _smooth_interior(vertices, triangles, n0)

    # orientation fix: make every triangle CCW
    d1 = vertices[triangles[:, 1]] - vertices[triangles[:, 0]]
    d2 = vertices[triangles[:, 2]] - vertices[triangles[:, 0]]
    neg = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) < 0
    triangles[neg, 1], triangles[neg, 2] = triangles[neg, 2].copy(), triangles[neg, 1].copy()

    # boundary edges with exact-curve tags
    ids = np.arange(n0)
    boundary_edges = np.stack([ids, (ids + 1) % n0], axis=1).astype(np.int32)
    tags = np.zeros((n0, 3))
    for i in range(n0):
        ip, t0 = btags[i]
        ipn, tn = btags[(i + 1) % n0]
        if ipn != ip:
            t1 = 1.0
        elif tn <= t0:  # wrap-around edge of a single periodic piece
            t1 = tn + 1.0
        else:
            t1 = tn
        tags[i] = (ip, t0, t1)

    # every boundary edge must be an edge of the triangulation
    nv = len(vertices)
    tri_e = np.vstack(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    ).astype(np.int64)
    tri_codes = np.min(tri_e, axis=1) * nv + np.max(tri_e, axis=1)
    be = boundary_edges.astype(np.int64)
    b_codes = np.min(be, axis=1) * nv + np.max(be, axis=1)
    if not np.all(np.isin(b_codes, tri_codes)):
        raise MeshError("boundary edge missing from triangulation")

    mesh = TriMesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=boundary_edges,
        boundary_tags=tags,
        h=float(h),
        surface=surface,
    )
    if np.any(mesh.areas() <= 0):
        raise MeshError("mesh generation produced degenerate triangles")
    return mesh
