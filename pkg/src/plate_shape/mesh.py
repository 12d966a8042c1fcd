"""Quasi-uniform triangulation of a strictly convex body.

Boundary vertices are inverse-Gauss-map samples at equal arc length; the
interior is seeded with a hexagonal lattice and relaxed by a spring
smoother on repeated Delaunay triangulations, with boundary nodes fixed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .convex import ConvexBody2D, SupportFunction2D, angle_grid, boundary_point, curvature_measure

MIN_ANGLE_DEG = 20.0


class MeshingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counter-clockwise
    edges: np.ndarray  # (ne, 2), sorted vertex pairs
    tri_edges: np.ndarray  # (nt, 3), edge opposite local vertex i
    boundary_vertices: np.ndarray  # in boundary order
    boundary_edges: np.ndarray  # edge ids in boundary order
    boundary_theta: np.ndarray  # outward normal angle of each boundary edge
    boundary_midpoints: np.ndarray
    boundary_lengths: np.ndarray
    boundary_triangles: np.ndarray  # triangle adjacent to each boundary edge
    h: float

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def min_angle(self) -> float:
        return float(np.degrees(triangle_angles(self.vertices, self.triangles).min()))

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.linalg.norm(v[self.edges[:, 1]] - v[self.edges[:, 0]], axis=1)

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": [
                {
                    "vertices": self.edges[e].tolist(),
                    "midpoint": self.boundary_midpoints[i].tolist(),
                    "theta": float(self.boundary_theta[i]),
                    "triangle": int(self.boundary_triangles[i]),
                }
                for i, e in enumerate(self.boundary_edges)
            ],
        }

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)


def triangle_angles(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    out = np.empty(triangles.shape)
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        w = p[:, (i + 2) % 3] - p[:, i]
        cosang = (u * w).sum(1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        out[:, i] = np.arccos(np.clip(cosang, -1.0, 1.0))
    return out


def _arc_length(P: SupportFunction2D, theta: np.ndarray) -> np.ndarray:
    """s(theta) = int_0^theta rho, in closed form."""
    k = np.arange(1, P.degree + 1)
    s = P.a0 * theta
    if P.degree:
        kt = np.multiply.outer(theta, k)
        w = (1.0 - k**2) / k
        s = s + (np.sin(kt) * (w * P.a) - (np.cos(kt) - 1.0) * (w * P.b)).sum(-1)
    return s


def equal_arc_angles(P: SupportFunction2D, n: int) -> np.ndarray:
    """Normal angles of ``n`` boundary points spaced at equal arc length."""
    L = 2.0 * np.pi * P.a0
    target = L * np.arange(n) / n
    dense = np.linspace(0.0, 2.0 * np.pi, 16 * n + 1)
    th = np.interp(target, _arc_length(P, dense), dense)
    for _ in range(30):
        step = (_arc_length(P, th) - target) / curvature_measure(P, th)
        th = th - step
        if np.max(np.abs(step)) < 1e-14:
            break
    return th


def _inward_distance(x: np.ndarray, normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return np.min(offsets[None, :] - x @ normals.T, axis=1)


def _unique_edges(tri: np.ndarray):
    all_e = np.sort(np.concatenate([tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]]), axis=1)
    edges, inv = np.unique(all_e, axis=0, return_inverse=True)
    nt = len(tri)
    tri_edges = inv.reshape(3, nt).T
    return edges, tri_edges


def generate_mesh(
    body: ConvexBody2D | SupportFunction2D,
    h: float,
    rho_min: float = 1e-6,
    max_iter: int = 300,
    min_angle: float = MIN_ANGLE_DEG,
) -> TriangleMesh:
    """Triangulate the body with target edge length ``h``."""
    P = body.support if isinstance(body, ConvexBody2D) else body
    if h <= 0:
        raise ValueError("h must be positive")
    margin = P.convexity_margin()
    if margin < rho_min:
        raise MeshingError(f"body not strictly convex: min rho = {margin:.3e} < {rho_min:.1e}")

    nb = max(int(np.ceil(2.0 * np.pi * P.a0 / h)), 12)
    bth = equal_arc_angles(P, nb)
    bpts = boundary_point(P, bth)
    nxt = np.roll(np.arange(nb), -1)
    tang = bpts[nxt] - bpts
    normals = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = (normals * bpts).sum(1)

    cx, cy = P.steiner_point()
    lo, hi = bpts.min(0), bpts.max(0)
    rx = np.arange(np.floor((lo[0] - cx) / h) - 1, np.ceil((hi[0] - cx) / h) + 2)
    ry = np.arange(np.floor((lo[1] - cy) / (h * np.sqrt(3) / 2)) - 1, np.ceil((hi[1] - cy) / (h * np.sqrt(3) / 2)) + 2)
    gx, gy = np.meshgrid(rx, ry)
    gx = gx + 0.5 * (np.mod(gy, 2))
    lattice = np.stack([cx + h * gx.ravel(), cy + h * np.sqrt(3) / 2 * gy.ravel()], axis=1)
    inner = lattice[_inward_distance(lattice, normals, offsets) > 0.6 * h]

    dmin = 0.3 * h
    pts = np.vstack([bpts, inner])
    fixed = nb
    tri = None
    last = np.full_like(pts, np.inf)
    fscale, dt = 1.2, 0.2
    for _ in range(max_iter):
        if np.max(np.linalg.norm(pts - last, axis=1)) > 0.1 * h:
            last = pts.copy()
            tri = Delaunay(pts).simplices
            edges, _ = _unique_edges(tri)
        vec = pts[edges[:, 1]] - pts[edges[:, 0]]
        L = np.linalg.norm(vec, axis=1)
        L0 = fscale * np.sqrt((L**2).sum() / len(L))
        F = np.maximum(L0 - L, 0.0)
        fv = vec * (F / L)[:, None]
        force = np.zeros_like(pts)
        np.add.at(force, edges[:, 0], -fv)
        np.add.at(force, edges[:, 1], fv)
        force[:fixed] = 0.0
        move = dt * force
        pts = pts + move
        mov = pts[fixed:]
        d = _inward_distance(mov, normals, offsets)
        bad = d < dmin
        if np.any(bad):
            # push back along the nearest facet normal
            near = np.argmin(offsets[None, :] - mov[bad] @ normals.T, axis=1)
            mov[bad] += (dmin - d[bad])[:, None] * normals[near]
            pts[fixed:] = mov
        if np.max(np.linalg.norm(move[fixed:], axis=1), initial=0.0) < 1e-3 * h:
            break

    tri = Delaunay(pts).simplices
    tri = _orient(pts, tri)
    return _finalize(pts, tri, nb, bth, h, min_angle)


def _orient(pts, tri):
    p = pts[tri]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    neg = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    tri = tri.copy()
    tri[neg] = tri[neg][:, [0, 2, 1]]
    return tri


def _finalize(pts, tri, nb, bth, h, min_angle) -> TriangleMesh:
    # canonical triangle order for reproducibility
    tri = np.array([np.roll(t, -int(np.argmin(t))) for t in tri])
    tri = tri[np.lexsort(tri.T[::-1])]
    angles = triangle_angles(pts, tri)
    amin = np.degrees(angles.min())
    if amin < min_angle:
        worst = int(np.argmin(angles.min(axis=1)))
        raise MeshingError(
            f"meshing failed: minimum angle {amin:.2f} deg < {min_angle} deg (triangle {worst}, vertices {tri[worst].tolist()})"
        )
    edges, tri_edges = _unique_edges(tri)
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    bverts = np.arange(nb)
    pair = np.sort(np.stack([bverts, np.roll(bverts, -1)], axis=1), axis=1)
    lookup = {tuple(e): i for i, e in enumerate(edges.tolist())}
    try:
        bedges = np.array([lookup[tuple(e)] for e in pair.tolist()])
    except KeyError as exc:
        raise MeshingError(f"boundary edge {exc} missing from triangulation") from None
    if np.sum(counts == 1) != nb or not np.all(counts[bedges] == 1):
        raise MeshingError("triangulation boundary does not match the sampled curve")
    a, b = pts[bverts], pts[np.roll(bverts, -1)]
    t = b - a
    lengths = np.linalg.norm(t, axis=1)
    btheta = np.mod(np.arctan2(-t[:, 0], t[:, 1]), 2 * np.pi)
    edge_tri = np.empty(len(edges), dtype=int)
    edge_tri[tri_edges.ravel()] = np.repeat(np.arange(len(tri)), 3)
    return TriangleMesh(
        vertices=pts,
        triangles=tri,
        edges=edges,
        tri_edges=tri_edges,
        boundary_vertices=bverts,
        boundary_edges=bedges,
        boundary_theta=btheta,
        boundary_midpoints=0.5 * (a + b),
        boundary_lengths=lengths,
        boundary_triangles=edge_tri[bedges],
        h=float(h),
    )


def polygon_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


__all__ = ["TriangleMesh", "MeshingError", "generate_mesh", "polygon_area", "equal_arc_angles", "angle_grid"]
