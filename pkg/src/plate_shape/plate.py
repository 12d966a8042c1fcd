"""Clamped plate eigenproblem on a Morley-element discretization.

Degrees of freedom are vertex values (indices ``0..nv-1``) followed by
edge-midpoint normal derivatives (indices ``nv..nv+ne-1``).  Every edge
carries a global unit normal; boundary edges use the outward one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .convex import (
    ConvexBody2D,
    SupportFunction2D,
    angle_grid,
    curvature_measure,
    evaluate_support,
    periodic_integral,
)
from .mesh import TriangleMesh

# Dunavant degree-4 rule on the reference triangle (barycentric, weights sum to 1)
_QA, _QB = 0.445948490915965, 0.091576213509771
_QW = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)
_QBARY = np.array(
    [
        [_QA, _QA, 1 - 2 * _QA],
        [_QA, 1 - 2 * _QA, _QA],
        [1 - 2 * _QA, _QA, _QA],
        [_QB, _QB, 1 - 2 * _QB],
        [_QB, 1 - 2 * _QB, _QB],
        [1 - 2 * _QB, _QB, _QB],
    ]
)

DENSE_LIMIT = 1500
MULTIPLICITY_GAP = 1e-6
ROTATION_SAMPLES = 64


class AssemblyError(RuntimeError):
    pass


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenPair:
    lam: float
    dofs: np.ndarray  # full-length vector, zeros on clamped dofs
    mode_index: int
    l2_norm: float = 1.0


@dataclass
class ElementData:
    coeffs: np.ndarray  # (nt, 6, 6) monomial coefficients of the local basis
    hessians: np.ndarray  # (nt, 6, 3) xx, xy, yy of each local basis function
    dofs: np.ndarray  # (nt, 6) global dof indices
    areas: np.ndarray


@dataclass
class PlateSystem:
    mesh: TriangleMesh
    K: sp.csr_matrix
    M: sp.csr_matrix
    elements: ElementData
    edge_normals: np.ndarray
    free: np.ndarray | None = None
    constrained: np.ndarray | None = None
    Kc: sp.csr_matrix | None = field(default=None, repr=False)
    Mc: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def ndof(self) -> int:
        return self.K.shape[0]

    def expand(self, reduced: np.ndarray) -> np.ndarray:
        full = np.zeros(self.ndof)
        full[self.free] = reduced
        return full


def edge_normals(mesh: TriangleMesh) -> np.ndarray:
    v = mesh.vertices
    t = v[mesh.edges[:, 1]] - v[mesh.edges[:, 0]]
    n = np.stack([t[:, 1], -t[:, 0]], axis=1) / np.linalg.norm(t, axis=1)[:, None]
    bn = np.stack([np.cos(mesh.boundary_theta), np.sin(mesh.boundary_theta)], axis=1)
    flip = (n[mesh.boundary_edges] * bn).sum(1) < 0
    n[mesh.boundary_edges[flip]] *= -1.0
    return n


def element_data(mesh: TriangleMesh, normals: np.ndarray | None = None) -> ElementData:
    """Local Morley bases for every triangle, vectorized."""
    if normals is None:
        normals = edge_normals(mesh)
    p = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    areas = mesh.areas()
    if np.any(areas <= 1e-14 * mesh.h**2):
        bad = int(np.argmin(areas))
        raise AssemblyError(f"degenerate triangle {bad} (area {areas[bad]:.3e})")
    c = p.mean(axis=1)
    s = np.sqrt(2.0 * areas)
    nt = len(p)

    def mono(xy):  # xy (nt, q, 2) in physical coords -> (nt, q, 6)
        x = (xy[..., 0] - c[:, None, 0]) / s[:, None]
        y = (xy[..., 1] - c[:, None, 1]) / s[:, None]
        return np.stack([np.ones_like(x), x, y, x * x, x * y, y * y], axis=-1)

    def grad_mono(xy):  # (nt, q, 6, 2)
        x = (xy[..., 0] - c[:, None, 0]) / s[:, None]
        y = (xy[..., 1] - c[:, None, 1]) / s[:, None]
        z, o = np.zeros_like(x), np.ones_like(x)
        gx = np.stack([z, o, z, 2 * x, y, z], axis=-1)
        gy = np.stack([z, z, o, z, x, 2 * y], axis=-1)
        return np.stack([gx, gy], axis=-1) / s[:, None, None, None]

    V = np.empty((nt, 6, 6))
    V[:, :3, :] = mono(p)
    mids = 0.5 * (p[:, [1, 2, 0]] + p[:, [2, 0, 1]])  # midpoint of edge opposite vertex i
    nrm = normals[mesh.tri_edges]  # (nt, 3, 2)
    V[:, 3:, :] = np.einsum("tqmd,tqd->tqm", grad_mono(mids), nrm)
    C = np.linalg.solve(V, np.broadcast_to(np.eye(6), V.shape))  # V C = I
    inv_s2 = (1.0 / s**2)[:, None]
    hess = np.stack([2 * C[:, 3, :] * inv_s2, C[:, 4, :] * inv_s2, 2 * C[:, 5, :] * inv_s2], axis=-1)
    dofs = np.concatenate([mesh.triangles, mesh.n_vertices + mesh.tri_edges], axis=1)
    return ElementData(coeffs=C, hessians=hess, dofs=dofs, areas=areas)


def element_matrices(mesh: TriangleMesh, data: ElementData):
    H = data.hessians
    A = data.areas
    Ke = A[:, None, None] * (
        np.einsum("ti,tj->tij", H[..., 0], H[..., 0])
        + 2 * np.einsum("ti,tj->tij", H[..., 1], H[..., 1])
        + np.einsum("ti,tj->tij", H[..., 2], H[..., 2])
    )
    p = mesh.vertices[mesh.triangles]
    qxy = np.einsum("qk,tkd->tqd", _QBARY, p)
    c = p.mean(axis=1)
    s = np.sqrt(2.0 * A)
    x = (qxy[..., 0] - c[:, None, 0]) / s[:, None]
    y = (qxy[..., 1] - c[:, None, 1]) / s[:, None]
    mono = np.stack([np.ones_like(x), x, y, x * x, x * y, y * y], axis=-1)
    B = np.einsum("tqm,tmj->tqj", mono, data.coeffs)
    Me = A[:, None, None] * np.einsum("q,tqi,tqj->tij", _QW, B, B)
    return Ke, Me


def assemble(mesh: TriangleMesh) -> PlateSystem:
    """Global stiffness (Hessian:Hessian) and mass matrices."""
    normals = edge_normals(mesh)
    data = element_data(mesh, normals)
    Ke, Me = element_matrices(mesh, data)
    n = mesh.n_vertices + mesh.n_edges
    rows = np.repeat(data.dofs, 6, axis=1).ravel()
    cols = np.tile(data.dofs, (1, 6)).ravel()
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # exact symmetry regardless of summation order
    K = ((K + K.T) * 0.5).tocsr()
    M = ((M + M.T) * 0.5).tocsr()
    return PlateSystem(mesh=mesh, K=K, M=M, elements=data, edge_normals=normals)


def apply_clamped_bc(system: PlateSystem) -> PlateSystem:
    """Eliminate boundary values and boundary normal derivatives."""
    mesh = system.mesh
    constrained = np.concatenate([mesh.boundary_vertices, mesh.n_vertices + mesh.boundary_edges])
    constrained = np.unique(constrained)
    mask = np.ones(system.ndof, dtype=bool)
    mask[constrained] = False
    free = np.nonzero(mask)[0]
    system.free = free
    system.constrained = constrained
    system.Kc = system.K[free][:, free].tocsc()
    system.Mc = system.M[free][:, free].tocsc()
    return system


def build_system(mesh: TriangleMesh) -> PlateSystem:
    return apply_clamped_bc(assemble(mesh))


def _sign_fix(v: np.ndarray, weight: np.ndarray | None = None) -> np.ndarray:
    """Fix the sign so ``weight @ v > 0``, falling back to the first large entry.

    The fallback scans for the first entry within half of the largest
    magnitude, which is stable under round-off ties between symmetric dofs.
    """
    if weight is not None:
        c = float(weight @ v)
        if abs(c) > 1e-6 * float(np.abs(weight) @ np.abs(v)):
            return v if c > 0 else -v
    a = np.abs(v)
    i = int(np.argmax(a >= 0.5 * a.max()))
    return v if v[i] >= 0 else -v


def solve_eigenpairs(system: PlateSystem, J: int, dense_limit: int = DENSE_LIMIT) -> list[EigenPair]:
    """The ``J`` smallest eigenpairs of K u = lambda M u, M-normalized, ascending."""
    if J < 1:
        raise ValueError("J must be >= 1")
    if system.Kc is None:
        apply_clamped_bc(system)
    Kc, Mc = system.Kc, system.Mc
    n = Kc.shape[0]
    if J >= n:
        raise ValueError(f"requested {J} modes from a system with {n} free dofs")
    if n <= dense_limit:
        w, V = scipy.linalg.eigh(Kc.toarray(), Mc.toarray(), subset_by_index=[0, J - 1])
    else:
        v0 = np.cos(np.arange(n) * 0.618) + 1.5
        try:
            w, V = spla.eigsh(Kc, k=J, M=Mc, sigma=0.0, which="LM", v0=v0, tol=0.0, maxiter=10 * n)
        except spla.ArpackNoConvergence as exc:
            raise EigenSolverError(
                f"shift-invert Lanczos did not converge: {len(exc.eigenvalues)} of {J} pairs"
            ) from exc
    order = np.argsort(w, kind="stable")
    # M applied to the constant function: weight @ v is the integral of u
    one = np.zeros(system.ndof)
    one[: system.mesh.n_vertices] = 1.0
    weight = Mc @ one[system.free]
    pairs = []
    for j, idx in enumerate(order):
        v = V[:, idx]
        norm2 = float(v @ (Mc @ v))
        v = _sign_fix(v / np.sqrt(norm2), weight)
        lam = float(v @ (Kc @ v))
        Ku = Kc @ v
        res = np.linalg.norm(Ku - lam * (Mc @ v))
        if not lam > 0 or res > 1e-8 * np.linalg.norm(Ku):
            raise EigenSolverError(f"mode {j + 1}: lambda={lam:.6e}, residual {res:.3e} exceeds 1e-8 * |Ku|")
        pairs.append(EigenPair(lam=lam, dofs=system.expand(v), mode_index=j + 1, l2_norm=float(v @ (Mc @ v))))
    return pairs


def triangle_laplacians(system: PlateSystem, dofs: np.ndarray) -> np.ndarray:
    """Piecewise-constant Laplacian (trace of the element Hessian) per triangle."""
    H = system.elements.hessians
    loc = dofs[system.elements.dofs]
    return np.einsum("ti,ti->t", H[..., 0] + H[..., 2], loc)


@dataclass(frozen=True)
class BoundaryTrace:
    theta: np.ndarray  # outward normal angle of each boundary edge
    values: np.ndarray  # Laplacian of the eigenfunction at the edge
    lengths: np.ndarray


def boundary_laplacian_trace(system: PlateSystem, pair: EigenPair, method: str = "reaction") -> BoundaryTrace:
    """Laplacian of the discrete eigenfunction on each boundary edge.

    ``method="element"`` returns the constant Laplacian of the adjacent
    triangle.  ``method="reaction"`` returns the constraint reaction of the
    clamped normal-derivative dof divided by the edge length: the residual
    ``(K u - lambda M u)_e`` equals ``int_e Delta u dn(psi_e) ds`` for the
    clamped bilinear form, which is a variationally consistent trace.
    """
    mesh = system.mesh
    if method == "element":
        lap = triangle_laplacians(system, pair.dofs)
        vals = lap[mesh.boundary_triangles]
    elif method == "reaction":
        idx = mesh.n_vertices + mesh.boundary_edges
        r = system.K[idx] @ pair.dofs - pair.lam * (system.M[idx] @ pair.dofs)
        vals = r / mesh.boundary_lengths
    else:
        raise ValueError(f"unknown trace method {method!r}")
    order = np.argsort(mesh.boundary_theta, kind="stable")
    return BoundaryTrace(mesh.boundary_theta[order], np.asarray(vals)[order], mesh.boundary_lengths[order])


def trig_fit(theta: np.ndarray, values: np.ndarray, degree: int, weights: np.ndarray | None = None) -> SupportFunction2D:
    """Weighted least-squares projection of samples onto trigonometric polynomials."""
    k = np.arange(1, degree + 1)
    kt = np.multiply.outer(theta, k)
    A = np.concatenate([np.ones((len(theta), 1)), np.cos(kt), np.sin(kt)], axis=1)
    w = np.ones(len(theta)) if weights is None else np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(A * w[:, None], values * w, rcond=None)
    return SupportFunction2D(coef[0], coef[1 : degree + 1], coef[degree + 1 :])


def trace_on_grid(trace: BoundaryTrace, grid: np.ndarray, smoothing_degree: int | None) -> np.ndarray:
    """Resample a boundary trace to normal angles ``grid``."""
    if smoothing_degree is None:
        th = np.concatenate([trace.theta - 2 * np.pi, trace.theta, trace.theta + 2 * np.pi])
        v = np.tile(trace.values, 3)
        return np.interp(grid, th, v)
    return evaluate_support(trig_fit(trace.theta, trace.values, smoothing_degree, trace.lengths), grid)


def boundary_energy(
    body: ConvexBody2D | SupportFunction2D,
    trace: BoundaryTrace,
    smoothing_degree: int | None = 12,
    nodes: int = 256,
) -> float:
    """int |Delta u|^2 P_D(n) ds, either per edge or through the smoothed trace."""
    P = body.support if isinstance(body, ConvexBody2D) else body
    if smoothing_degree is None:
        return float(np.sum(trace.values**2 * evaluate_support(P, trace.theta) * trace.lengths))
    th = angle_grid(nodes)
    v = trace_on_grid(trace, th, smoothing_degree)
    return periodic_integral(v**2 * evaluate_support(P, th) * curvature_measure(P, th))


def rellich_check(
    body,
    system: PlateSystem,
    pair: EigenPair,
    smoothing_degree: int | None = 12,
    method: str = "reaction",
    nodes: int = 256,
) -> float:
    """Relative residual of lambda = (1/4) int |Delta u|^2 P_D(n) ds."""
    trace = boundary_laplacian_trace(system, pair, method=method)
    e = boundary_energy(body, trace, smoothing_degree, nodes)
    return abs(0.25 * e - pair.lam) / pair.lam


def resolve_multiplicity(
    body, system: PlateSystem, pairs: list[EigenPair], gap: float = MULTIPLICITY_GAP,
    samples: int = ROTATION_SAMPLES, method: str = "reaction", smoothing_degree: int | None = 12, nodes: int = 256,
) -> list[EigenPair]:
    """Within clusters of (numerically) equal eigenvalues, rotate the basis to maximize the boundary energy."""
    out: list[EigenPair] = []
    i = 0
    rng = np.random.default_rng(0)
    while i < len(pairs):
        j = i + 1
        while j < len(pairs) and (pairs[j].lam - pairs[i].lam) < gap * pairs[i].lam:
            j += 1
        group = pairs[i:j]
        if len(group) == 1:
            out.append(group[0])
        else:
            U = np.stack([p.dofs for p in group], axis=1)
            m = U.shape[1]
            if m == 2:
                phis = np.pi * np.arange(samples) / samples
                cands = np.stack([np.cos(phis), np.sin(phis)], axis=1)
            else:
                cands = rng.standard_normal((samples, m))
                cands /= np.linalg.norm(cands, axis=1)[:, None]
            lam_mean = float(np.mean([p.lam for p in group]))

            def energy(c):
                trial = EigenPair(lam_mean, U @ c, 0)
                return boundary_energy(body, boundary_laplacian_trace(system, trial, method), smoothing_degree, nodes)

            best = cands[int(np.argmax([energy(c) for c in cands]))]
            # orthonormal completion with the maximizer first
            Q, _ = np.linalg.qr(np.column_stack([best, np.eye(m)]))
            Q = Q[:, :m] * np.sign(Q[:, :1].T @ best)[0]
            for r, p in enumerate(group):
                v = U @ Q[:, r]
                out.append(EigenPair(p.lam, _sign_fix(v), p.mode_index, p.l2_norm))
        i = j
    return out
