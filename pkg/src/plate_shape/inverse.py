"""Reconstruction of a convex body from s-functions.

The support function is expanded in the trigonometric basis
(const, cos 1, sin 1, cos 2, sin 2, ...), each basis function split into a
pair of basic domains G^k, H^k.  Every s-function contributes one quadratic
equation ``alpha^T A_j alpha = 4`` which is solved by multi-start damped
Gauss-Newton.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .convex import (
    TOL_CONVEX,
    ConvexBody2D,
    DCPair,
    SupportFunction2D,
    angle_grid,
    basis_function,
    boundary_integral,
    curvature_measure,
    dc_decompose_basis,
    evaluate_support,
)
from .sfunctions import SFunction

log = logging.getLogger(__name__)


class NoAdmissibleSolution(RuntimeError):
    def __init__(self, message: str, diagnostics: list[dict]):
        super().__init__(message)
        self.diagnostics = diagnostics


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class BasisSet:
    entries: tuple[tuple[str, int], ...]
    pairs: tuple[DCPair, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def harmonics(self) -> int:
        return max((m for _, m in self.entries), default=0)

    def index(self, kind: str, m: int) -> int:
        return self.entries.index((kind, m))

    def gauge_indices(self) -> list[int]:
        return [i for i, (kind, m) in enumerate(self.entries) if m == 1]

    def steiner_mask(self) -> np.ndarray:
        """1 on every coefficient except the first harmonics (the Steiner point)."""
        mask = np.ones(self.size)
        mask[self.gauge_indices()] = 0.0
        return mask

    def to_support(self, alpha) -> SupportFunction2D:
        N = self.harmonics
        a, b = np.zeros(N), np.zeros(N)
        a0 = 0.0
        for (kind, m), c in zip(self.entries, alpha):
            if kind == "const":
                a0 = float(c)
            elif kind == "cos":
                a[m - 1] = c
            else:
                b[m - 1] = c
        return SupportFunction2D(a0, a, b)

    def from_support(self, P: SupportFunction2D) -> np.ndarray:
        P = P.padded(max(P.degree, self.harmonics))
        out = np.empty(self.size)
        for i, (kind, m) in enumerate(self.entries):
            out[i] = P.a0 if kind == "const" else (P.a[m - 1] if kind == "cos" else P.b[m - 1])
        return out

    def phi_values(self, theta) -> np.ndarray:
        return np.array([evaluate_support(basis_function(kind, m), theta) for kind, m in self.entries])

    def rho_values(self, theta) -> np.ndarray:
        """Curvature measure of each basis function (not of its DC pair)."""
        return np.array([curvature_measure(basis_function(kind, m), theta) for kind, m in self.entries])

    def dc_rho_values(self, theta) -> np.ndarray:
        """rho_{G^k} - rho_{H^k}, from the coefficient difference of each pair."""
        return np.array([evaluate_support((p.g - p.h).curvature_coefficients(), theta) for p in self.pairs])


def build_basis(harmonics: int) -> BasisSet:
    entries = [("const", 0)]
    for m in range(1, harmonics + 1):
        entries += [("cos", m), ("sin", m)]
    pairs = tuple(dc_decompose_basis(m, kind) for kind, m in entries)
    return BasisSet(tuple(entries), pairs)


@dataclass(frozen=True)
class ATensor:
    values: np.ndarray  # (J, K, K)
    basis: BasisSet
    modes: tuple[int, ...] = ()

    @property
    def n_modes(self) -> int:
        return self.values.shape[0]


def _shared_grid(sfuncs: list[SFunction]) -> np.ndarray:
    if not sfuncs:
        raise ValueError("at least one s-function is required")
    keys = {s.grid_key() for s in sfuncs}
    if len(keys) != 1:
        raise GridMismatchError("s-functions do not share one theta grid")
    return sfuncs[0].theta_grid


def assemble_A(sfuncs: list[SFunction], basis: BasisSet) -> ATensor:
    """A[j,k,m] = int s_j phi_m (rho_{G^k} - rho_{H^k}) dtheta on the shared grid."""
    th = _shared_grid(sfuncs)
    dtheta = sfuncs[0].dtheta
    S = np.stack([s.values for s in sfuncs])  # (J, G)
    phi = basis.phi_values(th)  # (K, G)
    drho = basis.dc_rho_values(th)  # (K, G)
    A = np.einsum("jg,kg,mg->jkm", S, drho, phi) * dtheta
    return ATensor(A, basis, tuple(s.mode_index for s in sfuncs))


def assemble_A_two_boundary(sfuncs: list[SFunction], basis: BasisSet, nodes: int | None = None) -> ATensor:
    """Same tensor as a difference of boundary integrals over S_{G^k} and S_{H^k}."""
    _shared_grid(sfuncs)
    J, K = len(sfuncs), basis.size
    A = np.empty((J, K, K))
    for j, s in enumerate(sfuncs):
        for m, pm in enumerate(basis.pairs):
            def f(t, s=s, pm=pm):
                return s(t) * (evaluate_support(pm.g, t) - evaluate_support(pm.h, t))

            for k, pk in enumerate(basis.pairs):
                A[j, k, m] = boundary_integral(pk.g, f, nodes) - boundary_integral(pk.h, f, nodes)
    return ATensor(A, basis, tuple(s.mode_index for s in sfuncs))


def _tensor_and_mask(A: ATensor | np.ndarray, n: int):
    if isinstance(A, ATensor):
        return A.values, A.basis.steiner_mask()
    return np.asarray(A), np.ones(n)


def residuals(A: ATensor | np.ndarray, alpha) -> np.ndarray:
    """r_j = sum_{k,m} A[j,k,m] a_k a_m - 4.

    For an :class:`ATensor` the support factor is measured from the body's
    Steiner point, i.e. ``a`` has its first harmonics removed.  Rows of A at
    the first harmonics vanish already, so this only fixes the origin of
    ``P_D`` in the integrand and makes ``r`` exactly translation invariant.
    A bare array is evaluated as a plain bilinear form.
    """
    a = np.asarray(alpha, dtype=float)
    T, mask = _tensor_and_mask(A, a.size)
    a = a * mask
    return np.einsum("jkm,k,m->j", T, a, a) - 4.0


def jacobian(A: ATensor | np.ndarray, alpha) -> np.ndarray:
    """dr_j / da_k, consistent with :func:`residuals`."""
    a = np.asarray(alpha, dtype=float)
    T, mask = _tensor_and_mask(A, a.size)
    return np.einsum("jkm,m->jk", T + T.transpose(0, 2, 1), a * mask) * mask


@dataclass
class SolverOptions:
    n_starts: int = 16
    seed: int = 0
    gauge: str = "steiner"  # "steiner" pins the first harmonics at zero; "none" leaves them free
    radius_range: tuple[float, float] = (0.5, 2.0)
    perturbation: float = 1e-5  # relative size of random harmonic perturbation of start disks
    convexity_weight: float = 1e2
    penalty_nodes: int = 256
    inner: SupportFunction2D | None = None  # P_inner <= P_alpha
    outer: SupportFunction2D | None = None  # P_alpha <= P_outer
    bounds_weight: float = 1e2
    area: float | None = None
    perimeter: float | None = None
    constraint_weight: float = 1e2
    tol_accept: float | None = None  # default 1e-6 * sqrt(J)
    max_iter: int = 200
    armijo_c: float = 1e-4
    merge_tol: float = 1e-3
    tie_floor: float = 1e-3  # residuals below tie_floor * tol_accept count as equal


@dataclass(frozen=True)
class ReconstructionSolution:
    alpha: np.ndarray
    residual_norm: float
    convexity_margin: float
    body: ConvexBody2D
    start_id: int
    iterations: int = 0

    def to_json(self) -> dict:
        return {
            "alpha": [float(x) for x in self.alpha],
            "residual": self.residual_norm,
            "convexity_margin": self.convexity_margin,
            "start_id": self.start_id,
            "body": self.body.support.to_json(),
        }


def _area_form(basis: BasisSet) -> np.ndarray:
    d = [np.pi if kind == "const" else 0.5 * np.pi * (1 - m * m) for kind, m in basis.entries]
    return np.diag(d)


@dataclass
class _Problem:
    A: ATensor
    basis: BasisSet
    opts: SolverOptions
    free: np.ndarray
    phi: np.ndarray = field(init=False)
    rho: np.ndarray = field(init=False)
    sw: float = field(init=False)

    def __post_init__(self):
        th = angle_grid(self.opts.penalty_nodes)
        self.theta = th
        self.phi = self.basis.phi_values(th)
        self.rho = self.basis.rho_values(th)
        dth = 2 * np.pi / len(th)
        self.sw = math.sqrt(self.opts.convexity_weight * dth)
        self.sb = math.sqrt(self.opts.bounds_weight * dth)
        self.inner = None if self.opts.inner is None else evaluate_support(self.opts.inner, th)
        self.outer = None if self.opts.outer is None else evaluate_support(self.opts.outer, th)
        self.Qa = _area_form(self.basis)
        self.const = self.basis.index("const", 0)

    def full(self, x):
        a = np.zeros(self.basis.size)
        a[self.free] = x
        return a

    def evaluate(self, x):
        a = self.full(x)
        blocks = [residuals(self.A, a)]
        jacs = [jacobian(self.A, a)]
        rho = a @ self.rho
        act = rho < 0
        blocks.append(self.sw * np.where(act, -rho, 0.0))
        jacs.append(-self.sw * (self.rho * act).T)
        if self.inner is not None or self.outer is not None:
            P = a @ self.phi
            if self.inner is not None:
                act = P < self.inner
                blocks.append(self.sb * np.where(act, self.inner - P, 0.0))
                jacs.append(-self.sb * (self.phi * act).T)
            if self.outer is not None:
                act = P > self.outer
                blocks.append(self.sb * np.where(act, P - self.outer, 0.0))
                jacs.append(self.sb * (self.phi * act).T)
        sc = math.sqrt(self.opts.constraint_weight)
        if self.opts.area is not None:
            blocks.append(np.array([sc * (a @ self.Qa @ a - self.opts.area)]))
            jacs.append((sc * 2 * self.Qa @ a)[None, :])
        if self.opts.perimeter is not None:
            row = np.zeros(self.basis.size)
            row[self.const] = sc * 2 * np.pi
            blocks.append(np.array([sc * (2 * np.pi * a[self.const] - self.opts.perimeter)]))
            jacs.append(row[None, :])
        F = np.concatenate(blocks)
        Jf = np.concatenate(jacs, axis=0)[:, self.free]
        return F, Jf


def _gauss_newton(prob: _Problem, x0: np.ndarray):
    """Gauss-Newton with minimum-norm steps and Armijo backtracking."""
    x = x0.copy()
    F, Jf = prob.evaluate(x)
    f = 0.5 * F @ F
    it = 0
    status = "max_iter"
    for it in range(1, prob.opts.max_iter + 1):
        if f < 1e-30:
            status = "converged"
            break
        g = Jf.T @ F
        p, *_ = np.linalg.lstsq(Jf, -F, rcond=1e-12)
        slope = g @ p
        if not slope < 0:
            status = "stalled"
            break
        t = 1.0
        while t > 1e-12:
            xn = x + t * p
            Fn, Jn = prob.evaluate(xn)
            fn = 0.5 * Fn @ Fn
            if fn <= f + prob.opts.armijo_c * t * slope:
                break
            t *= 0.5
        else:
            status = "line_search_failed"
            break
        step = np.linalg.norm(xn - x)
        x, F, Jf, f_old, f = xn, Fn, Jn, f, fn
        if step <= 1e-15 * max(1.0, np.linalg.norm(x)) or f_old - f <= 1e-16 * f_old:
            status = "converged"
            break
    return x, it, status


def start_points(basis: BasisSet, opts: SolverOptions) -> list[np.ndarray]:
    rng = np.random.default_rng(opts.seed)
    lo, hi = opts.radius_range
    c = basis.index("const", 0)
    gauge = set(basis.gauge_indices()) if opts.gauge == "steiner" else set()
    starts = []
    for _ in range(opts.n_starts):
        r = rng.uniform(lo, hi)
        a = rng.normal(0.0, opts.perturbation * r, basis.size)
        a[c] = r
        for g in gauge:
            a[g] = 0.0
        starts.append(a)
    return starts


def _sup_diff(prob: _Problem, a, b) -> float:
    return float(np.max(np.abs((a - b) @ prob.phi)))


def solve_quadratic_system(A: ATensor, opts: SolverOptions | None = None) -> list[ReconstructionSolution]:
    """All distinct local solutions of alpha^T A_j alpha = 4 found from the start list."""
    opts = opts or SolverOptions()
    basis = A.basis
    J = A.n_modes
    tol = opts.tol_accept if opts.tol_accept is not None else 1e-6 * math.sqrt(J)
    if opts.gauge not in ("steiner", "none"):
        raise ValueError(f"unknown gauge {opts.gauge!r}")
    pinned = set(basis.gauge_indices()) if opts.gauge == "steiner" else set()
    free = np.array([i for i in range(basis.size) if i not in pinned], dtype=int)
    prob = _Problem(A, basis, opts, free)

    found: list[ReconstructionSolution] = []
    diagnostics = []
    for sid, a0 in enumerate(start_points(basis, opts)):
        x, it, status = _gauss_newton(prob, a0[free])
        a = prob.full(x)
        if a[prob.const] < 0:
            a = -a  # residuals are even in alpha; keep the positive mean radius branch
        res = float(np.linalg.norm(residuals(A, a)))
        diagnostics.append({"start_id": sid, "iterations": it, "status": status, "residual": res})
        log.debug("start %d: %s after %d iterations, |r| = %.3e", sid, status, it, res)
        if not (res <= tol) or a[prob.const] <= 0:
            continue
        margin = float(np.min(a @ prob.rho))
        sol = ReconstructionSolution(a, res, margin, ConvexBody2D(basis.to_support(a), f"solution-{sid}"), sid, it)
        for i, other in enumerate(found):
            if _sup_diff(prob, other.alpha, a) <= opts.merge_tol * max(abs(a[prob.const]), 1e-300):
                if res < other.residual_norm:
                    found[i] = sol
                break
        else:
            found.append(sol)
    if not found:
        raise NoAdmissibleSolution("no admissible solution found", diagnostics)
    floor = opts.tie_floor * tol
    found.sort(key=lambda s: (max(s.residual_norm, floor), -s.convexity_margin, s.start_id))
    return found


def reconstruct_body(solution: ReconstructionSolution, basis: BasisSet, tol_convex: float = TOL_CONVEX):
    """The body with support sum_k alpha_k phi_k, or ``None`` if it is not convex."""
    P = basis.to_support(solution.alpha)
    if P.convexity_margin() < -tol_convex:
        return None
    return ConvexBody2D(P, solution.body.label)


def filter_convex(solutions, basis: BasisSet, tol_convex: float = TOL_CONVEX):
    kept, filtered = [], []
    for s in solutions:
        (kept if reconstruct_body(s, basis, tol_convex) is not None else filtered).append(s)
    return kept, filtered


def invert(sfuncs: list[SFunction], harmonics: int, opts: SolverOptions | None = None):
    """Assemble, solve and convexity-filter; returns ``(kept, filtered, A)``."""
    basis = build_basis(harmonics)
    A = assemble_A(sfuncs, basis)
    sols = solve_quadratic_system(A, opts)
    kept, filtered = filter_convex(sols, basis)
    return kept, filtered, A


def conditioning(A: ATensor, alpha, gauge: str = "steiner") -> dict:
    """Singular values of the residual Jacobian at a solution, over the free coefficients."""
    basis = A.basis
    pinned = set(basis.gauge_indices()) if gauge == "steiner" else set()
    free = [i for i in range(basis.size) if i not in pinned]
    sv = np.linalg.svd(jacobian(A, alpha)[:, free], compute_uv=False)
    return {
        "singular_values": [float(x) for x in sv],
        "free_coefficients": len(free),
        "equations": A.n_modes,
        "condition": float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else float("inf"),
    }
