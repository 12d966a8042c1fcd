"""End-to-end forward map and round-trip consistency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import ConvexBody2D, SupportFunction2D, angle_grid, evaluate_support
from .inverse import (
    ATensor,
    ReconstructionSolution,
    SolverOptions,
    assemble_A,
    build_basis,
    filter_convex,
    solve_quadratic_system,
)
from .mesh import TriangleMesh, generate_mesh
from .plate import EigenPair, PlateSystem, build_system, resolve_multiplicity, solve_eigenpairs
from .sfunctions import SFunction, extract_sfunctions, verify_normalization


@dataclass
class ForwardConfig:
    h: float = 0.05
    modes: int = 3
    grid_size: int = 256
    smoothing_degree: int | None = 12
    trace_method: str = "reaction"
    # combine meshes h and 2h as (4 s_h - s_2h) / 3, for simple modes only
    richardson: bool = False
    richardson_gap: float = 1e-2


@dataclass
class ForwardResult:
    body: ConvexBody2D
    mesh: TriangleMesh
    system: PlateSystem
    pairs: list[EigenPair]
    sfuncs: list[SFunction]

    def report(self) -> dict:
        return {
            "body": self.body.label,
            "h": self.mesh.h,
            "triangles": int(len(self.mesh.triangles)),
            "dofs": int(self.system.ndof),
            "modes": [
                {
                    "j": s.mode_index,
                    "lambda": s.lam,
                    "richardson": s.provenance.get("richardson", False),
                    "rellich_residual": s.provenance["rellich_residual"],
                    "normalization_residual": verify_normalization(s, self.body),
                }
                for s in self.sfuncs
            ],
        }


def forward(body: ConvexBody2D, config: ForwardConfig | None = None) -> ForwardResult:
    cfg = config or ForwardConfig()
    fine = _forward_level(body, cfg, cfg.h)
    if not cfg.richardson:
        return fine
    coarse = _forward_level(body, cfg, 2.0 * cfg.h)
    fine.sfuncs = richardson_combine(fine.sfuncs, coarse.sfuncs, cfg.richardson_gap)
    return fine


def _isolated(lams: list[float], gap: float) -> list[bool]:
    out = []
    for i, lam in enumerate(lams):
        nb = [abs(lam - lams[k]) / lam for k in (i - 1, i + 1) if 0 <= k < len(lams)]
        out.append(all(d >= gap for d in nb))
    return out


def richardson_combine(fine: list[SFunction], coarse: list[SFunction], gap: float = 1e-2) -> list[SFunction]:
    """Second-order extrapolation of s-functions from meshes h and 2h.

    Modes whose eigenvalue lies within ``gap`` of a neighbour at either level
    are left at the fine level, since their eigenvectors need not correspond.
    """
    ok = [a and b for a, b in zip(_isolated([s.lam for s in fine], gap), _isolated([s.lam for s in coarse], gap))]
    out = []
    for f, c, use in zip(fine, coarse, ok):
        prov = dict(f.provenance)
        prov["richardson"] = bool(use)
        prov["coarse_h"] = c.provenance.get("h")
        if use:
            vals = np.maximum((4.0 * f.values - c.values) / 3.0, 0.0)
            lam = (4.0 * f.lam - c.lam) / 3.0
        else:
            vals, lam = f.values, f.lam
        out.append(SFunction(f.mode_index, vals, lam, f.theta0, f.dtheta, prov))
    return out


def _forward_level(body: ConvexBody2D, cfg: ForwardConfig, h: float) -> ForwardResult:
    mesh = generate_mesh(body, h)
    system = build_system(mesh)
    # one extra pair so a multiplet ending at mode J is seen whole
    pairs = solve_eigenpairs(system, cfg.modes + 1)
    pairs = resolve_multiplicity(
        body, system, pairs, method=cfg.trace_method, smoothing_degree=cfg.smoothing_degree, nodes=cfg.grid_size
    )[: cfg.modes]
    sfuncs = extract_sfunctions(body, system, pairs, cfg.grid_size, cfg.smoothing_degree, cfg.trace_method)
    return ForwardResult(body, mesh, system, pairs, sfuncs)


def support_sup_error(P: SupportFunction2D, truth: SupportFunction2D, gauge: str = "steiner", nodes: int = 2048) -> float:
    """sup |P - P_truth| relative to the mean radius of the truth.

    With the Steiner gauge the truth is first translated so its Steiner point
    sits at the origin, matching the pinned first harmonics of reconstructions.
    """
    if gauge == "steiner":
        cx, cy = truth.steiner_point()
        truth = truth.translated(-cx, -cy)
    th = angle_grid(nodes)
    return float(np.max(np.abs(evaluate_support(P, th) - evaluate_support(truth, th))) / truth.a0)


def sfunction_sup_errors(new: list[SFunction], ref: list[SFunction]) -> list[float]:
    return [float(np.max(np.abs(a.values - b.values)) / np.max(np.abs(b.values))) for a, b in zip(new, ref)]


def verify_consistency(
    solutions: list[ReconstructionSolution],
    sfuncs: list[SFunction],
    config: ForwardConfig | None = None,
    truth: ConvexBody2D | None = None,
    gauge: str = "steiner",
) -> list[dict]:
    """Re-run the forward map on each reconstruction and compare with the input data."""
    cfg = config or ForwardConfig(modes=len(sfuncs))
    out = []
    for sol in solutions:
        entry: dict = {"start_id": sol.start_id}
        try:
            fw = forward(sol.body, cfg)
        except Exception as exc:  # forward failures are reported per solution
            entry["error"] = f"{type(exc).__name__}: {exc}"
            out.append(entry)
            continue
        entry["sfunction_sup_errors"] = sfunction_sup_errors(fw.sfuncs, sfuncs)
        entry["lambda_rel_errors"] = [abs(a.lam - b.lam) / b.lam for a, b in zip(fw.sfuncs, sfuncs)]
        if truth is not None:
            entry["support_sup_error"] = support_sup_error(sol.body.support, truth.support, gauge)
        entry["regenerated"] = fw.sfuncs
        out.append(entry)
    return out


@dataclass
class RoundTrip:
    forward: ForwardResult
    A: ATensor
    solutions: list[ReconstructionSolution]
    filtered: list[ReconstructionSolution]
    consistency: list[dict]


def roundtrip(
    body: ConvexBody2D,
    harmonics: int,
    config: ForwardConfig | None = None,
    opts: SolverOptions | None = None,
    check_all: bool = False,
) -> RoundTrip:
    cfg = config or ForwardConfig()
    opts = opts or SolverOptions()
    fw = forward(body, cfg)
    A = assemble_A(fw.sfuncs, build_basis(harmonics))
    sols = solve_quadratic_system(A, opts)
    kept, filtered = filter_convex(sols, A.basis)
    checked = kept if check_all else kept[:1]
    consistency = verify_consistency(checked, fw.sfuncs, cfg, truth=body, gauge=opts.gauge)
    return RoundTrip(fw, A, kept, filtered, consistency)
