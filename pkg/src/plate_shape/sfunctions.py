"""Boundary s-functions parameterized by the outward normal angle."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .convex import ConvexBody2D, SupportFunction2D, curvature_measure, evaluate_support
from .plate import (
    EigenPair,
    PlateSystem,
    boundary_laplacian_trace,
    rellich_check,
    trace_on_grid,
)

DEFAULT_GRID = 256
NEGATIVE_TOL = 1e-12


class SFunctionFormatError(ValueError):
    pass


class GaussMapError(RuntimeError):
    pass


@dataclass(frozen=True)
class SFunction:
    mode_index: int
    values: np.ndarray
    lam: float
    theta0: float = 0.0
    dtheta: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.dtheta is None:
            object.__setattr__(self, "dtheta", 2.0 * np.pi / len(v))

    @property
    def theta_grid(self) -> np.ndarray:
        return self.theta0 + self.dtheta * np.arange(len(self.values))

    def grid_key(self) -> tuple[float, float, int]:
        return (self.theta0, self.dtheta, len(self.values))

    def __call__(self, theta):
        """Trigonometric interpolant of the samples."""
        return trig_interpolate(self.values, np.asarray(theta, dtype=float) - self.theta0)


def trig_interpolate(samples: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Real trigonometric interpolant of uniform samples on [0, 2 pi)."""
    n = len(samples)
    c = np.fft.rfft(samples) / n
    k = np.arange(len(c))
    w = np.full(len(c), 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0  # Nyquist coefficient is real
    kt = np.multiply.outer(np.atleast_1d(theta), k)
    out = (np.cos(kt) * (w * c.real) - np.sin(kt) * (w * c.imag)).sum(-1)
    return out if np.ndim(theta) else float(out[0])


def check_gauss_map(theta_mesh_order: np.ndarray) -> None:
    d = np.mod(np.diff(np.append(theta_mesh_order, theta_mesh_order[0])), 2 * np.pi)
    if np.any(d <= 0) or not np.isclose(d.sum(), 2 * np.pi, atol=1e-9):
        raise GaussMapError("Gauss map not invertible on mesh: boundary normal angles are not monotone")


def extract_sfunctions(
    body: ConvexBody2D | SupportFunction2D,
    system: PlateSystem,
    pairs: list[EigenPair],
    grid_size: int = DEFAULT_GRID,
    smoothing_degree: int | None = 12,
    method: str = "reaction",
) -> list[SFunction]:
    """s_j = |Delta u_j|^2 / lambda_j on a uniform normal-angle grid."""
    check_gauss_map(system.mesh.boundary_theta)
    grid = 2.0 * np.pi * np.arange(grid_size) / grid_size
    out = []
    for pair in pairs:
        trace = boundary_laplacian_trace(system, pair, method=method)
        lap = trace_on_grid(trace, grid, smoothing_degree)
        values = lap**2 / pair.lam
        prov = {
            "h": system.mesh.h,
            "smoothing_degree": smoothing_degree,
            "trace_method": method,
            "rellich_residual": rellich_check(body, system, pair, smoothing_degree, method, grid_size),
        }
        out.append(SFunction(pair.mode_index, values, pair.lam, 0.0, 2.0 * np.pi / grid_size, prov))
    return out


def normalization_integral(s: SFunction, body: ConvexBody2D | SupportFunction2D) -> float:
    P = body.support if isinstance(body, ConvexBody2D) else body
    th = s.theta_grid
    return float(np.sum(s.values * evaluate_support(P, th) * curvature_measure(P, th)) * s.dtheta)


def verify_normalization(s: SFunction, body) -> float:
    """| int s P_D rho_D dtheta - 4 | / 4."""
    return abs(normalization_integral(s, body) - 4.0) / 4.0


def _mode_to_json(s: SFunction) -> dict:
    return {
        "j": s.mode_index,
        "lambda": s.lam,
        "theta0": s.theta0,
        "dtheta": s.dtheta,
        "values": s.values.tolist(),
        "provenance": s.provenance,
    }


def sfunctions_to_json(sfuncs: list[SFunction]) -> dict:
    return {"modes": [_mode_to_json(s) for s in sfuncs]}


def save_sfunctions(sfuncs: list[SFunction], path) -> None:
    with open(path, "w") as fh:
        json.dump(sfunctions_to_json(sfuncs), fh, indent=1)
        fh.write("\n")


def sfunctions_from_json(data: dict) -> list[SFunction]:
    try:
        modes = data["modes"]
    except (KeyError, TypeError):
        raise SFunctionFormatError("missing 'modes' list") from None
    if not isinstance(modes, list) or not modes:
        raise SFunctionFormatError("'modes' must be a non-empty list")
    out = []
    for m in modes:
        try:
            values = np.asarray(m["values"], dtype=float)
            lam = float(m["lambda"])
            j = int(m["j"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SFunctionFormatError(f"malformed mode entry: {exc}") from None
        if values.ndim != 1 or len(values) < 2 or not np.all(np.isfinite(values)):
            raise SFunctionFormatError(f"mode {j}: values must be a finite 1-D list")
        n = len(values)
        theta0 = float(m.get("theta0", 0.0))
        dtheta = float(m.get("dtheta", 2 * np.pi / n))
        if "theta" in m:
            th = np.asarray(m["theta"], dtype=float)
            if len(th) != n or not np.allclose(np.diff(th), dtheta, rtol=0, atol=1e-12):
                raise SFunctionFormatError(f"mode {j}: theta grid is not uniform")
            theta0 = float(th[0])
        if not np.isclose(dtheta * n, 2 * np.pi, rtol=1e-12, atol=0):
            raise SFunctionFormatError(f"mode {j}: grid with {n} points and step {dtheta} does not cover [0, 2pi)")
        if values.min() < -NEGATIVE_TOL:
            raise SFunctionFormatError(f"mode {j}: negative s-function value {values.min():.3e}")
        out.append(SFunction(j, values, lam, theta0, dtheta, dict(m.get("provenance", {}))))
    keys = {s.grid_key() for s in out}
    if len(keys) != 1:
        raise SFunctionFormatError("grid mismatch across modes")
    return out


def load_sfunctions(path) -> list[SFunction]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SFunctionFormatError(f"malformed s-function file: {exc}") from None
    return sfunctions_from_json(data)


def export_csv(sfuncs: list[SFunction], path) -> None:
    th = sfuncs[0].theta_grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta"] + [f"s{s.mode_index}" for s in sfuncs])
        for i, t in enumerate(th):
            w.writerow([repr(float(t))] + [repr(float(s.values[i])) for s in sfuncs])
