"""Planar convex bodies described by truncated Fourier support functions.

A support function restricted to the unit circle is stored as

    P(theta) = a0 + sum_k (a_k cos k theta + b_k sin k theta),   k = 1..N

Minkowski sums are coefficient sums, the radius of curvature is
rho = P + P'' (one coefficient multiplication), and boundary integrals of
normal-dependent integrands reduce to ``int f(theta) rho(theta) dtheta``
over the normal-angle circle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DEFAULT_QUAD_NODES = 2048
TOL_CONVEX = 1e-9

BasisKind = str  # "const" | "cos" | "sin"


class QuadratureError(RuntimeError):
    """Raised when a periodic quadrature does not meet a requested tolerance."""


def quad_nodes(n: int | None = None) -> int:
    """Resolve the quadrature size, honouring ``PLATE_SHAPE_QUAD_NODES``."""
    if n is not None:
        return int(n)
    env = os.environ.get("PLATE_SHAPE_QUAD_NODES")
    if env:
        return int(env)
    return DEFAULT_QUAD_NODES


def angle_grid(n: int) -> np.ndarray:
    """Uniform grid of ``n`` angles covering [0, 2 pi)."""
    return 2.0 * np.pi * np.arange(n) / n


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SupportFunction2D:
    """Truncated Fourier series of a support function on the unit circle."""

    a0: float
    a: np.ndarray = field(default_factory=lambda: _frozen([]))
    b: np.ndarray = field(default_factory=lambda: _frozen([]))

    def __post_init__(self):
        a = _frozen(self.a)
        b = _frozen(self.b)
        n = max(a.size, b.size)
        if a.size < n:
            a = _frozen(np.pad(a, (0, n - a.size)))
        if b.size < n:
            b = _frozen(np.pad(b, (0, n - b.size)))
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        return int(self.a.size)

    def __eq__(self, other) -> bool:
        """Equal as functions: trailing zero harmonics are ignored."""
        if not isinstance(other, SupportFunction2D):
            return NotImplemented
        n = max(self.degree, other.degree)
        p, q = self.padded(n), other.padded(n)
        return p.a0 == q.a0 and np.array_equal(p.a, q.a) and np.array_equal(p.b, q.b)

    __hash__ = None

    def padded(self, n: int) -> "SupportFunction2D":
        if n < self.degree:
            raise ValueError("cannot pad to a smaller degree")
        extra = n - self.degree
        return SupportFunction2D(self.a0, np.pad(self.a, (0, extra)), np.pad(self.b, (0, extra)))

    def __call__(self, theta, derivative: int = 0):
        return evaluate_support(self, theta, derivative=derivative)

    def __add__(self, other: "SupportFunction2D") -> "SupportFunction2D":
        return minkowski_sum(self, other)

    def __sub__(self, other: "SupportFunction2D") -> "SupportFunction2D":
        # Coefficient difference; not a support function in general.
        n = max(self.degree, other.degree)
        p, q = self.padded(n), other.padded(n)
        return SupportFunction2D(p.a0 - q.a0, p.a - q.a, p.b - q.b)

    def scaled(self, c: float) -> "SupportFunction2D":
        return SupportFunction2D(c * self.a0, c * self.a, c * self.b)

    def translated(self, dx: float, dy: float) -> "SupportFunction2D":
        """Support function of the body shifted by (dx, dy)."""
        n = max(self.degree, 1)
        p = self.padded(n)
        a, b = p.a.copy(), p.b.copy()
        a[0] += dx
        b[0] += dy
        return SupportFunction2D(p.a0, a, b)

    def steiner_point(self) -> tuple[float, float]:
        if self.degree == 0:
            return (0.0, 0.0)
        return (float(self.a[0]), float(self.b[0]))

    def curvature_coefficients(self) -> "SupportFunction2D":
        """Fourier coefficients of rho = P + P''."""
        k = np.arange(1, self.degree + 1)
        w = 1.0 - k**2
        return SupportFunction2D(self.a0, w * self.a, w * self.b)

    def perimeter(self) -> float:
        return 2.0 * np.pi * self.a0

    def area(self) -> float:
        """Enclosed area, 0.5 * int (P^2 - P'^2) dtheta, in closed form."""
        k = np.arange(1, self.degree + 1)
        return float(np.pi * self.a0**2 + 0.5 * np.pi * np.sum((1 - k**2) * (self.a**2 + self.b**2)))

    def convexity_margin(self, nodes: int = 2048) -> float:
        """Minimum of rho on a dense grid."""
        return float(np.min(curvature_measure(self, angle_grid(nodes))))

    def is_convex(self, tol: float = TOL_CONVEX, nodes: int = 2048) -> bool:
        return self.convexity_margin(nodes) >= -tol

    def to_json(self) -> dict:
        return {"type": "fourier", "a0": self.a0, "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class ConvexBody2D:
    support: SupportFunction2D
    label: str = "body"

    def boundary(self, theta) -> np.ndarray:
        return boundary_point(self.support, theta)

    def translated(self, dx: float, dy: float) -> "ConvexBody2D":
        return ConvexBody2D(self.support.translated(dx, dy), self.label)


@dataclass(frozen=True)
class DCPair:
    """Two support functions whose difference is one basis function."""

    g: SupportFunction2D
    h: SupportFunction2D
    phi_index: tuple[BasisKind, int]


def evaluate_support(P: SupportFunction2D, theta, derivative: int = 0):
    """Evaluate ``P`` (or its ``derivative``-th angular derivative) at ``theta``."""
    th = np.asarray(theta, dtype=float)
    scalar = th.ndim == 0
    th = np.atleast_1d(th)
    out = np.full(th.shape, P.a0 if derivative == 0 else 0.0)
    if P.degree:
        k = np.arange(1, P.degree + 1)
        kt = np.multiply.outer(th, k)
        c, s = np.cos(kt), np.sin(kt)
        # d^n/dt^n cos(kt) cycles through -k sin, -k^2 cos, k^3 sin, k^4 cos
        kn = k.astype(float) ** derivative
        r = derivative % 4
        if r == 0:
            out = out + (c * (kn * P.a) + s * (kn * P.b)).sum(axis=-1)
        elif r == 1:
            out = out + (-s * (kn * P.a) + c * (kn * P.b)).sum(axis=-1)
        elif r == 2:
            out = out + (-c * (kn * P.a) - s * (kn * P.b)).sum(axis=-1)
        else:
            out = out + (s * (kn * P.a) - c * (kn * P.b)).sum(axis=-1)
    return float(out[0]) if scalar else out


def curvature_measure(P: SupportFunction2D, theta):
    """Radius of curvature rho = P + P'' at the normal angle ``theta``."""
    return evaluate_support(P.curvature_coefficients(), theta)


def boundary_point(P: SupportFunction2D, theta) -> np.ndarray:
    """Inverse Gauss map: the boundary point whose outward normal is ``theta``.

    Returns an array of shape ``(..., 2)``.
    """
    th = np.asarray(theta, dtype=float)
    p = evaluate_support(P, th)
    dp = evaluate_support(P, th, derivative=1)
    c, s = np.cos(th), np.sin(th)
    return np.stack([p * c - dp * s, p * s + dp * c], axis=-1)


def minkowski_sum(P1: SupportFunction2D, P2: SupportFunction2D) -> SupportFunction2D:
    n = max(P1.degree, P2.degree)
    p, q = P1.padded(n), P2.padded(n)
    return SupportFunction2D(p.a0 + q.a0, p.a + q.a, p.b + q.b)


def periodic_integral(values: np.ndarray) -> float:
    """Trapezoid rule over a uniform grid on [0, 2 pi); spectrally accurate."""
    values = np.asarray(values, dtype=float)
    return float(values.sum() * (2.0 * np.pi / values.shape[-1]))


def boundary_integral(
    P: SupportFunction2D,
    f: Callable[[np.ndarray], np.ndarray],
    nodes: int | None = None,
    tol: float | None = None,
) -> float:
    """Integral of ``f(n(x))`` over the boundary of the body with support ``P``.

    Computed as ``int_0^{2pi} f(theta) rho(theta) dtheta``.  When ``tol`` is
    given the result is compared with the half-size grid and a
    :class:`QuadratureError` is raised if the two disagree by more than ``tol``.
    """
    n = quad_nodes(nodes)
    rho_P = P.curvature_coefficients()

    def integrate(m):
        th = angle_grid(m)
        return periodic_integral(np.asarray(f(th), dtype=float) * evaluate_support(rho_P, th))

    value = integrate(n)
    if tol is not None:
        coarse = integrate(max(n // 2, 1))
        if abs(value - coarse) > tol:
            raise QuadratureError(
                f"quadrature with {n} nodes not converged: |I_n - I_n/2| = {abs(value - coarse):.3e} > {tol:.3e}"
            )
    return value


# --- constructors -----------------------------------------------------------


def disk(r: float = 1.0, center: tuple[float, float] = (0.0, 0.0)) -> SupportFunction2D:
    P = SupportFunction2D(r)
    if center != (0.0, 0.0):
        P = P.translated(*center)
    return P


def point(x: float = 0.0, y: float = 0.0) -> SupportFunction2D:
    return SupportFunction2D(0.0, [x], [y])


def fourier_projection(fun: Callable[[np.ndarray], np.ndarray], degree: int, samples: int = 4096):
    """Project a periodic function onto trigonometric polynomials of ``degree``.

    Returns ``(SupportFunction2D, truncation_error)`` where the error is the
    sup norm of the discarded part on the sample grid.
    """
    th = angle_grid(samples)
    v = np.asarray(fun(th), dtype=float)
    c = np.fft.rfft(v) / samples
    a0 = c[0].real
    a = 2.0 * c[1 : degree + 1].real
    b = -2.0 * c[1 : degree + 1].imag
    P = SupportFunction2D(a0, a, b)
    err = float(np.max(np.abs(v - evaluate_support(P, th))))
    return P, err


def ellipse(a: float, b: float, degree: int = 16) -> tuple[SupportFunction2D, float]:
    """Fourier form of the support of the ellipse with semi-axes ``a`` (x) and ``b`` (y).

    Returns the projection and its sup-norm truncation error.
    """
    return fourier_projection(lambda t: np.sqrt((a * np.cos(t)) ** 2 + (b * np.sin(t)) ** 2), degree)


def body_from_json(data: dict, degree: int = 16) -> ConvexBody2D:
    """Build a body from ``{"type": "disk"|"ellipse"|"fourier", ...}``."""
    kind = data.get("type")
    label = data.get("label", kind or "body")
    if kind == "disk":
        P = disk(float(data["r"]))
    elif kind == "ellipse":
        P, _ = ellipse(float(data["a"]), float(data["b"]), degree=int(data.get("degree", degree)))
    elif kind == "fourier":
        P = SupportFunction2D(float(data["a0"]), data.get("a", []), data.get("b", []))
    else:
        raise ValueError(f"unknown body type {kind!r}")
    center = data.get("center")
    if center is not None:
        P = P.translated(float(center[0]), float(center[1]))
    return ConvexBody2D(P, str(label))


# --- DC decomposition -------------------------------------------------------


def dc_decompose_basis(k: int, kind: BasisKind = "cos") -> DCPair:
    """Split the basis function ``phi_k`` into ``P_g - P_h`` with g, h convex.

    For ``cos k theta`` (``sin``), k >= 2: g = (k^2 - 1) + phi, h = disk(k^2 - 1),
    so that rho_g = (k^2 - 1)(1 -+ ...) >= 0.  For k = 1 the basis function is
    already the support of a point; the constant is the unit disk.
    """
    if k < 0:
        raise ValueError("basis index must be nonnegative")
    if kind == "const" or k == 0:
        return DCPair(disk(1.0), SupportFunction2D(0.0), ("const", 0))
    if kind not in ("cos", "sin"):
        raise ValueError(f"unknown basis kind {kind!r}")
    coef = np.zeros(k)
    coef[k - 1] = 1.0
    zero = np.zeros(k)
    c0 = float(k * k - 1)
    g = SupportFunction2D(c0, coef, zero) if kind == "cos" else SupportFunction2D(c0, zero, coef)
    h = SupportFunction2D(c0)
    return DCPair(g, h, (kind, k))


def basis_function(kind: BasisKind, k: int) -> SupportFunction2D:
    """The basis function itself, as a (generally non-convex) coefficient vector."""
    if kind == "const" or k == 0:
        return SupportFunction2D(1.0)
    coef = np.zeros(k)
    coef[k - 1] = 1.0
    zero = np.zeros(k)
    return SupportFunction2D(0.0, coef, zero) if kind == "cos" else SupportFunction2D(0.0, zero, coef)


def homogeneous_extension(phi: Callable[[float], float], x) -> float:
    """Positively 1-homogeneous extension of a function on the unit circle."""
    x1, x2 = float(x[0]), float(x[1])
    r = math.hypot(x1, x2)
    if r == 0.0:
        return 0.0
    return float(phi(math.atan2(x2, x1))) * r
