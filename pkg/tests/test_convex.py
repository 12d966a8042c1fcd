import math

import numpy as np
import pytest
from hypothesis import given, settings

from plate_shape.convex import (
    QuadratureError,
    SupportFunction2D,
    angle_grid,
    body_from_json,
    boundary_integral,
    boundary_point,
    curvature_measure,
    dc_decompose_basis,
    disk,
    ellipse,
    evaluate_support,
    homogeneous_extension,
    minkowski_sum,
    quad_nodes,
)
from plate_shape.mesh import polygon_area

from .strategies import convex_supports, trig_polynomials


def test_evaluate_support_examples():
    assert evaluate_support(disk(1.0), 0.7) == pytest.approx(1.0, abs=1e-15)
    E, err = ellipse(2.0, 1.0)
    assert evaluate_support(E, 0.0) == pytest.approx(2.0, abs=10 * err + 1e-12)
    P = SupportFunction2D(1.0, [0.0, 0.1], [0.0, 0.0])
    assert evaluate_support(P, np.pi / 2) == pytest.approx(0.9, abs=1e-15)


def test_evaluate_support_is_periodic():
    P = SupportFunction2D(1.0, [0.1, -0.05, 0.02], [0.03, 0.0, -0.01])
    th = np.linspace(0, 1, 7)
    np.testing.assert_allclose(P(th), P(th + 2 * np.pi), atol=1e-13)


def test_ellipse_projection_error_is_documented():
    E, err = ellipse(2.0, 1.0)
    th = angle_grid(1000)
    exact = np.sqrt(4 * np.cos(th) ** 2 + np.sin(th) ** 2)
    assert np.max(np.abs(E(th) - exact)) <= 2 * err + 1e-15
    assert err < 1e-3


def test_boundary_point_examples():
    np.testing.assert_allclose(boundary_point(disk(2.0), np.pi / 2), [0.0, 2.0], atol=1e-15)
    E, err = ellipse(2.0, 1.0)
    np.testing.assert_allclose(boundary_point(E, 0.0), [2.0, 0.0], atol=20 * err)
    P = SupportFunction2D(1.0, [0.0, 0.2], [0.0, 0.0])
    np.testing.assert_allclose(boundary_point(P, 0.0), [1.2, 0.0], atol=1e-15)


def test_boundary_point_on_supporting_line_and_tangent_orthogonal():
    P = SupportFunction2D(1.0, [0.0, 0.2], [0.0, 0.0])
    th = np.linspace(0.1, 6.0, 13)
    x = boundary_point(P, th)
    n = np.stack([np.cos(th), np.sin(th)], axis=1)
    np.testing.assert_allclose((x * n).sum(1), P(th), atol=1e-14)
    d = 1e-6
    tangent = (boundary_point(P, th + d) - boundary_point(P, th - d)) / (2 * d)
    assert np.max(np.abs((tangent * n).sum(1))) < 1e-8


def test_minkowski_examples():
    assert minkowski_sum(disk(1), disk(2)).a0 == 3.0
    P1 = SupportFunction2D(1.0, [0.0, 0.1], [0.0, 0.0])
    S = minkowski_sum(P1, disk(2.0))
    assert S.a0 == 3.0 and S.a[1] == 0.1
    seg = dc_decompose_basis(1, "cos").g
    S = seg + disk(1.0)
    rho = curvature_measure(S, angle_grid(2048))
    assert np.min(rho) >= 0
    np.testing.assert_allclose(rho, 1.0, atol=1e-15)


def test_curvature_measure_examples():
    assert curvature_measure(disk(1.7), 0.3) == pytest.approx(1.7)
    P = SupportFunction2D(1.0, [0.0, 0.1], [0.0, 0.0])
    assert curvature_measure(P, 0.0) == pytest.approx(0.7, abs=1e-15)


def test_perimeter_of_ellipse_against_arc_length():
    E, _ = ellipse(2.0, 1.0)
    th = angle_grid(4096)
    perim_rho = boundary_integral(E, lambda t: np.ones_like(t))
    x = boundary_point(E, th)
    arc = np.sum(np.linalg.norm(np.roll(x, -1, axis=0) - x, axis=1))
    assert perim_rho == pytest.approx(arc, rel=1e-6)
    assert perim_rho == pytest.approx(9.6884, abs=1e-4)


def test_boundary_integral_examples():
    assert boundary_integral(disk(1.5), lambda t: np.ones_like(t)) == pytest.approx(3 * np.pi, rel=1e-14)
    f = lambda t: np.cos(t) ** 2  # noqa: E731
    assert boundary_integral(disk(3), f) == pytest.approx(3 * np.pi, rel=1e-13)
    assert boundary_integral(disk(1), f) + boundary_integral(disk(2), f) == pytest.approx(3 * np.pi, rel=1e-13)
    r1, r2 = 1.3, 0.4
    lhs = boundary_integral(disk(r1), lambda t: evaluate_support(disk(r2), t))
    assert lhs == pytest.approx(2 * np.pi * r1 * r2, rel=1e-13)


def test_boundary_integral_refinement_error():
    # cos(32 t) is resolved by 64 nodes but aliases to 1 on the 32-node grid
    rough = lambda t: 1.0 + np.cos(32 * t)  # noqa: E731
    with pytest.raises(QuadratureError):
        boundary_integral(disk(1), rough, nodes=64, tol=1e-8)
    assert boundary_integral(disk(1), rough, nodes=512, tol=1e-10) == pytest.approx(2 * np.pi, rel=1e-12)


def test_quad_nodes_env(monkeypatch):
    monkeypatch.setenv("PLATE_SHAPE_QUAD_NODES", "512")
    assert quad_nodes() == 512
    assert quad_nodes(64) == 64


def test_dc_examples():
    p0 = dc_decompose_basis(0, "const")
    assert p0.g.a0 == 1.0 and p0.h.a0 == 0.0 and p0.h.degree == 0
    p1 = dc_decompose_basis(1, "cos")
    assert p1.g.a0 == 0.0 and p1.g.a[0] == 1.0 and p1.h.a0 == 0.0
    np.testing.assert_array_equal(curvature_measure(p1.g, angle_grid(64)), 0.0)
    p2 = dc_decompose_basis(2, "cos")
    assert p2.g.a0 == 3.0 and p2.g.a[1] == 1.0 and p2.h.a0 == 3.0
    th = angle_grid(2048)
    np.testing.assert_allclose(curvature_measure(p2.g, th), 3 - 3 * np.cos(2 * th), atol=1e-14)


@pytest.mark.parametrize("k", range(0, 17))
@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_dc_exactness(k, kind):
    pair = dc_decompose_basis(k, kind)
    th = angle_grid(1024)
    phi = np.ones_like(th) if k == 0 else (np.cos(k * th) if kind == "cos" else np.sin(k * th))
    np.testing.assert_allclose(pair.g(th) - pair.h(th), phi, atol=1e-12)
    assert np.min(curvature_measure(pair.g, angle_grid(2048))) >= -1e-12
    assert np.min(curvature_measure(pair.h, angle_grid(2048))) >= -1e-12


def test_homogeneous_extension_examples():
    assert homogeneous_extension(lambda t: math.cos(2 * t), (2.0, 0.0)) == pytest.approx(2.0)
    assert homogeneous_extension(lambda t: 5.0, (0.0, 0.0)) == 0.0
    x = (1.0, 1.0)
    lhs = homogeneous_extension(math.sin, (3.0, 3.0))
    assert lhs == pytest.approx(3 * homogeneous_extension(math.sin, x), rel=1e-14)


def test_body_json_schema():
    assert body_from_json({"type": "disk", "r": 2}).support.a0 == 2.0
    E = body_from_json({"type": "ellipse", "a": 1.0, "b": 1.2}).support
    assert E(0.0) == pytest.approx(1.0, abs=1e-8) and E(np.pi / 2) == pytest.approx(1.2, abs=1e-8)
    F = body_from_json({"type": "fourier", "a0": 1.0, "a": [0.0, 0.1], "b": []}).support
    assert F.degree == 2 and F.b[1] == 0.0
    G = body_from_json(F.to_json()).support
    assert G.a0 == F.a0 and np.array_equal(G.a, F.a) and np.array_equal(G.b, F.b)
    with pytest.raises(ValueError):
        body_from_json({"type": "square"})


def test_area_closed_form_against_shoelace():
    E, _ = ellipse(2.0, 1.0)
    pts = boundary_point(E, angle_grid(4096))
    assert E.area() == pytest.approx(polygon_area(pts), rel=1e-6)
    assert E.area() == pytest.approx(2 * np.pi, rel=1e-8)


# --- properties --------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(convex_supports(), convex_supports(), trig_polynomials())
def test_additivity(P1, P2, f):
    fn = lambda t: evaluate_support(f, t)  # noqa: E731
    lhs = boundary_integral(P1 + P2, fn)
    rhs = boundary_integral(P1, fn) + boundary_integral(P2, fn)
    assert abs(lhs - rhs) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(convex_supports(), convex_supports())
def test_mixed_symmetry(P1, P2):
    lhs = boundary_integral(P1, lambda t: evaluate_support(P2, t))
    rhs = boundary_integral(P2, lambda t: evaluate_support(P1, t))
    assert abs(lhs - rhs) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(convex_supports())
def test_minkowski_sum_stays_convex(P):
    S = minkowski_sum(P, disk(0.5))
    assert S.convexity_margin() >= -1e-9


@settings(max_examples=40, deadline=None)
@given(convex_supports(strict=True))
def test_gauss_map_consistency(P):
    th = angle_grid(64)
    d = 1e-5
    tangent = (boundary_point(P, th + d) - boundary_point(P, th - d)) / (2 * d)
    n = np.stack([np.cos(th), np.sin(th)], axis=1)
    cosang = np.abs((tangent * n).sum(1)) / np.linalg.norm(tangent, axis=1)
    assert np.max(cosang) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(convex_supports(strict=True))
def test_perimeter_identity(P):
    x = boundary_point(P, angle_grid(4096))
    arc = np.sum(np.linalg.norm(np.roll(x, -1, axis=0) - x, axis=1))
    perim = boundary_integral(P, lambda t: np.ones_like(t))
    assert perim == pytest.approx(arc, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(convex_supports(strict=True))
def test_boundary_curve_closed_and_normal(P):
    assert np.allclose(boundary_point(P, 0.0), boundary_point(P, 2 * np.pi), atol=1e-12)
    th = angle_grid(32)
    x = boundary_point(P, th)
    # x(theta) maximizes <x, n(theta)> over the traced boundary
    dense = boundary_point(P, angle_grid(4096))
    n = np.stack([np.cos(th), np.sin(th)], axis=1)
    assert np.all((x * n).sum(1) >= (dense @ n.T).max(0) - 1e-9)
