import numpy as np
import pytest

from plate_shape.convex import SupportFunction2D, angle_grid, boundary_point, disk, ellipse
from plate_shape.mesh import MeshingError, equal_arc_angles, generate_mesh, polygon_area
from plate_shape.plate import edge_normals


@pytest.fixture(scope="module")
def disk_mesh():
    return generate_mesh(disk(1.0), 0.1)


def test_triangle_count_order_of_magnitude(disk_mesh):
    estimate = np.pi / (np.sqrt(3) / 4 * 0.1**2)
    assert 0.5 * estimate <= len(disk_mesh.triangles) <= 1.5 * estimate


@pytest.mark.parametrize(
    "P",
    [disk(1.0), ellipse(1.0, 1.2)[0], ellipse(2.0, 1.0)[0], SupportFunction2D(1.0, [0.3, 0.1], [-0.2, 0.0, 0.02])],
    ids=["disk", "ellipse-1-1.2", "ellipse-2-1", "fourier"],
)
def test_mesh_area_and_quality(P):
    m = generate_mesh(P, 0.1)
    traced = polygon_area(boundary_point(P, angle_grid(4096)))
    assert np.all(m.areas() > 0)
    assert abs(m.areas().sum() - traced) <= 0.02 * traced
    assert m.min_angle() >= 20.0
    L = m.edge_lengths()
    assert L.min() >= 0.5 * m.h and L.max() <= 2.0 * m.h


def test_boundary_vertices_lie_on_boundary():
    P = SupportFunction2D(1.0, [0.3, 0.1], [-0.2, 0.0, 0.02])
    m = generate_mesh(P, 0.1)
    bv = m.vertices[m.boundary_vertices]
    # each boundary vertex is x(theta) for some theta: its support value in its own normal direction
    dense = boundary_point(P, angle_grid(1 << 14))
    d = np.min(np.linalg.norm(bv[:, None, :] - dense[None, :, :], axis=2), axis=1)
    assert d.max() < 1e-3


def test_boundary_normals_close_to_true_normals(disk_mesh):
    n = edge_normals(disk_mesh)[disk_mesh.boundary_edges]
    mid = disk_mesh.boundary_midpoints
    true = mid / np.linalg.norm(mid, axis=1)[:, None]
    ang = np.arccos(np.clip((n * true).sum(1), -1, 1))
    assert ang.max() <= 0.15


def test_boundary_theta_monotone_cover(disk_mesh):
    th = np.sort(disk_mesh.boundary_theta)
    assert np.all(np.diff(th) > 0)
    assert th[0] >= 0 and th[-1] < 2 * np.pi
    assert len(disk_mesh.boundary_edges) == len(disk_mesh.boundary_vertices)


def test_equal_arc_angles_equalize_chords():
    P, _ = ellipse(2.0, 1.0)
    x = boundary_point(P, equal_arc_angles(P, 200))
    chords = np.linalg.norm(np.roll(x, -1, axis=0) - x, axis=1)
    assert chords.max() / chords.min() < 1.01


def test_not_strictly_convex_raises():
    segment = SupportFunction2D(0.0, [1.0], [0.0])
    with pytest.raises(MeshingError, match="not strictly convex"):
        generate_mesh(segment, 0.1)
    flat = SupportFunction2D(1.0, [0.0, 1.0 / 3.0], [0.0, 0.0])
    with pytest.raises(MeshingError, match="not strictly convex"):
        generate_mesh(flat, 0.1)


def test_mesh_is_deterministic():
    a = generate_mesh(disk(1.0), 0.15)
    b = generate_mesh(disk(1.0), 0.15)
    assert np.array_equal(a.vertices, b.vertices) and np.array_equal(a.triangles, b.triangles)


def test_mesh_json_fields(disk_mesh):
    data = disk_mesh.to_json()
    assert data["h"] == 0.1
    assert len(data["boundary_edges"]) == len(disk_mesh.boundary_edges)
    assert set(data["boundary_edges"][0]) == {"vertices", "midpoint", "theta", "triangle"}
