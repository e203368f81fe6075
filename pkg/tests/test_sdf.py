import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from liquidlab.sdf import (BoxSdf, ConeSdf, CylinderSdf, IntersectionSdf,
                           SphereSdf, UnionSdf, shape_volume_voxel)
from liquidlab.transforms import RigidPose

coord = st.floats(-0.3, 0.3, allow_nan=False)


def test_box_probes():
    box = BoxSdf((2.0, 2.0, 2.0))
    d = box.distance([[0, 0, 0], [2, 0, 0], [1, 0, 0], [1.5, 1.5, 1.5]])
    assert np.isclose(d[0], -1.0, atol=1e-15)
    assert np.isclose(d[1], 1.0, atol=1e-15)
    assert np.isclose(d[2], 0.0, atol=1e-15)
    assert np.isclose(d[3], np.sqrt(3 * 0.25), atol=1e-15)


def test_sphere_exact():
    s = SphereSdf(0.5, offset=(1.0, 0.0, 0.0))
    pts = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.7], [0.2, 0.0, 0.0]])
    assert np.allclose(s.distance(pts), [-0.5, 0.2, 0.3], atol=1e-15)


def test_cylinder_probes():
    c = CylinderSdf(radius=0.1, height=0.4)
    d = c.distance([[0, 0, 0], [0.15, 0, 0], [0, 0, 0.3], [0.05, 0, 0.1]])
    assert np.isclose(d[0], -0.1, atol=1e-15)
    assert np.isclose(d[1], 0.05, atol=1e-15)
    assert np.isclose(d[2], 0.1, atol=1e-15)
    assert d[3] < 0


def test_cone_probes():
    cone = ConeSdf(r_base=0.2, r_top=0.1, height=0.4)
    # bottom rim and top rim lie on the surface
    assert np.isclose(cone.distance([[0.2, 0.0, -0.2]])[0], 0.0, atol=1e-12)
    assert np.isclose(cone.distance([[0.0, 0.1, 0.2]])[0], 0.0, atol=1e-12)
    assert cone.distance([[0.0, 0.0, 0.0]])[0] < 0
    assert cone.distance([[0.3, 0.0, 0.0]])[0] > 0


def test_union_intersection_laws():
    a = SphereSdf(0.2, offset=(-0.1, 0, 0))
    b = SphereSdf(0.2, offset=(0.1, 0, 0))
    pts = np.random.default_rng(0).uniform(-0.4, 0.4, (50, 3))
    du = UnionSdf((a, b)).distance(pts)
    di = IntersectionSdf((a, b)).distance(pts)
    assert np.array_equal(du, np.minimum(a.distance(pts), b.distance(pts)))
    assert np.array_equal(di, np.maximum(a.distance(pts), b.distance(pts)))


def test_world_pose_query():
    box = BoxSdf((0.4, 0.2, 0.2))
    pose = RigidPose((0.0, 0.0, 90.0))
    # after a quarter turn the long axis points along +Y
    assert pose and box.distance_world([[0.0, 0.19, 0.0]], pose)[0] < 0
    assert box.distance_world([[0.19, 0.0, 0.0]], pose)[0] > 0


def test_gradient_unit_norm_outside():
    s = SphereSdf(0.25)
    pts = np.array([[0.4, 0.1, -0.2], [0.0, 0.5, 0.0]])
    g = s.gradient(pts)
    assert np.allclose(np.linalg.norm(g, axis=1), 1.0, atol=1e-6)


def test_gradient_world_rotates():
    box = BoxSdf((0.2, 0.4, 0.2))
    pose = RigidPose((0.0, 0.0, 90.0))
    g = box.gradient_world(np.array([[0.5, 0.0, 0.0]]), pose)
    assert np.allclose(g, [[1.0, 0.0, 0.0]], atol=1e-6)


def test_aabb_offsets():
    s = SphereSdf(0.1, offset=(1.0, 2.0, 3.0))
    lo, hi = s.aabb()
    assert np.allclose(lo, [0.9, 1.9, 2.9]) and np.allclose(hi, [1.1, 2.1, 3.1])


def test_voxel_volume_box():
    box = BoxSdf((0.1, 0.1, 0.1))
    v = shape_volume_voxel(box, dx=0.005)
    assert abs(v - 0.001) / 0.001 < 0.05


@settings(max_examples=40, deadline=None)
@given(x=coord, y=coord, z=coord)
def test_box_distance_lower_bounds_euclidean(x, y, z):
    """|SDF| never exceeds the true distance to the surface (1-Lipschitz)."""
    box = BoxSdf((0.2, 0.2, 0.2))
    p = np.array([[x, y, z]])
    d = float(box.distance(p)[0])
    # compare against the nearest of the six faces sampled densely
    face = np.linspace(-0.1, 0.1, 41)
    uu, vv = np.meshgrid(face, face)
    surf = []
    for axis in range(3):
        for side in (-0.1, 0.1):
            q = np.zeros((uu.size, 3))
            q[:, axis] = side
            q[:, (axis + 1) % 3] = uu.ravel()
            q[:, (axis + 2) % 3] = vv.ravel()
            surf.append(q)
    surf = np.concatenate(surf)
    true = np.linalg.norm(surf - p, axis=1).min()
    assert abs(d) <= true + 1e-9
