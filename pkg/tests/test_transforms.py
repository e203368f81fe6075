import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liquidlab.transforms import (RigidPose, angular_velocity,
                                  rigid_velocity, rotation_matrix)

angles = st.floats(-180.0, 180.0, allow_nan=False)
coords = st.floats(-2.0, 2.0, allow_nan=False)


def test_identity():
    pose = RigidPose()
    pts = np.array([[0.3, -0.2, 1.0], [0.0, 0.0, 0.0]])
    assert np.array_equal(pose.apply(pts), pts)
    assert pose.is_identity()


def test_quarter_turn_z():
    pose = RigidPose((0.0, 0.0, 90.0))
    out = pose.apply(np.array([1.0, 0.0, 0.0]))
    assert np.allclose(out, [0.0, 1.0, 0.0], atol=1e-12)


def test_axis_order_x_then_y_then_z():
    ax, ay, az = 30.0, 40.0, 50.0
    rx = rotation_matrix((ax, 0, 0))
    ry = rotation_matrix((0, ay, 0))
    rz = rotation_matrix((0, 0, az))
    assert np.allclose(rotation_matrix((ax, ay, az)), rz @ ry @ rx,
                       atol=1e-14)


def test_pivot_is_fixed_point():
    pose = RigidPose((10.0, 70.0, -40.0), pivot=(0.2, -0.1, 0.05))
    assert np.allclose(pose.apply(np.array(pose.pivot)), pose.pivot,
                       atol=1e-15)


def test_rotation_matrix_orthonormal():
    r = rotation_matrix((33.0, -71.0, 12.0))
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-14)
    assert np.isclose(np.linalg.det(r), 1.0, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(ax=angles, ay=angles, az=angles, px=coords, py=coords, pz=coords)
def test_inverse_round_trip(ax, ay, az, px, py, pz):
    pose = RigidPose((ax, ay, az), pivot=(0.1, 0.2, -0.3))
    p = np.array([px, py, pz])
    assert np.allclose(pose.apply_inverse(pose.apply(p)), p, atol=1e-10)


def test_rotate_direction_ignores_pivot():
    a = RigidPose((0.0, 0.0, 90.0), pivot=(5.0, 5.0, 5.0))
    b = RigidPose((0.0, 0.0, 90.0))
    d = np.array([1.0, 0.0, 0.0])
    assert np.array_equal(a.rotate_direction(d), b.rotate_direction(d))


def test_angular_velocity_single_axis():
    a = RigidPose((0.0, 0.0, 0.0))
    b = RigidPose((0.0, 0.0, 90.0))
    w = angular_velocity(a, b, dt=1.0)
    assert np.allclose(w, [0.0, 0.0, np.pi / 2], atol=1e-12)


def test_angular_velocity_identical_poses_zero():
    a = RigidPose((12.0, 34.0, 56.0))
    assert np.array_equal(angular_velocity(a, a, 0.5), np.zeros(3))


def test_angular_velocity_magnitude_scale():
    a = RigidPose((0.0, 0.0, 0.0))
    b = RigidPose((10.0, 0.0, 0.0))
    w = angular_velocity(a, b, dt=0.25)
    assert np.isclose(np.linalg.norm(w), np.radians(10.0) / 0.25, rtol=1e-12)


def test_angular_velocity_bad_dt():
    with pytest.raises(ValueError):
        angular_velocity(RigidPose(), RigidPose(), 0.0)


def test_rigid_velocity_circular():
    v = rigid_velocity(np.array([[1.0, 0.0, 0.0]]), np.array([0.0, 0.0, 1.0]),
                       np.zeros(3))
    assert np.allclose(v, [[0.0, 1.0, 0.0]], atol=1e-15)
    # the pivot itself does not move
    v0 = rigid_velocity(np.array([[0.3, 0.4, 0.5]]), np.array([2.0, 1.0, 3.0]),
                        np.array([0.3, 0.4, 0.5]))
    assert np.array_equal(v0, np.zeros((1, 3)))


@settings(max_examples=30, deadline=None)
@given(ax=angles, ay=angles, az=angles)
def test_velocity_consistent_with_finite_difference(ax, ay, az):
    """w x r matches (R_b p - R_a p)/dt for a small rotation increment."""
    dt = 1e-3
    a = RigidPose((ax, ay, az))
    b = RigidPose((ax + 0.01, ay + 0.02, az - 0.015))
    w = angular_velocity(a, b, dt)
    p = np.array([0.3, -0.2, 0.4])
    fd = (b.apply(p) - a.apply(p)) / dt
    vel = np.cross(w, a.apply(p))
    assert np.allclose(fd, vel, atol=2e-3 * max(1.0, np.linalg.norm(fd)))
