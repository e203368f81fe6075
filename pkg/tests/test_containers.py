import numpy as np
import pytest

from liquidlab.containers import (CATALOG, ContainerSpec, build_container,
                                  cavity_centroid, cavity_sdf, cavity_volume,
                                  get_container, shell_mesh)
from liquidlab.errors import BadContainerSpec
from liquidlab.mesh import mesh_volume


def test_catalog_size_and_families():
    assert len(CATALOG) == 20
    families = {spec.shape for spec in CATALOG.values()}
    assert families == {"box", "cylinder", "cone", "composite"}
    assert all(name == spec.name for name, spec in CATALOG.items())


def test_get_container():
    spec = get_container("cube-bottle-L")
    assert spec.shape == "box"
    with pytest.raises(BadContainerSpec) as exc:
        get_container("pyramid")
    assert "cube-bottle-L" in str(exc.value)


def test_cube_cavity_volume_exact():
    spec = get_container("cube-bottle-L")
    vol = cavity_volume(spec, dx=0.002)
    assert vol == pytest.approx(0.08**3, rel=0.01)
    # box centered at origin -> centroid at origin
    assert np.allclose(cavity_centroid(spec), 0.0, atol=1e-3)


def test_cylinder_cavity_volume():
    spec = get_container("cylinder-L")
    vol = cavity_volume(spec, dx=0.001)
    assert vol == pytest.approx(np.pi * 0.035**2 * 0.09, rel=0.02)


def test_all_shells_watertight():
    for name, spec in CATALOG.items():
        shell = shell_mesh(spec)
        assert shell.n_faces > 0, name
        assert shell.is_watertight(), name
        vol = mesh_volume(shell)
        assert vol > 0, name
        # shell volume is far smaller than its bounding box
        lo, hi = cavity_sdf(spec).aabb()
        box = float(np.prod(np.asarray(hi) - np.asarray(lo) + 2 * spec.thickness))
        assert vol < box, name


def test_cavity_sign_convention():
    cavity, shell = build_container(get_container("cube-bottle-L"))
    assert cavity.distance(np.zeros((1, 3)))[0] < 0
    assert cavity.distance(np.array([[0.05, 0.0, 0.0]]))[0] > 0
    lo, hi = cavity.aabb()
    assert np.allclose(np.asarray(hi) - np.asarray(lo), 0.08)


def test_composite_neck_inside():
    spec = get_container("sphere-flask")
    cavity = cavity_sdf(spec)
    # a point in the neck above the bulb is inside the union cavity
    neck_pt = np.array([[0.0, 0.0, 0.055]])
    assert cavity.distance(neck_pt)[0] < 0
    # but outside the bulb part alone
    assert np.linalg.norm(neck_pt) > 0.04


def test_spec_validation():
    with pytest.raises(BadContainerSpec):
        ContainerSpec("x", "dodecahedron", (0.1,))
    with pytest.raises(BadContainerSpec):
        ContainerSpec("x", "box", (0.1, -0.1, 0.1))
    with pytest.raises(BadContainerSpec):
        ContainerSpec("x", "box", (0.05, 0.05, 0.05), thickness=0.0)
    with pytest.raises(BadContainerSpec):
        # wall thicker than the half-extent leaves no cavity
        ContainerSpec("x", "box", (0.05, 0.05, 0.05), thickness=0.03)
    with pytest.raises(BadContainerSpec):
        cavity_sdf(ContainerSpec("x", "composite", (0.1,), parts=()))


def test_transparency_default():
    assert all(0.0 < s.transparency <= 1.0 for s in CATALOG.values())


def test_pose_aware_distance():
    from liquidlab.transforms import RigidPose
    cavity = cavity_sdf(get_container("rect-bottle-L"))
    pose = RigidPose((0.0, 0.0, 90.0), (0.0, 0.0, 0.0))
    # box is 0.06 x 0.04 x 0.10; after 90 deg about z the long x side lies on y
    pt = np.array([[0.025, 0.0, 0.0]])
    assert cavity.distance(pt)[0] < 0  # inside unrotated (x half-extent 0.03)
    assert cavity.distance_world(pt, pose)[0] > 0  # outside rotated (y -> 0.02)


def test_cone_narrows_upward():
    # base radius 0.045 at z = -0.045, top radius 0.014 at z = +0.045
    cavity = cavity_sdf(get_container("cone-flask-L"))
    base = np.array([[0.030, 0.0, -0.040]])
    top = np.array([[0.030, 0.0, 0.040]])
    assert cavity.distance(base)[0] < 0
    assert cavity.distance(top)[0] > 0
