import numpy as np
import pytest

from liquidlab.errors import EmptyField
from liquidlab.mesh import mesh_aabb_dims, mesh_volume
from liquidlab.surface import (SurfaceParams, extract_surface,
                               particles_to_field, smooth_mesh)

R_K = 0.01


def _params(**kw):
    return SurfaceParams(r_k=R_K, **kw)


def _seeded_block(nx, ny, nz, dx, seed=0):
    """Jittered 8-per-cell particle block mirroring the simulator's seeding."""
    ax = [(np.arange(n) + 0.5) * dx for n in (nx, ny, nz)]
    centers = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 3)
    sub = (np.stack(np.meshgrid(*[[-0.25, 0.25]] * 3, indexing="ij"), axis=-1)
           .reshape(-1, 3))
    pos = (centers[:, None, :] + sub[None, :, :] * dx).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    return pos + rng.uniform(-0.25, 0.25, pos.shape) * dx


def test_single_particle_sphere():
    mesh = extract_surface(np.array([[0.0, 0.0, 0.0]]), _params())
    assert mesh.is_watertight()
    vol = mesh_volume(mesh)
    sphere = 4.0 / 3.0 * np.pi * R_K**3
    assert 0.7 * sphere < vol < 1.3 * sphere
    # centered on the particle
    assert np.allclose(mesh.vertices.mean(axis=0), 0.0, atol=R_K / 4)


def test_empty_field_raises():
    with pytest.raises(EmptyField):
        extract_surface(np.zeros((0, 3)), _params())
    with pytest.raises(EmptyField):
        particles_to_field(np.zeros((0, 3)), _params(),
                           (np.zeros(3), np.ones(3)))


def _component_count(mesh):
    """Connected components over shared vertices (union-find oracle)."""
    parent = list(range(mesh.n_vertices))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b, c in mesh.faces:
        ra, rb, rc = find(a), find(b), find(c)
        parent[rb] = ra
        parent[find(c)] = ra
    return len({find(i) for i in np.unique(mesh.faces)})


def test_two_particle_connectivity():
    near = np.array([[0.0, 0.0, 0.0], [1.5 * R_K, 0.0, 0.0]])
    far = np.array([[0.0, 0.0, 0.0], [8.0 * R_K, 0.0, 0.0]])
    assert _component_count(extract_surface(near, _params())) == 1
    assert _component_count(extract_surface(far, _params())) == 2


def test_block_volume_tracks_particle_volume():
    dx = 2.0 * R_K  # simulation cell size for r_p = dx/4, r_k = 2 r_p
    pos = _seeded_block(6, 6, 4, dx)
    params = SurfaceParams(r_k=R_K)
    mesh = extract_surface(pos, params)
    assert mesh.is_watertight()
    target = pos.shape[0] * dx**3 / 8.0
    vol = mesh_volume(mesh)
    assert abs(vol - target) / target < 0.10


def test_block_dims():
    dx = 2.0 * R_K
    pos = _seeded_block(6, 6, 4, dx)
    mesh = extract_surface(pos, SurfaceParams(r_k=R_K))
    dims = np.asarray(mesh_aabb_dims(mesh))
    expect = np.array([6, 6, 4]) * dx
    fdx = SurfaceParams(r_k=R_K).dx
    assert np.all(np.abs(dims - expect) < 2.0 * fdx)


def test_smoothing_volume_drift_small():
    dx = 2.0 * R_K
    pos = _seeded_block(5, 5, 5, dx)
    rough = extract_surface(pos, SurfaceParams(r_k=R_K, smooth_iters=0))
    smooth = smooth_mesh(rough, 2)
    v0, v1 = mesh_volume(rough), mesh_volume(smooth)
    assert abs(v1 - v0) / v0 < 0.05


def test_translation_equivariance():
    pos = _seeded_block(4, 4, 3, 2.0 * R_K, seed=3)
    t = np.array([0.1234, -0.0567, 0.0891])
    a = extract_surface(pos, _params())
    b = extract_surface(pos + t, _params())
    assert a.n_faces == b.n_faces
    assert np.allclose(b.vertices, a.vertices + t, atol=1e-9)


def test_union_field_variant():
    mesh = extract_surface(np.array([[0.0, 0.0, 0.0]]),
                           _params(union_field=True, smooth_iters=0,
                                   iso_offset_scale=0.0))
    vol = mesh_volume(mesh)
    sphere = 4.0 / 3.0 * np.pi * R_K**3
    # a single particle under the union field is a sphere of radius r_k
    assert abs(vol - sphere) / sphere < 0.25


def test_zero_crossing_radius():
    params = _params(smooth_iters=0)
    field = particles_to_field(
        np.array([[0.0, 0.0, 0.0]]), params,
        (np.full(3, -4 * R_K), np.full(3, 4 * R_K)))
    xs, _, _ = field.node_axes()
    mid_j = np.argmin(np.abs(field.node_axes()[1]))
    mid_k = np.argmin(np.abs(field.node_axes()[2]))
    line = field.values[:, mid_j, mid_k]
    # sign change brackets r_k along the +x ray from the particle
    inside = np.abs(xs) < R_K - field.dx
    outside = (np.abs(xs) > R_K + field.dx) & (np.abs(xs) < 3 * R_K)
    assert np.all(line[inside] < 0)
    assert np.all(line[outside] > 0)


def test_params_validation():
    with pytest.raises(ValueError):
        SurfaceParams(r_k=0.0)
    with pytest.raises(ValueError):
        SurfaceParams(r_k=1.0, smooth_iters=-1)
    with pytest.raises(ValueError):
        SurfaceParams(r_k=1.0, support_scale=0.5)
    assert SurfaceParams(r_k=0.02).dx == 0.01


def test_numpy_path_runs(numpy_path):
    mesh = extract_surface(np.array([[0.0, 0.0, 0.0]]), _params())
    assert mesh.is_watertight()
