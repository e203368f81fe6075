"""Particle -> signed field -> watertight liquid surface mesh."""

from dataclasses import dataclass

import numpy as np

from . import accel
from .accel import njit
from .errors import EmptyField
from .marching import marching_cubes
from .mesh import TriMesh
from .voxel import VoxelGrid

@dataclass
class SurfaceParams:
    """Controls field construction and surface extraction.

    ``r_k`` is the blending sphere radius (defaults to 2x the simulation
    particle radius at the call sites that know it). ``iso_offset`` shifts the
    extraction level set: negative values pull the surface toward the particle
    centers, compensating the outward bias of the blended field so extracted
    volume tracks summed particle volume. ``union_field`` switches to the
    plain union-of-spheres min-distance field.
    """

    r_k: float
    dx: float = 0.0  # 0 -> r_k / 2
    # Tuned jointly so that (a) extracted volume of dense jitter-seeded bodies
    # tracks summed particle volume within a few percent and (b) an isolated
    # particle still meshes as a near-r_k sphere.
    iso_offset_scale: float = -0.02  # iso = scale * r_k
    support_scale: float = 3.7  # kernel support = scale * r_k
    smooth_iters: int = 2
    union_field: bool = False

    def __post_init__(self):
        if self.r_k <= 0:
            raise ValueError("r_k must be positive")
        if self.smooth_iters < 0:
            raise ValueError("smooth_iters must be >= 0")
        if self.support_scale <= 1.0:
            raise ValueError("support_scale must exceed 1")
        if self.dx <= 0:
            self.dx = self.r_k / 2.0

    @property
    def iso(self) -> float:
        return self.iso_offset_scale * self.r_k


@njit(cache=True)
def _splat_kernel(pos, support, origin, dx, wsum, wx, far):  # pragma: no cover
    nx, ny, nz = wsum.shape
    reach = int(np.ceil(support / dx))
    s2 = support * support
    for p in range(pos.shape[0]):
        px, py, pz = pos[p, 0], pos[p, 1], pos[p, 2]
        ci = int(np.floor((px - origin[0]) / dx))
        cj = int(np.floor((py - origin[1]) / dx))
        ck = int(np.floor((pz - origin[2]) / dx))
        for i in range(max(0, ci - reach), min(nx, ci + reach + 2)):
            gx = origin[0] + i * dx
            for j in range(max(0, cj - reach), min(ny, cj + reach + 2)):
                gy = origin[1] + j * dx
                for k in range(max(0, ck - reach), min(nz, ck + reach + 2)):
                    gz = origin[2] + k * dx
                    d2 = (gx - px) ** 2 + (gy - py) ** 2 + (gz - pz) ** 2
                    if d2 >= s2:
                        continue
                    w = (1.0 - d2 / s2) ** 3
                    wsum[i, j, k] += w
                    wx[i, j, k, 0] += w * px
                    wx[i, j, k, 1] += w * py
                    wx[i, j, k, 2] += w * pz
                    d = np.sqrt(d2)
                    if d < far[i, j, k]:
                        far[i, j, k] = d


def _splat_numpy(pos, support, origin, dx, wsum, wx, far):
    nx, ny, nz = wsum.shape
    reach = int(np.ceil(support / dx))
    s2 = support * support
    for p in range(pos.shape[0]):
        px, py, pz = pos[p]
        ci = int(np.floor((px - origin[0]) / dx))
        cj = int(np.floor((py - origin[1]) / dx))
        ck = int(np.floor((pz - origin[2]) / dx))
        i0, i1 = max(0, ci - reach), min(nx, ci + reach + 2)
        j0, j1 = max(0, cj - reach), min(ny, cj + reach + 2)
        k0, k1 = max(0, ck - reach), min(nz, ck + reach + 2)
        if i0 >= i1 or j0 >= j1 or k0 >= k1:
            continue
        gx = origin[0] + np.arange(i0, i1) * dx
        gy = origin[1] + np.arange(j0, j1) * dx
        gz = origin[2] + np.arange(k0, k1) * dx
        d2 = (
            (gx[:, None, None] - px) ** 2
            + (gy[None, :, None] - py) ** 2
            + (gz[None, None, :] - pz) ** 2
        )
        inside = d2 < s2
        w = np.where(inside, (1.0 - d2 / s2) ** 3, 0.0)
        sub = (slice(i0, i1), slice(j0, j1), slice(k0, k1))
        wsum[sub] += w
        wx[sub + (0,)] += w * px
        wx[sub + (1,)] += w * py
        wx[sub + (2,)] += w * pz
        d = np.sqrt(d2)
        np.minimum(far[sub], np.where(inside, d, np.inf), out=far[sub])


def particles_to_field(positions, params: SurfaceParams, bounds) -> VoxelGrid:
    """Signed field, negative inside the liquid.

    Default: blended-center field phi(x) = |x - xbar(x)| - r_k with weights
    k(s) = (1 - s^2)^3 over support 2*r_k. With ``union_field``:
    phi(x) = min_i |x - x_i| - r_k. Far from all particles phi = +r_k, the
    continuous limit of both variants at the support boundary.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if len(positions) == 0:
        raise EmptyField("no particles to build a field from")
    lo = np.asarray(bounds[0], dtype=np.float64)
    hi = np.asarray(bounds[1], dtype=np.float64)
    dx = params.dx
    dims = np.maximum(np.ceil((hi - lo) / dx).astype(np.int64) + 1, 2)
    support = params.support_scale * params.r_k
    wsum = np.zeros(tuple(dims), dtype=np.float64)
    wx = np.zeros(tuple(dims) + (3,), dtype=np.float64)
    far = np.full(tuple(dims), np.inf, dtype=np.float64)
    if accel.NUMBA_ENABLED:
        _splat_kernel(positions, support, lo, dx, wsum, wx, far)
    else:
        _splat_numpy(positions, support, lo, dx, wsum, wx, far)
    if params.union_field:
        phi = np.minimum(far, params.support_scale * params.r_k) - params.r_k
    else:
        covered = wsum > 0.0
        axes = [lo[a] + np.arange(dims[a]) * dx for a in range(3)]
        node = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        xbar = np.where(covered[..., None], wx / np.maximum(wsum, 1e-300)[..., None], node)
        dist = np.sqrt(((node - xbar) ** 2).sum(axis=-1))
        far_value = (params.support_scale - 1.0) * params.r_k
        phi = np.where(covered, dist - params.r_k, far_value)
    return VoxelGrid(origin=lo, dx=dx, values=phi)


def _vertex_neighbors(mesh: TriMesh):
    """CSR-ish neighbor sums for Laplacian smoothing (duplicates harmless)."""
    f = mesh.faces
    src = np.concatenate([f[:, 0], f[:, 1], f[:, 1], f[:, 2], f[:, 2], f[:, 0]])
    dst = np.concatenate([f[:, 1], f[:, 0], f[:, 2], f[:, 1], f[:, 0], f[:, 2]])
    return src, dst


def smooth_mesh(mesh: TriMesh, iterations: int, lam: float = 0.5, mu: float = -0.53) -> TriMesh:
    """Taubin lambda/mu smoothing: alternating inflate/deflate Laplacian steps
    suppress marching-cubes ridges with negligible net shrinkage. Each
    iteration is one (lam, mu) pair."""
    if iterations <= 0 or mesh.n_faces == 0:
        return mesh
    src, dst = _vertex_neighbors(mesh)
    deg = np.zeros(mesh.n_vertices, dtype=np.float64)
    np.add.at(deg, dst, 1.0)
    deg = np.maximum(deg, 1.0)[:, None]
    verts = mesh.vertices.copy()
    for _ in range(iterations):
        for step in (lam, mu):
            acc = np.zeros_like(verts)
            np.add.at(acc, dst, verts[src])
            verts += step * (acc / deg - verts)
    return TriMesh(verts, mesh.faces, drop_degenerate=False)


def extract_surface(positions, params: SurfaceParams) -> TriMesh:
    """Watertight liquid surface from particle positions.

    Field bounds are the particle AABB padded by 4*r_k, which keeps the level
    set strictly inside the grid, so the marching-cubes output is closed.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if len(positions) == 0:
        raise EmptyField("no particles to extract a surface from")
    pad = 4.0 * params.r_k
    lo = positions.min(axis=0) - pad
    hi = positions.max(axis=0) + pad
    field = particles_to_field(positions, params, (lo, hi))
    mesh = marching_cubes(field, iso=params.iso)
    return smooth_mesh(mesh, params.smooth_iters)
