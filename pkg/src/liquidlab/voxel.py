"""Voxel grids and watertight-mesh voxelization (ray-parity occupancy)."""

from dataclasses import dataclass

import numpy as np

from . import accel
from .accel import njit
from .errors import VoxelizationUndefined
from .mesh import TriMesh


@dataclass
class VoxelGrid:
    """Uniform grid: ``values[i, j, k]`` sampled on an axis-aligned lattice.

    Scalar grids sample at nodes ``origin + index * dx`` (marching cubes);
    boolean occupancy grids are cell-centered at ``origin + (index + 0.5) * dx``.
    """

    origin: np.ndarray
    dx: float
    values: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.dx = float(self.dx)
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        if self.values.ndim != 3 or min(self.values.shape) < 1:
            raise ValueError("values must be a non-empty 3D array")

    @property
    def dims(self):
        return self.values.shape

    def node_axes(self):
        """Per-axis node coordinates for scalar fields."""
        return tuple(
            self.origin[a] + np.arange(self.values.shape[a]) * self.dx
            for a in range(3)
        )

    def cell_center_axes(self):
        """Per-axis cell-center coordinates for occupancy grids."""
        return tuple(
            self.origin[a] + (np.arange(self.values.shape[a]) + 0.5) * self.dx
            for a in range(3)
        )

    @property
    def count_true(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def occupied_volume(self) -> float:
        return self.count_true * self.dx**3


def _prepare_tris_2d(mesh: TriMesh):
    """Project triangles to the (x, y) plane with CCW winding; drop edge-on ones.

    Returns (ax, ay, bx, by, cx, cy, az, bz, cz) arrays of the kept triangles.
    """
    tri = mesh.triangle_corners()
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    area2 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        c[:, 0] - a[:, 0]
    )
    flip = area2 < 0
    b_new = np.where(flip[:, None], c, b)
    c_new = np.where(flip[:, None], b, c)
    keep = area2 != 0
    a, b, c = a[keep], b_new[keep], c_new[keep]
    return a, b, c


def _edge_on_boundary(dx_e, dy_e):
    """Half-open fill rule: a boundary pixel belongs to the triangle whose
    edge satisfies this predicate; the twin edge of the adjacent triangle
    fails it, so shared edges are counted exactly once."""
    return (dy_e > 0.0) | ((dy_e == 0.0) & (dx_e < 0.0))


def _voxelize_numpy(a, b, c, x0, y0, z0, dx, nx, ny, nz):
    crossings = np.zeros((nx, ny, nz + 1), dtype=np.int32)
    xs = x0 + (np.arange(nx) + 0.5) * dx
    ys = y0 + (np.arange(ny) + 0.5) * dx
    for t in range(len(a)):
        ax, ay, az = a[t]
        bx, by, bz = b[t]
        cx, cy, cz = c[t]
        ix0 = max(0, int(np.ceil((min(ax, bx, cx) - x0) / dx - 0.5)))
        ix1 = min(nx - 1, int(np.floor((max(ax, bx, cx) - x0) / dx - 0.5)))
        iy0 = max(0, int(np.ceil((min(ay, by, cy) - y0) / dx - 0.5)))
        iy1 = min(ny - 1, int(np.floor((max(ay, by, cy) - y0) / dx - 0.5)))
        if ix1 < ix0 or iy1 < iy0:
            continue
        px = xs[ix0 : ix1 + 1][:, None]
        py = ys[iy0 : iy1 + 1][None, :]
        e0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        e1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
        e2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
        cover = (
            ((e0 > 0) | ((e0 == 0) & _edge_on_boundary(bx - ax, by - ay)))
            & ((e1 > 0) | ((e1 == 0) & _edge_on_boundary(cx - bx, cy - by)))
            & ((e2 > 0) | ((e2 == 0) & _edge_on_boundary(ax - cx, ay - cy)))
        )
        if not cover.any():
            continue
        denom = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        beta = ((px - ax) * (cy - ay) - (py - ay) * (cx - ax)) / denom
        gamma = ((bx - ax) * (py - ay) - (by - ay) * (px - ax)) / denom
        zs = az + beta * (bz - az) + gamma * (cz - az)
        ii, jj = np.nonzero(cover)
        kz = np.ceil((zs[ii, jj] - z0) / dx - 0.5).astype(np.int64)
        kz = np.clip(kz, 0, nz)
        np.add.at(crossings, (ii + ix0, jj + iy0, np.zeros_like(kz)), 1)
        np.add.at(crossings, (ii + ix0, jj + iy0, kz), -1)
    below = np.cumsum(crossings, axis=2)[:, :, :nz]
    return (below % 2).astype(bool)


@njit(cache=True)
def _voxelize_kernel(a, b, c, x0, y0, z0, dx, nx, ny, nz):  # pragma: no cover
    crossings = np.zeros((nx, ny, nz + 1), dtype=np.int32)
    for t in range(a.shape[0]):
        ax, ay, az = a[t, 0], a[t, 1], a[t, 2]
        bx, by, bz = b[t, 0], b[t, 1], b[t, 2]
        cx, cy, cz = c[t, 0], c[t, 1], c[t, 2]
        ix0 = max(0, int(np.ceil((min(ax, min(bx, cx)) - x0) / dx - 0.5)))
        ix1 = min(nx - 1, int(np.floor((max(ax, max(bx, cx)) - x0) / dx - 0.5)))
        iy0 = max(0, int(np.ceil((min(ay, min(by, cy)) - y0) / dx - 0.5)))
        iy1 = min(ny - 1, int(np.floor((max(ay, max(by, cy)) - y0) / dx - 0.5)))
        if ix1 < ix0 or iy1 < iy0:
            continue
        denom = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        for ii in range(ix0, ix1 + 1):
            px = x0 + (ii + 0.5) * dx
            for jj in range(iy0, iy1 + 1):
                py = y0 + (jj + 0.5) * dx
                e0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
                e1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
                e2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
                ok0 = e0 > 0.0 or (
                    e0 == 0.0
                    and ((by - ay) > 0.0 or ((by - ay) == 0.0 and (bx - ax) < 0.0))
                )
                ok1 = e1 > 0.0 or (
                    e1 == 0.0
                    and ((cy - by) > 0.0 or ((cy - by) == 0.0 and (cx - bx) < 0.0))
                )
                ok2 = e2 > 0.0 or (
                    e2 == 0.0
                    and ((ay - cy) > 0.0 or ((ay - cy) == 0.0 and (ax - cx) < 0.0))
                )
                if not (ok0 and ok1 and ok2):
                    continue
                beta = ((px - ax) * (cy - ay) - (py - ay) * (cx - ax)) / denom
                gamma = ((bx - ax) * (py - ay) - (by - ay) * (px - ax)) / denom
                zs = az + beta * (bz - az) + gamma * (cz - az)
                kz = int(np.ceil((zs - z0) / dx - 0.5))
                if kz < 0:
                    kz = 0
                elif kz > nz:
                    kz = nz
                crossings[ii, jj, 0] += 1
                crossings[ii, jj, kz] -= 1
    occ = np.zeros((nx, ny, nz), dtype=np.bool_)
    for ii in range(nx):
        for jj in range(ny):
            run = 0
            for kk in range(nz):
                run += crossings[ii, jj, kk]
                occ[ii, jj, kk] = (run % 2) == 1
    return occ


def voxelize(mesh: TriMesh, res: int, bounds=None) -> VoxelGrid:
    """Occupancy grid: cell true iff its center is inside the watertight mesh.

    ``bounds`` is an (lo, hi) pair enclosing the mesh; defaults to the mesh
    AABB. Bounds are expanded to a cube so the cell size is isotropic.
    """
    if not mesh.is_watertight():
        raise VoxelizationUndefined("voxelize needs a watertight mesh")
    if res < 1:
        raise ValueError("res must be >= 1")
    if bounds is None:
        lo = mesh.vertices.min(axis=0)
        hi = mesh.vertices.max(axis=0)
    else:
        lo = np.asarray(bounds[0], dtype=np.float64)
        hi = np.asarray(bounds[1], dtype=np.float64)
    center = (lo + hi) / 2.0
    side = float((hi - lo).max())
    if side <= 0:
        raise ValueError("bounds must have positive extent")
    lo = center - side / 2.0
    dx = side / res
    a, b, c = _prepare_tris_2d(mesh)
    if accel.NUMBA_ENABLED:
        occ = _voxelize_kernel(
            np.ascontiguousarray(a),
            np.ascontiguousarray(b),
            np.ascontiguousarray(c),
            lo[0], lo[1], lo[2], dx, res, res, res,
        )
    else:
        occ = _voxelize_numpy(a, b, c, lo[0], lo[1], lo[2], dx, res, res, res)
    return VoxelGrid(origin=lo, dx=dx, values=occ)
