"""Marching cubes over a node-sampled scalar field, with welded vertices.

Crossing vertices are created once per lattice edge and shared by every
triangle touching that edge, so the output mesh is edge-manifold (watertight)
whenever the iso-surface does not leave the grid.
"""

import numpy as np

from . import accel
from .accel import njit
from ._mc_tables import TRI_TABLE
from .mesh import TriMesh
from .voxel import VoxelGrid

# Per Bourke edge number: axis of the lattice edge and the corner offset of
# its lower node within the cube.
_EDGE_AXIS = np.array([0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2, 2], dtype=np.int64)
_EDGE_BASE = np.array(
    [
        [0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 0],
        [0, 0, 1], [1, 0, 1], [0, 1, 1], [0, 0, 1],
        [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    ],
    dtype=np.int64,
)


def _edge_vertices(values, iso, origin, dx):
    """Welded crossing vertices on the three lattice-edge families.

    Returns (verts, id_x, id_y, id_z): the (n, 3) vertex array and, per axis,
    an int64 volume holding the global vertex id of each crossing edge (-1
    where the edge does not cross iso).
    """
    below = values < iso
    verts = []
    ids = []
    count = 0
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        cross = below[lo] != below[hi]
        id_vol = np.full(cross.shape, -1, dtype=np.int64)
        n = int(np.count_nonzero(cross))
        id_vol[cross] = np.arange(count, count + n)
        count += n
        ii, jj, kk = np.nonzero(cross)
        f0 = values[ii, jj, kk]
        idx1 = [ii, jj, kk]
        idx1[axis] = idx1[axis] + 1
        f1 = values[tuple(idx1)]
        t = (iso - f0) / (f1 - f0)
        pos = np.empty((n, 3), dtype=np.float64)
        pos[:, 0] = origin[0] + ii * dx
        pos[:, 1] = origin[1] + jj * dx
        pos[:, 2] = origin[2] + kk * dx
        pos[:, axis] += t * dx
        verts.append(pos)
        ids.append(id_vol)
    if count == 0:
        return np.zeros((0, 3), dtype=np.float64), ids[0], ids[1], ids[2]
    return np.concatenate(verts, axis=0), ids[0], ids[1], ids[2]


def _cube_cases(below):
    """Per-cell 8-bit corner configuration (Bourke corner order)."""
    b = below.astype(np.uint8)
    case = np.zeros(tuple(s - 1 for s in below.shape), dtype=np.int64)
    case += b[:-1, :-1, :-1] << 0
    case += b[1:, :-1, :-1] << 1
    case += b[1:, 1:, :-1] << 2
    case += b[:-1, 1:, :-1] << 3
    case += b[:-1, :-1, 1:] << 4
    case += b[1:, :-1, 1:] << 5
    case += b[1:, 1:, 1:] << 6
    case += b[:-1, 1:, 1:] << 7
    return case


def _faces_numpy(case, id_x, id_y, id_z):
    ci, cj, ck = np.nonzero((case != 0) & (case != 255))
    if len(ci) == 0:
        return np.zeros((0, 3), dtype=np.int64)
    # Global vertex id of each of the 12 cube edges, per active cell.
    cell_edge_ids = np.empty((len(ci), 12), dtype=np.int64)
    id_vols = (id_x, id_y, id_z)
    for e in range(12):
        bi, bj, bk = _EDGE_BASE[e]
        cell_edge_ids[:, e] = id_vols[_EDGE_AXIS[e]][ci + bi, cj + bj, ck + bk]
    rows = TRI_TABLE[case[ci, cj, ck]]  # (n, 16), -1 terminated
    valid = rows[:, 0:15:3] >= 0  # (n, 5) triangle slots
    tri_edges = rows[:, :15].reshape(-1, 5, 3)[valid]  # (m, 3)
    owner = np.repeat(np.arange(len(ci)), 5)[valid.reshape(-1)]
    return cell_edge_ids[owner[:, None], tri_edges]


@njit(cache=True)
def _faces_kernel(case, id_x, id_y, id_z, edge_axis, edge_base, tri_table):  # pragma: no cover
    nx, ny, nz = case.shape
    n_active = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                c = case[i, j, k]
                if c != 0 and c != 255:
                    n_active += 1
    faces = np.empty((n_active * 5, 3), dtype=np.int64)
    m = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                c = case[i, j, k]
                if c == 0 or c == 255:
                    continue
                row = tri_table[c]
                for s in range(0, 15, 3):
                    if row[s] < 0:
                        break
                    for v in range(3):
                        e = row[s + v]
                        bi = i + edge_base[e, 0]
                        bj = j + edge_base[e, 1]
                        bk = k + edge_base[e, 2]
                        ax = edge_axis[e]
                        if ax == 0:
                            faces[m, v] = id_x[bi, bj, bk]
                        elif ax == 1:
                            faces[m, v] = id_y[bi, bj, bk]
                        else:
                            faces[m, v] = id_z[bi, bj, bk]
                    m += 1
    return faces[:m]


def marching_cubes(grid: VoxelGrid, iso: float = 0.0, close_boundary: bool = False) -> TriMesh:
    """Extract the iso-surface of a node-sampled scalar field as a TriMesh.

    Faces are oriented outward for fields that are negative inside. An iso
    value outside the field range yields an empty mesh (not an error). With
    ``close_boundary`` the field is padded with one positive layer so
    surfaces that would exit the grid are capped flush with it.
    """
    values = np.asarray(grid.values, dtype=np.float64)
    if not np.isfinite(values).all():
        raise ValueError("field contains non-finite values")
    origin = grid.origin.copy()
    if close_boundary:
        # Huge pad value pulls cap vertices flush onto the grid boundary.
        pad = (abs(iso) + np.abs(values).max() + 1.0) * 1e9
        values = np.pad(values, 1, constant_values=pad)
        origin = origin - grid.dx
    verts, id_x, id_y, id_z = _edge_vertices(values, iso, origin, grid.dx)
    if len(verts) == 0:
        return TriMesh(
            np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), drop_degenerate=False
        )
    case = _cube_cases(values < iso)
    if accel.NUMBA_ENABLED:
        faces = _faces_kernel(
            case, id_x, id_y, id_z, _EDGE_AXIS, _EDGE_BASE, TRI_TABLE
        )
    else:
        faces = _faces_numpy(case, id_x, id_y, id_z)
    # Bourke tables wind for positive-inside fields; flip for SDF convention.
    faces = faces[:, ::-1].copy()
    # Zero-area slivers (iso hitting a node exactly) are kept: they carry the
    # edge pairing that makes the mesh watertight and add no volume.
    return TriMesh(verts, faces, drop_degenerate=False)


def sample_on_grid(fn, lo, hi, dx) -> VoxelGrid:
    """Sample ``fn(points) -> values`` on nodes covering [lo, hi] at spacing dx."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    counts = np.maximum(np.ceil((hi - lo) / dx).astype(np.int64) + 1, 2)
    axes = [lo[a] + np.arange(counts[a]) * dx for a in range(3)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    vals = np.asarray(fn(pts), dtype=np.float64).reshape(tuple(counts))
    return VoxelGrid(origin=lo, dx=dx, values=vals)
