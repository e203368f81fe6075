"""Trilinear particle<->grid transfer kernels (numba + numpy twins)."""

import numpy as np

from .. import accel
from ..accel import njit


@njit(cache=True)
def _p2g_kernel(pos, val, origin, inv_dx, offx, offy, offz, mom, wsum):  # pragma: no cover
    nx, ny, nz = wsum.shape
    for p in range(pos.shape[0]):
        rx = (pos[p, 0] - origin[0]) * inv_dx - offx
        ry = (pos[p, 1] - origin[1]) * inv_dx - offy
        rz = (pos[p, 2] - origin[2]) * inv_dx - offz
        i = int(np.floor(rx))
        j = int(np.floor(ry))
        k = int(np.floor(rz))
        i = min(max(i, 0), nx - 2)
        j = min(max(j, 0), ny - 2)
        k = min(max(k, 0), nz - 2)
        fx = rx - i
        fy = ry - j
        fz = rz - k
        v = val[p]
        for ci in range(2):
            wi = fx if ci == 1 else 1.0 - fx
            for cj in range(2):
                wj = fy if cj == 1 else 1.0 - fy
                for ck in range(2):
                    wk = fz if ck == 1 else 1.0 - fz
                    w = wi * wj * wk
                    mom[i + ci, j + cj, k + ck] += w * v
                    wsum[i + ci, j + cj, k + ck] += w


def _p2g_numpy(pos, val, origin, inv_dx, offx, offy, offz, mom, wsum):
    nx, ny, nz = wsum.shape
    rel = (pos - origin) * inv_dx - np.array([offx, offy, offz])
    base = np.floor(rel).astype(np.int64)
    base[:, 0] = np.clip(base[:, 0], 0, nx - 2)
    base[:, 1] = np.clip(base[:, 1], 0, ny - 2)
    base[:, 2] = np.clip(base[:, 2], 0, nz - 2)
    frac = rel - base
    for ci in range(2):
        wi = frac[:, 0] if ci == 1 else 1.0 - frac[:, 0]
        for cj in range(2):
            wj = frac[:, 1] if cj == 1 else 1.0 - frac[:, 1]
            for ck in range(2):
                wk = frac[:, 2] if ck == 1 else 1.0 - frac[:, 2]
                w = wi * wj * wk
                idx = (base[:, 0] + ci, base[:, 1] + cj, base[:, 2] + ck)
                np.add.at(mom, idx, w * val)
                np.add.at(wsum, idx, w)


def p2g(pos, val, origin, dx, offset, shape):
    """Scatter particle scalar ``val`` to a face array; returns (mom, wsum)."""
    mom = np.zeros(shape, dtype=np.float64)
    wsum = np.zeros(shape, dtype=np.float64)
    args = (
        np.ascontiguousarray(pos),
        np.ascontiguousarray(val, dtype=np.float64),
        np.asarray(origin, dtype=np.float64),
        1.0 / dx,
        float(offset[0]), float(offset[1]), float(offset[2]),
        mom, wsum,
    )
    if accel.NUMBA_ENABLED:
        _p2g_kernel(*args)
    else:
        _p2g_numpy(*args)
    return mom, wsum


@njit(cache=True)
def _g2p_kernel(pos, origin, inv_dx, offx, offy, offz, grid, out):  # pragma: no cover
    nx, ny, nz = grid.shape
    for p in range(pos.shape[0]):
        rx = (pos[p, 0] - origin[0]) * inv_dx - offx
        ry = (pos[p, 1] - origin[1]) * inv_dx - offy
        rz = (pos[p, 2] - origin[2]) * inv_dx - offz
        i = min(max(int(np.floor(rx)), 0), nx - 2)
        j = min(max(int(np.floor(ry)), 0), ny - 2)
        k = min(max(int(np.floor(rz)), 0), nz - 2)
        fx = min(max(rx - i, 0.0), 1.0)
        fy = min(max(ry - j, 0.0), 1.0)
        fz = min(max(rz - k, 0.0), 1.0)
        acc = 0.0
        for ci in range(2):
            wi = fx if ci == 1 else 1.0 - fx
            for cj in range(2):
                wj = fy if cj == 1 else 1.0 - fy
                for ck in range(2):
                    wk = fz if ck == 1 else 1.0 - fz
                    acc += wi * wj * wk * grid[i + ci, j + cj, k + ck]
        out[p] = acc


def _g2p_numpy(pos, origin, inv_dx, offx, offy, offz, grid, out):
    nx, ny, nz = grid.shape
    rel = (pos - origin) * inv_dx - np.array([offx, offy, offz])
    base = np.floor(rel).astype(np.int64)
    base[:, 0] = np.clip(base[:, 0], 0, nx - 2)
    base[:, 1] = np.clip(base[:, 1], 0, ny - 2)
    base[:, 2] = np.clip(base[:, 2], 0, nz - 2)
    frac = np.clip(rel - base, 0.0, 1.0)
    acc = np.zeros(len(pos), dtype=np.float64)
    for ci in range(2):
        wi = frac[:, 0] if ci == 1 else 1.0 - frac[:, 0]
        for cj in range(2):
            wj = frac[:, 1] if cj == 1 else 1.0 - frac[:, 1]
            for ck in range(2):
                wk = frac[:, 2] if ck == 1 else 1.0 - frac[:, 2]
                acc += (
                    wi * wj * wk
                    * grid[base[:, 0] + ci, base[:, 1] + cj, base[:, 2] + ck]
                )
    out[:] = acc


def g2p(pos, origin, dx, offset, grid):
    """Trilinear sample of one face array at particle positions."""
    out = np.empty(len(pos), dtype=np.float64)
    args = (
        np.ascontiguousarray(pos),
        np.asarray(origin, dtype=np.float64),
        1.0 / dx,
        float(offset[0]), float(offset[1]), float(offset[2]),
        np.ascontiguousarray(grid),
        out,
    )
    if accel.NUMBA_ENABLED:
        _g2p_kernel(*args)
    else:
        _g2p_numpy(*args)
    return out
