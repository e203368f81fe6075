"""Matrix-free pressure-Poisson solve on the MAC grid.

Solves M phi = -div with the standard 7-point stencil: Neumann at solid
cells (coefficient dropped), Dirichlet phi=0 at empty cells (diagonal keeps
the term). The PCG residual is exactly the negated post-update divergence, so
convergence is checked as max |residual| <= tol in 1/s units.
"""

import numpy as np

from .. import accel
from ..accel import njit
from ..errors import NonConverged

# Modified-incomplete-Cholesky tuning (Bridson's recipe).
_MIC_TAU = 0.97
_MIC_SIGMA = 0.25


def build_system(fluid, solid, inv_dx2):
    """Stencil data: per-cell diagonal and fluid-fluid link masks per axis.

    A neighbor outside the grid counts as solid. Empty (air) neighbors add to
    the diagonal but carry no link (phi = 0 there).
    """
    not_solid = ~solid
    nactive = np.zeros(fluid.shape, dtype=np.float64)
    for axis in range(3):
        for side in (-1, 1):
            shifted = np.zeros_like(not_solid)
            src = [slice(None)] * 3
            dst = [slice(None)] * 3
            if side == 1:
                src[axis] = slice(1, None)
                dst[axis] = slice(None, -1)
            else:
                src[axis] = slice(None, -1)
                dst[axis] = slice(1, None)
            shifted[tuple(dst)] = not_solid[tuple(src)]
            nactive += shifted
    diag = np.where(fluid, nactive * inv_dx2, 0.0)
    links = []
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        links.append(fluid[tuple(lo)] & fluid[tuple(hi)])
    return diag, links


def apply_A(phi, fluid, diag, links, inv_dx2):
    """M phi with M = -Laplacian restricted to fluid cells."""
    out = diag * phi
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        link = links[axis]
        contrib_lo = np.zeros_like(phi)
        contrib_hi = np.zeros_like(phi)
        contrib_lo[lo] = np.where(link, phi[hi], 0.0)
        contrib_hi[hi] = np.where(link, phi[lo], 0.0)
        out -= (contrib_lo + contrib_hi) * inv_dx2
    return np.where(fluid, out, 0.0)


@njit(cache=True)
def _apply_A_kernel(phi, fluid, diag, lx, ly, lz, inv_dx2):  # pragma: no cover
    nx, ny, nz = phi.shape
    out = np.zeros((nx, ny, nz), dtype=np.float64)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if not fluid[i, j, k]:
                    continue
                t = diag[i, j, k] * phi[i, j, k]
                if i > 0 and lx[i - 1, j, k]:
                    t -= inv_dx2 * phi[i - 1, j, k]
                if i + 1 < nx and lx[i, j, k]:
                    t -= inv_dx2 * phi[i + 1, j, k]
                if j > 0 and ly[i, j - 1, k]:
                    t -= inv_dx2 * phi[i, j - 1, k]
                if j + 1 < ny and ly[i, j, k]:
                    t -= inv_dx2 * phi[i, j + 1, k]
                if k > 0 and lz[i, j, k - 1]:
                    t -= inv_dx2 * phi[i, j, k - 1]
                if k + 1 < nz and lz[i, j, k]:
                    t -= inv_dx2 * phi[i, j, k + 1]
                out[i, j, k] = t
    return out


@njit(cache=True)
def _mic_factor(fluid, diag, lx, ly, lz, inv_dx2):  # pragma: no cover
    nx, ny, nz = fluid.shape
    E = np.zeros((nx, ny, nz), dtype=np.float64)
    off = -inv_dx2
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if not fluid[i, j, k] or diag[i, j, k] <= 0.0:
                    continue  # isolated enclosed cell: leave E = 0
                e = diag[i, j, k]
                if i > 0 and lx[i - 1, j, k]:
                    ax = off * E[i - 1, j, k]
                    e -= ax * ax
                    e -= _MIC_TAU * ax * (
                        (off if (j + 1 < ny and ly[i - 1, j, k]) else 0.0)
                        + (off if (k + 1 < nz and lz[i - 1, j, k]) else 0.0)
                    ) * E[i - 1, j, k]
                if j > 0 and ly[i, j - 1, k]:
                    ay = off * E[i, j - 1, k]
                    e -= ay * ay
                    e -= _MIC_TAU * ay * (
                        (off if (i + 1 < nx and lx[i, j - 1, k]) else 0.0)
                        + (off if (k + 1 < nz and lz[i, j - 1, k]) else 0.0)
                    ) * E[i, j - 1, k]
                if k > 0 and lz[i, j, k - 1]:
                    az = off * E[i, j, k - 1]
                    e -= az * az
                    e -= _MIC_TAU * az * (
                        (off if (i + 1 < nx and lx[i, j, k - 1]) else 0.0)
                        + (off if (j + 1 < ny and ly[i, j, k - 1]) else 0.0)
                    ) * E[i, j, k - 1]
                if e < _MIC_SIGMA * diag[i, j, k]:
                    e = diag[i, j, k]
                E[i, j, k] = 1.0 / np.sqrt(e)
    return E


@njit(cache=True)
def _mic_apply(r, fluid, E, lx, ly, lz, inv_dx2):  # pragma: no cover
    nx, ny, nz = r.shape
    q = np.zeros((nx, ny, nz), dtype=np.float64)
    z = np.zeros((nx, ny, nz), dtype=np.float64)
    off = -inv_dx2
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if not fluid[i, j, k]:
                    continue
                t = r[i, j, k]
                if i > 0 and lx[i - 1, j, k]:
                    t -= off * E[i - 1, j, k] * q[i - 1, j, k]
                if j > 0 and ly[i, j - 1, k]:
                    t -= off * E[i, j - 1, k] * q[i, j - 1, k]
                if k > 0 and lz[i, j, k - 1]:
                    t -= off * E[i, j, k - 1] * q[i, j, k - 1]
                q[i, j, k] = t * E[i, j, k]
    for i in range(nx - 1, -1, -1):
        for j in range(ny - 1, -1, -1):
            for k in range(nz - 1, -1, -1):
                if not fluid[i, j, k]:
                    continue
                t = q[i, j, k]
                if i + 1 < nx and lx[i, j, k]:
                    t -= off * E[i, j, k] * z[i + 1, j, k]
                if j + 1 < ny and ly[i, j, k]:
                    t -= off * E[i, j, k] * z[i, j + 1, k]
                if k + 1 < nz and lz[i, j, k]:
                    t -= off * E[i, j, k] * z[i, j, k + 1]
                z[i, j, k] = t * E[i, j, k]
    return z


def _dot(a, b):
    # np.sum of the product: deterministic pairwise summation, no BLAS.
    return float(np.sum(a * b))


def solve_pressure(rhs, fluid, solid, dx, tol, max_iter):
    """PCG for M phi = rhs on fluid cells. Returns (phi, iterations, residual).

    Raises NonConverged when max |residual| stays above tol after max_iter.
    """
    inv_dx2 = 1.0 / (dx * dx)
    diag, links = build_system(fluid, solid, inv_dx2)
    lx, ly, lz = links
    rhs = np.where(fluid, rhs, 0.0)
    phi = np.zeros_like(rhs)
    r = rhs.copy()
    res = float(np.abs(r).max()) if r.size else 0.0
    if res <= tol:
        return phi, 0, res
    if accel.NUMBA_ENABLED:
        # Pad link masks to full cell shape for simple kernel indexing.
        def _pad(link, axis):
            full = np.zeros(fluid.shape, dtype=np.bool_)
            sl = [slice(None)] * 3
            sl[axis] = slice(None, -1)
            full[tuple(sl)] = link
            return full

        lxf, lyf, lzf = _pad(lx, 0), _pad(ly, 1), _pad(lz, 2)
        E = _mic_factor(fluid, diag, lxf, lyf, lzf, inv_dx2)

        def precond(res_arr):
            return _mic_apply(res_arr, fluid, E, lxf, lyf, lzf, inv_dx2)

        def matvec(vec):
            return _apply_A_kernel(vec, fluid, diag, lxf, lyf, lzf, inv_dx2)

    else:
        inv_diag = np.where(diag > 0, 1.0 / np.maximum(diag, 1e-300), 0.0)

        def precond(res_arr):
            return res_arr * inv_diag

        def matvec(vec):
            return apply_A(vec, fluid, diag, links, inv_dx2)

    z = precond(r)
    p = z.copy()
    rz = _dot(r, z)
    for it in range(1, max_iter + 1):
        Ap = matvec(p)
        pAp = _dot(p, Ap)
        if pAp <= 0.0:
            break
        alpha = rz / pAp
        phi += alpha * p
        r -= alpha * Ap
        res = float(np.abs(r).max())
        if res <= tol:
            return phi, it, res
        z = precond(r)
        rz_new = _dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NonConverged(residual=res, iterations=max_iter)
