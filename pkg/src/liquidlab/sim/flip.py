"""FLIP/PIC liquid stepping inside a rotating rigid container."""

from dataclasses import dataclass, field

import numpy as np

from .. import accel
from ..accel import njit
from ..errors import (
    InsufficientParticles,
    NonConverged,
    NumericalBlowup,
    Overfill,
    ParticleLimit,
)
from ..transforms import RigidPose, angular_velocity
from .kernels import g2p, p2g
from .params import SimParams
from .pressure import solve_pressure

_U_OFF = (0.0, 0.5, 0.5)
_V_OFF = (0.5, 0.0, 0.5)
_W_OFF = (0.5, 0.5, 0.0)
_EXTRAP_LAYERS = 3


@dataclass
class ParticleSet:
    positions: np.ndarray
    velocities: np.ndarray
    particle_volume: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.velocities = np.asarray(self.velocities, dtype=np.float64).reshape(-1, 3)
        if len(self.positions) != len(self.velocities):
            raise ValueError("positions/velocities length mismatch")

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def total_volume(self) -> float:
        return self.count * self.particle_volume

    def copy(self) -> "ParticleSet":
        return ParticleSet(
            self.positions.copy(), self.velocities.copy(), self.particle_volume
        )


@dataclass
class MacGrid:
    """Staggered velocity grid over ``dims`` cells of size ``dx``.

    ``cavity_phi`` holds the container signed distance at cell centers,
    negative inside the cavity; a cell is solid where it is >= 0 (the solid
    occupies everything that is not cavity). Wall motion for the pressure
    solve is the rigid field omega x (x - pivot) + wall_velocity.
    """

    origin: np.ndarray
    dx: float
    dims: tuple
    u: np.ndarray = None
    v: np.ndarray = None
    w: np.ndarray = None
    p: np.ndarray = None
    cavity_phi: np.ndarray = None
    solid: np.ndarray = None
    fluid: np.ndarray = None
    wall_omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    wall_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pivot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        nx, ny, nz = self.dims
        if self.u is None:
            self.u = np.zeros((nx + 1, ny, nz))
        if self.v is None:
            self.v = np.zeros((nx, ny + 1, nz))
        if self.w is None:
            self.w = np.zeros((nx, ny, nz + 1))
        if self.p is None:
            self.p = np.zeros((nx, ny, nz))
        if self.cavity_phi is None:
            self.cavity_phi = np.full((nx, ny, nz), -1.0)
        if self.solid is None:
            self.solid = self.cavity_phi >= 0.0
        if self.fluid is None:
            self.fluid = np.zeros((nx, ny, nz), dtype=bool)

    def cell_centers(self) -> np.ndarray:
        nx, ny, nz = self.dims
        ax = [self.origin[a] + (np.arange(n) + 0.5) * self.dx for a, n in
              zip(range(3), (nx, ny, nz))]
        return np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1)

    def face_coords(self, offset, shape):
        ax = [self.origin[a] + (np.arange(shape[a]) + offset[a]) * self.dx
              for a in range(3)]
        return np.meshgrid(*ax, indexing="ij")

    def divergence(self) -> np.ndarray:
        inv = 1.0 / self.dx
        div = (
            (self.u[1:, :, :] - self.u[:-1, :, :])
            + (self.v[:, 1:, :] - self.v[:, :-1, :])
            + (self.w[:, :, 1:] - self.w[:, :, :-1])
        ) * inv
        return np.where(self.fluid, div, 0.0)


def build_grid(container, pose, origin, dims, dx) -> MacGrid:
    grid = MacGrid(origin=origin, dx=dx, dims=tuple(dims))
    centers = grid.cell_centers().reshape(-1, 3)
    phi = container.distance_world(centers, pose).reshape(dims)
    grid.cavity_phi = phi
    grid.solid = phi >= 0.0
    return grid


def classify_fluid(grid: MacGrid, positions: np.ndarray):
    nx, ny, nz = grid.dims
    fluid = np.zeros((nx, ny, nz), dtype=bool)
    if len(positions):
        idx = np.floor((positions - grid.origin) / grid.dx).astype(np.int64)
        idx[:, 0] = np.clip(idx[:, 0], 0, nx - 1)
        idx[:, 1] = np.clip(idx[:, 1], 0, ny - 1)
        idx[:, 2] = np.clip(idx[:, 2], 0, nz - 1)
        fluid[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    grid.fluid = fluid & ~grid.solid
    return grid.fluid


def face_solid_masks(solid):
    """A face is solid if either adjacent cell is solid or lies off-grid."""
    nx, ny, nz = solid.shape
    us = np.ones((nx + 1, ny, nz), dtype=bool)
    vs = np.ones((nx, ny + 1, nz), dtype=bool)
    ws = np.ones((nx, ny, nz + 1), dtype=bool)
    us[1:-1] = solid[:-1] | solid[1:]
    vs[:, 1:-1] = solid[:, :-1] | solid[:, 1:]
    ws[:, :, 1:-1] = solid[:, :, :-1] | solid[:, :, 1:]
    return us, vs, ws


def rigid_face_fields(grid: MacGrid):
    """Per-face normal component of the wall's rigid velocity field."""
    ox, oy, oz = grid.wall_omega
    px, py, pz = grid.pivot
    lx, ly, lz = grid.wall_velocity
    X, Y, Z = grid.face_coords(_U_OFF, grid.u.shape)
    ur = lx + oy * (Z - pz) - oz * (Y - py)
    X, Y, Z = grid.face_coords(_V_OFF, grid.v.shape)
    vr = ly + oz * (X - px) - ox * (Z - pz)
    X, Y, Z = grid.face_coords(_W_OFF, grid.w.shape)
    wr = lz + ox * (Y - py) - oy * (X - px)
    return ur, vr, wr


def apply_solid_bc(grid: MacGrid, masks=None, rigid=None):
    us, vs, ws = masks if masks is not None else face_solid_masks(grid.solid)
    ur, vr, wr = rigid if rigid is not None else rigid_face_fields(grid)
    grid.u[us] = ur[us]
    grid.v[vs] = vr[vs]
    grid.w[ws] = wr[ws]
    return us, vs, ws


def _extrapolate_numpy(comp, valid, layers):
    for _ in range(layers):
        vsum = np.zeros_like(comp)
        vcnt = np.zeros(comp.shape, dtype=np.float64)
        for axis in range(3):
            for sgn in (1, -1):
                src = [slice(None)] * 3
                dst = [slice(None)] * 3
                if sgn == 1:
                    src[axis], dst[axis] = slice(1, None), slice(None, -1)
                else:
                    src[axis], dst[axis] = slice(None, -1), slice(1, None)
                src, dst = tuple(src), tuple(dst)
                vsum[dst] += np.where(valid[src], comp[src], 0.0)
                vcnt[dst] += valid[src]
        grow = (~valid) & (vcnt > 0)
        comp[grow] = vsum[grow] / vcnt[grow]
        valid = valid | grow
    return valid


@njit(cache=True)
def _extrapolate_kernel(comp, valid, layers):  # pragma: no cover
    # Neighbor sums accumulate in the same (axis, sign) order as the numpy
    # sweep, so both paths produce bitwise-identical fields.
    nx, ny, nz = comp.shape
    for _ in range(layers):
        vsum = np.zeros((nx, ny, nz), dtype=np.float64)
        vcnt = np.zeros((nx, ny, nz), dtype=np.float64)
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    if valid[i, j, k]:
                        continue
                    s = 0.0
                    c = 0.0
                    if i + 1 < nx and valid[i + 1, j, k]:
                        s += comp[i + 1, j, k]
                        c += 1.0
                    if i > 0 and valid[i - 1, j, k]:
                        s += comp[i - 1, j, k]
                        c += 1.0
                    if j + 1 < ny and valid[i, j + 1, k]:
                        s += comp[i, j + 1, k]
                        c += 1.0
                    if j > 0 and valid[i, j - 1, k]:
                        s += comp[i, j - 1, k]
                        c += 1.0
                    if k + 1 < nz and valid[i, j, k + 1]:
                        s += comp[i, j, k + 1]
                        c += 1.0
                    if k > 0 and valid[i, j, k - 1]:
                        s += comp[i, j, k - 1]
                        c += 1.0
                    vsum[i, j, k] = s
                    vcnt[i, j, k] = c
        new_valid = valid.copy()
        grew = False
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    if not valid[i, j, k] and vcnt[i, j, k] > 0.0:
                        comp[i, j, k] = vsum[i, j, k] / vcnt[i, j, k]
                        new_valid[i, j, k] = True
                        grew = True
        valid = new_valid
        if not grew:
            break
    return valid


def extrapolate(comp: np.ndarray, valid: np.ndarray, layers: int = _EXTRAP_LAYERS):
    """Average valid neighbors outward, one ring per sweep (in place)."""
    if accel.NUMBA_ENABLED:
        return _extrapolate_kernel(comp, np.ascontiguousarray(valid), layers)
    return _extrapolate_numpy(comp, valid, layers)


def _viscosity(comp, nu_dt_inv_dx2):
    lap = np.zeros_like(comp)
    lap[1:-1, 1:-1, 1:-1] = (
        comp[2:, 1:-1, 1:-1] + comp[:-2, 1:-1, 1:-1]
        + comp[1:-1, 2:, 1:-1] + comp[1:-1, :-2, 1:-1]
        + comp[1:-1, 1:-1, 2:] + comp[1:-1, 1:-1, :-2]
        - 6.0 * comp[1:-1, 1:-1, 1:-1]
    )
    comp += nu_dt_inv_dx2 * lap


def subtract_gradient(grid: MacGrid, phi, masks):
    us, vs, ws = masks
    inv = 1.0 / grid.dx
    fl = grid.fluid
    gx = (phi[1:] - phi[:-1]) * inv
    upd = (fl[1:] | fl[:-1]) & ~us[1:-1]
    grid.u[1:-1][upd] -= gx[upd]
    gy = (phi[:, 1:] - phi[:, :-1]) * inv
    upd = (fl[:, 1:] | fl[:, :-1]) & ~vs[:, 1:-1]
    grid.v[:, 1:-1][upd] -= gy[upd]
    gz = (phi[:, :, 1:] - phi[:, :, :-1]) * inv
    upd = (fl[:, :, 1:] | fl[:, :, :-1]) & ~ws[:, :, 1:-1]
    grid.w[:, :, 1:-1][upd] -= gz[upd]


def pressure_project(grid: MacGrid, params: SimParams, stats=None) -> MacGrid:
    """Make the fluid-cell velocity field discretely divergence-free.

    Applies the wall's rigid velocity to solid faces, solves the pressure
    Poisson system and subtracts the gradient. The grid is modified in place
    and returned. A ``stats`` dict, if given, accumulates the worst
    post-projection divergence and iteration count seen so far.
    """
    if not (np.isfinite(grid.u).all() and np.isfinite(grid.v).all()
            and np.isfinite(grid.w).all()):
        raise ValueError("velocities must be finite")
    masks = apply_solid_bc(grid)
    rhs = -grid.divergence()
    phi, iters, res = solve_pressure(
        rhs, grid.fluid, grid.solid, grid.dx,
        params.pressure_tol, params.pressure_max_iter,
    )
    subtract_gradient(grid, phi, masks)
    grid.p = phi * (params.density / max(params.dt, 1e-300))
    if stats is not None:
        stats["max_divergence"] = max(stats.get("max_divergence", 0.0), res)
        stats["max_pressure_iters"] = max(
            stats.get("max_pressure_iters", 0), iters)
    return grid


def _project_into_cavity(container, pose, positions, margin, iterations=8,
                         phi=None):
    """Pull points to phi <= -margin (in place); returns final phi."""
    if phi is None:
        phi = container.distance_world(positions, pose)
    else:
        phi = phi.copy()
    for _ in range(iterations):
        bad = phi > -margin
        if not bad.any():
            break
        n = container.gradient_world(positions[bad], pose)
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        n = n / np.maximum(norm, 1e-12)
        positions[bad] -= (phi[bad] + margin)[:, None] * n
        phi[bad] = container.distance_world(positions[bad], pose)
    return phi


def seed_particles(container, pose: RigidPose, fill_volume: float,
                   params: SimParams) -> ParticleSet:
    """Jitter-seed 8 particles/cell in cavity cells below the fill plane.

    Cells are filled bottom-up in world z until the summed particle volume
    (dx^3 per cell) reaches ``fill_volume``.
    """
    if fill_volume < 0:
        raise ValueError("fill_volume must be >= 0")
    empty = ParticleSet(
        np.zeros((0, 3)), np.zeros((0, 3)), params.particle_volume
    )
    dx = params.dx
    corners = _world_aabb_corners(container, pose)
    lo = corners.min(axis=0) - dx
    hi = corners.max(axis=0) + dx
    dims = np.maximum(np.ceil((hi - lo) / dx).astype(np.int64), 1)
    # Cavity volume estimate at half-cell sampling for the overfill check.
    sub_dims = dims * 2
    ax = [lo[a] + (np.arange(sub_dims[a]) + 0.5) * (dx / 2) for a in range(3)]
    pts = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 3)
    inside_sub = container.distance_world(pts, pose) < 0.0
    cavity_volume = float(np.count_nonzero(inside_sub)) * (dx / 2) ** 3
    if fill_volume > cavity_volume * (1.0 + 1e-9):
        raise Overfill(
            f"fill volume {fill_volume:.3e} m^3 exceeds cavity volume "
            f"{cavity_volume:.3e} m^3"
        )
    n_cells = int(round(fill_volume / dx**3))
    if n_cells == 0:
        return empty
    ax = [lo[a] + (np.arange(dims[a]) + 0.5) * dx for a in range(3)]
    centers = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 3)
    inside = container.distance_world(centers, pose) < 0.0
    centers = centers[inside]
    order = np.lexsort((centers[:, 0], centers[:, 1], centers[:, 2]))
    centers = centers[order]
    n_cells = min(n_cells, len(centers))
    count = 8 * n_cells
    if count > params.max_particles:
        raise ParticleLimit(
            f"{count} particles exceed the cap {params.max_particles}"
        )
    chosen = centers[:n_cells]
    sub = (np.stack(np.meshgrid(*[[-0.25, 0.25]] * 3, indexing="ij"), axis=-1)
           .reshape(-1, 3))
    pos = (chosen[:, None, :] + sub[None, :, :] * dx).reshape(-1, 3)
    rng = np.random.default_rng(params.seed)
    pos = pos + rng.uniform(-0.25, 0.25, pos.shape) * dx
    # Strictly inside so the first step's wall push-out has nothing to do.
    _project_into_cavity(container, pose, pos, params.particle_radius * 1.001)
    return ParticleSet(pos, np.zeros_like(pos), params.particle_volume)


def _world_aabb_corners(container, pose: RigidPose):
    lo, hi = container.aabb()
    corners = np.array([
        [x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
        for z in (lo[2], hi[2])
    ])
    return pose.apply(corners)


def _lerp_pose(pose_a: RigidPose, pose_b: RigidPose, t: float) -> RigidPose:
    ang = (1.0 - t) * np.asarray(pose_a.angles_deg) + t * np.asarray(pose_b.angles_deg)
    return RigidPose(tuple(ang), tuple(pose_a.pivot))


def _substep(particles, container, pose_a, pose_b, dts, params, origin, dims,
             stats=None):
    pos = particles.positions
    vel = particles.velocities
    omega = angular_velocity(pose_a, pose_b, dts)
    grid = build_grid(container, pose_b, origin, dims, params.dx)
    grid.wall_omega = omega
    grid.pivot = np.asarray(pose_b.pivot, dtype=np.float64)
    classify_fluid(grid, pos)

    comps = []
    for off, shape, comp_idx in (
        (_U_OFF, grid.u.shape, 0), (_V_OFF, grid.v.shape, 1),
        (_W_OFF, grid.w.shape, 2),
    ):
        mom, wsum = p2g(pos, vel[:, comp_idx], grid.origin, params.dx, off, shape)
        velg = np.where(wsum > 0.0, mom / np.maximum(wsum, 1e-300), 0.0)
        comps.append((velg, wsum > 0.0))
    grid.u, grid.v, grid.w = comps[0][0], comps[1][0], comps[2][0]

    masks = apply_solid_bc(grid)
    valids = []
    for (comp, has_w), ms in zip(comps, masks):
        valids.append(extrapolate(comp, has_w | ms))
    old_u, old_v, old_w = grid.u.copy(), grid.v.copy(), grid.w.copy()

    gx, gy, gz = params.gravity
    if gx != 0.0:
        grid.u += gx * dts
    if gy != 0.0:
        grid.v += gy * dts
    if gz != 0.0:
        grid.w += gz * dts
    nu_fac = params.viscosity * dts / params.dx**2
    if nu_fac != 0.0:
        _viscosity(grid.u, nu_fac)
        _viscosity(grid.v, nu_fac)
        _viscosity(grid.w, nu_fac)

    pressure_project(grid, params, stats=stats)
    for comp, valid in zip((grid.u, grid.v, grid.w), valids):
        extrapolate(comp, valid.copy())

    def sample_all(at):
        return np.stack([
            g2p(at, grid.origin, params.dx, _U_OFF, grid.u),
            g2p(at, grid.origin, params.dx, _V_OFF, grid.v),
            g2p(at, grid.origin, params.dx, _W_OFF, grid.w),
        ], axis=1)

    old_grid = (old_u, old_v, old_w)
    new_at_p = sample_all(pos)
    old_at_p = np.stack([
        g2p(pos, grid.origin, params.dx, off, g0)
        for off, g0 in zip((_U_OFF, _V_OFF, _W_OFF), old_grid)
    ], axis=1)
    fr = params.flip_ratio
    vel = fr * (vel + (new_at_p - old_at_p)) + (1.0 - fr) * new_at_p

    mid = pos + 0.5 * dts * sample_all(pos)
    pos = pos + dts * sample_all(mid)

    # Wall collision: project back inside and remove the inbound relative
    # normal velocity.
    phi = container.distance_world(pos, pose_b)
    hit = phi > -params.particle_radius
    if hit.any():
        _project_into_cavity(container, pose_b, pos, params.particle_radius,
                             phi=phi)
        n = container.gradient_world(pos[hit], pose_b)
        n /= np.maximum(np.linalg.norm(n, axis=1, keepdims=True), 1e-12)
        vw = np.cross(omega, pos[hit] - grid.pivot)
        vrel = vel[hit] - vw
        vn = np.sum(vrel * n, axis=1)
        vrel -= np.maximum(vn, 0.0)[:, None] * n
        vel[hit] = vw + vrel
    return ParticleSet(pos, vel, particles.particle_volume)


def simulate_step(particles: ParticleSet, container, pose_t: RigidPose,
                  pose_t1: RigidPose, params: SimParams,
                  frame_index: int = 0, stats=None) -> ParticleSet:
    """Advance the particle set by one frame of duration params.dt."""
    if particles.count == 0:
        return particles.copy()
    if not np.allclose(pose_t.pivot, pose_t1.pivot):
        raise ValueError("poses must share a pivot")
    corners = np.concatenate([
        _world_aabb_corners(container, pose_t),
        _world_aabb_corners(container, pose_t1),
    ])
    dx = params.dx
    lo = corners.min(axis=0) - 3.0 * dx
    hi = corners.max(axis=0) + 3.0 * dx
    dims = tuple(np.maximum(np.ceil((hi - lo) / dx).astype(np.int64), 4))

    omega_frame = angular_velocity(pose_t, pose_t1, params.dt)
    r_max = float(np.linalg.norm(corners - np.asarray(pose_t.pivot), axis=1).max())
    speed = float(np.linalg.norm(particles.velocities, axis=1).max()) if particles.count else 0.0
    g_mag = float(np.linalg.norm(params.gravity))
    vmax = speed + g_mag * params.dt + float(np.linalg.norm(omega_frame)) * r_max
    n_sub = int(np.ceil(params.dt * vmax / (params.cfl * dx))) if vmax > 0 else 1
    n_sub = max(1, min(n_sub, params.max_substeps))

    if stats is not None:
        stats["substeps"] = stats.get("substeps", 0) + n_sub
    state = particles.copy()
    dts = params.dt / n_sub
    for s in range(n_sub):
        pa = _lerp_pose(pose_t, pose_t1, s / n_sub)
        pb = _lerp_pose(pose_t, pose_t1, (s + 1) / n_sub)
        try:
            state = _substep(state, container, pa, pb, dts, params, lo, dims,
                             stats=stats)
        except NonConverged:
            raise
        if not (np.isfinite(state.positions).all()
                and np.isfinite(state.velocities).all()):
            raise NumericalBlowup(frame=frame_index, substep=s)
    return state


def measure_surface_tilt(particles: ParticleSet, pose: RigidPose):
    """Fit a plane to the top tenth of particles; compare with the wall axis.

    Returns (unit upward surface normal, angle in degrees between the fitted
    plane and the pose-rotated container +Z direction).
    """
    n = particles.count
    if n < 50:
        raise InsufficientParticles(f"need >= 50 particles, have {n}")
    pos = particles.positions
    k = max(int(np.ceil(0.1 * n)), 3)
    top = pos[np.argsort(pos[:, 2])[-k:]]
    # Plane z = a x + b y + c in least squares.
    A = np.column_stack([top[:, 0], top[:, 1], np.ones(len(top))])
    coef, *_ = np.linalg.lstsq(A, top[:, 2], rcond=None)
    a, b, _c = coef
    normal = np.array([-a, -b, 1.0])
    normal /= np.linalg.norm(normal)
    wall_dir = pose.rotate_direction(np.array([0.0, 0.0, 1.0]))
    s = abs(float(np.dot(normal, wall_dir)))
    wall_angle = float(np.degrees(np.arcsin(min(max(s, 0.0), 1.0))))
    return normal, wall_angle
