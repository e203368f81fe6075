"""Analytic signed-distance shapes for container cavities.

Convention: distance < 0 inside the shape. All shapes are defined in a
local frame (offsets compose shapes); world-space queries go through a
RigidPose. Evaluation is vectorized over (n, 3) point arrays.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


class SdfShape:
    """Base signed-distance shape; negative inside."""

    offset: np.ndarray

    def distance_local(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return self.distance_local(pts - self.offset)

    def distance_world(self, points, pose) -> np.ndarray:
        """Distance for world points to the shape posed by ``pose``."""
        return self.distance(pose.apply_inverse(np.atleast_2d(points)))

    def aabb_local(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def aabb(self) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self.aabb_local()
        return lo + self.offset, hi + self.offset

    def gradient(self, points, h=1e-6) -> np.ndarray:
        """Central-difference gradient; near-unit for exact distance fields."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        grad = np.empty_like(pts)
        for axis in range(3):
            step = np.zeros(3)
            step[axis] = h
            grad[:, axis] = (self.distance(pts + step) - self.distance(pts - step)) / (
                2 * h
            )
        return grad

    def gradient_world(self, points, pose, h=1e-6) -> np.ndarray:
        """World-frame gradient of the posed shape."""
        local = self.gradient(pose.apply_inverse(np.atleast_2d(points)), h=h)
        return local @ pose.matrix.T


def _as_offset(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64).reshape(3)


@dataclass
class BoxSdf(SdfShape):
    """Axis-aligned box given by full extents (meters)."""

    size: Tuple[float, float, float]
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.size = tuple(float(s) for s in self.size)
        self.offset = _as_offset(self.offset)

    def distance_local(self, pts):
        half = np.asarray(self.size) / 2.0
        q = np.abs(pts) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        return outside + inside

    def aabb_local(self):
        half = np.asarray(self.size) / 2.0
        return -half, half


@dataclass
class SphereSdf(SdfShape):
    radius: float
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.radius = float(self.radius)
        self.offset = _as_offset(self.offset)

    def distance_local(self, pts):
        return np.linalg.norm(pts, axis=1) - self.radius

    def aabb_local(self):
        r = np.full(3, self.radius)
        return -r, r


@dataclass
class CylinderSdf(SdfShape):
    """Capped cylinder along local +Z."""

    radius: float
    height: float
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.radius = float(self.radius)
        self.height = float(self.height)
        self.offset = _as_offset(self.offset)

    def distance_local(self, pts):
        dr = np.hypot(pts[:, 0], pts[:, 1]) - self.radius
        dz = np.abs(pts[:, 2]) - self.height / 2.0
        d = np.stack([dr, dz], axis=1)
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=1)
        inside = np.minimum(np.maximum(dr, dz), 0.0)
        return outside + inside

    def aabb_local(self):
        return (
            np.array([-self.radius, -self.radius, -self.height / 2]),
            np.array([self.radius, self.radius, self.height / 2]),
        )


@dataclass
class ConeSdf(SdfShape):
    """Capped (truncated) cone along local +Z: r_base at -h/2, r_top at +h/2."""

    r_base: float
    r_top: float
    height: float
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.r_base = float(self.r_base)
        self.r_top = float(self.r_top)
        self.height = float(self.height)
        self.offset = _as_offset(self.offset)

    def distance_local(self, pts):
        h = self.height / 2.0
        r1, r2 = self.r_base, self.r_top
        qx = np.hypot(pts[:, 0], pts[:, 1])
        qy = pts[:, 2]
        # exact capped-cone distance in the (radial, axial) half-plane
        k1 = np.array([r2, h])
        k2 = np.array([r2 - r1, 2.0 * h])
        cap_r = np.where(qy < 0.0, r1, r2)
        ca_x = qx - np.minimum(qx, cap_r)
        ca_y = np.abs(qy) - h
        t = np.clip(
            ((k1[0] - qx) * k2[0] + (k1[1] - qy) * k2[1]) / (k2 @ k2), 0.0, 1.0
        )
        cb_x = qx - k1[0] + k2[0] * t
        cb_y = qy - k1[1] + k2[1] * t
        s = np.where((cb_x < 0.0) & (ca_y < 0.0), -1.0, 1.0)
        d2 = np.minimum(ca_x**2 + ca_y**2, cb_x**2 + cb_y**2)
        return s * np.sqrt(d2)

    def aabb_local(self):
        r = max(self.r_base, self.r_top)
        return (
            np.array([-r, -r, -self.height / 2]),
            np.array([r, r, self.height / 2]),
        )


@dataclass
class UnionSdf(SdfShape):
    """Union of sub-shapes (min of distances)."""

    shapes: Tuple[SdfShape, ...]
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.shapes = tuple(self.shapes)
        self.offset = _as_offset(self.offset)

    def distance_local(self, pts):
        return np.min([s.distance(pts) for s in self.shapes], axis=0)

    def aabb_local(self):
        los, his = zip(*(s.aabb() for s in self.shapes))
        return np.min(los, axis=0), np.max(his, axis=0)


@dataclass
class IntersectionSdf(SdfShape):
    """Intersection of sub-shapes (max of distances)."""

    shapes: Tuple[SdfShape, ...]
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.shapes = tuple(self.shapes)
        self.offset = _as_offset(self.offset)

    def distance_local(self, pts):
        return np.max([s.distance(pts) for s in self.shapes], axis=0)

    def aabb_local(self):
        los, his = zip(*(s.aabb() for s in self.shapes))
        return np.max(los, axis=0), np.min(his, axis=0)


def shape_volume_voxel(shape: SdfShape, dx: float) -> float:
    """Volume estimate: count of cell centers with distance < 0 times dx^3."""
    lo, hi = shape.aabb()
    dims = np.maximum(np.ceil((hi - lo) / dx).astype(int), 1)
    centers = _cell_centers(lo, dims, dx)
    inside = shape.distance(centers) < 0.0
    return float(np.count_nonzero(inside)) * dx**3


def _cell_centers(origin, dims, dx) -> np.ndarray:
    """(nx*ny*nz, 3) cell-center positions for a grid at origin."""
    ax = [origin[i] + (np.arange(dims[i]) + 0.5) * dx for i in range(3)]
    gx, gy, gz = np.meshgrid(*ax, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
