"""Rigid transforms: Euler rotations about a pivot point.

Angles are degrees about the world X, Y, Z axes, applied in that fixed
order (R = Rz @ Ry @ Rx). Points are numpy arrays of shape (3,) or (n, 3),
in meters.
"""

from dataclasses import dataclass, field

import numpy as np


def rotation_matrix(angles_deg) -> np.ndarray:
    """3x3 rotation for Euler angles (degrees), X applied first, then Y, then Z."""
    ax, ay, az = np.radians(np.asarray(angles_deg, dtype=np.float64))
    cx, sx = np.cos(ax), np.sin(ax)
    cy, sy = np.cos(ay), np.sin(ay)
    cz, sz = np.cos(az), np.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


@dataclass(frozen=True)
class RigidPose:
    """Rotation (Euler degrees, X->Y->Z order) about a pivot point (meters)."""

    angles_deg: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pivot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(
            self, "angles_deg", np.asarray(self.angles_deg, dtype=np.float64)
        )
        object.__setattr__(self, "pivot", np.asarray(self.pivot, dtype=np.float64))

    @property
    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.angles_deg)

    def apply(self, points) -> np.ndarray:
        """Rotate points about the pivot: p -> R (p - pivot) + pivot."""
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.pivot) @ self.matrix.T + self.pivot

    def apply_inverse(self, points) -> np.ndarray:
        """World points back into the container's local frame."""
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.pivot) @ self.matrix + self.pivot

    def rotate_direction(self, direction) -> np.ndarray:
        """Rotate a direction vector (ignores the pivot)."""
        return self.matrix @ np.asarray(direction, dtype=np.float64)

    def is_identity(self) -> bool:
        return bool(np.all(self.angles_deg == 0.0))


def angular_velocity(pose_a: RigidPose, pose_b: RigidPose, dt: float) -> np.ndarray:
    """World-frame angular velocity (rad/s) taking pose_a to pose_b over dt.

    Both poses must share the pivot; the pivot itself does not move, so the
    rigid velocity field is w x (x - pivot).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    r_rel = pose_b.matrix @ pose_a.matrix.T
    # angle-axis of the relative rotation
    cos_theta = (np.trace(r_rel) - 1.0) * 0.5
    cos_theta = min(1.0, max(-1.0, cos_theta))
    theta = np.arccos(cos_theta)
    if theta < 1e-12:
        return np.zeros(3)
    axis = np.array(
        [
            r_rel[2, 1] - r_rel[1, 2],
            r_rel[0, 2] - r_rel[2, 0],
            r_rel[1, 0] - r_rel[0, 1],
        ]
    )
    norm = np.linalg.norm(axis)
    if norm < 1e-15:
        # theta ~ pi; never reached by the <=80 degree per-frame schedules
        return np.zeros(3)
    return axis / norm * (theta / dt)


def rigid_velocity(points, omega, pivot) -> np.ndarray:
    """Velocity of rigid-body points rotating at omega (rad/s) about pivot."""
    pts = np.asarray(points, dtype=np.float64)
    return np.cross(np.broadcast_to(omega, pts.shape), pts - pivot)
