"""Simulation parameters."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SimParams:
    """Grid, time stepping, material and solver settings.

    ``dt`` is the duration of one output frame; internally each frame is
    substepped so material moves at most ``cfl`` cells per substep.
    """

    dx: float = 0.0125
    dt: float = 1.0 / 24.0
    cfl: float = 1.0
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    viscosity: float = 1e-6
    density: float = 1000.0
    flip_ratio: float = 0.95
    particle_radius: float = 0.0  # 0 -> dx / 4
    max_particles: int = 2_000_000
    pressure_tol: float = 1e-4
    pressure_max_iter: int = 400
    max_substeps: int = 40
    seed: int = 0

    def __post_init__(self):
        self.gravity = np.asarray(self.gravity, dtype=np.float64).reshape(3)
        if self.particle_radius <= 0.0:
            self.particle_radius = self.dx / 4.0
        if self.dx <= 0 or self.dt <= 0:
            raise ValueError("dx and dt must be positive")
        if not 0.0 <= self.flip_ratio <= 1.0:
            raise ValueError("flip_ratio must be in [0, 1]")
        if not 0.0 < self.particle_radius < self.dx:
            raise ValueError("particle_radius must lie in (0, dx)")
        if self.max_particles <= 0:
            raise ValueError("max_particles must be positive")
        if self.cfl <= 0:
            raise ValueError("cfl must be positive")
        if self.pressure_tol <= 0 or self.pressure_max_iter < 1:
            raise ValueError("invalid pressure solver settings")

    @property
    def particle_volume(self) -> float:
        """Volume carried by one particle (8 particles fill one cell)."""
        return self.dx**3 / 8.0
