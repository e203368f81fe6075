"""Incompressible FLIP/PIC liquid solver with a moving rigid container."""

from .params import SimParams
from .flip import (
    MacGrid,
    ParticleSet,
    measure_surface_tilt,
    pressure_project,
    seed_particles,
    simulate_step,
)

__all__ = [
    "SimParams",
    "MacGrid",
    "ParticleSet",
    "seed_particles",
    "pressure_project",
    "simulate_step",
    "measure_surface_tilt",
]
