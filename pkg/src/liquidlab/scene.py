"""Sequence driver: rotation schedules, scene configs, per-frame records."""

from dataclasses import dataclass, field, replace

import numpy as np

from .containers import ContainerSpec, cavity_centroid, cavity_sdf, get_container
from .errors import FrameOutOfRange
from .mesh import TriMesh, mesh_aabb_dims, mesh_volume
from .render import default_rig, render_rig
from .sim import SimParams, seed_particles, simulate_step
from .surface import SurfaceParams, extract_surface
from .transforms import RigidPose

# Per-axis (start, end) degrees over the sequence. Z-only motion is absent by
# design: such spins leave an upright liquid surface unchanged.
ROTATION_MODES = {
    "R1": ((0.0, 80.0), (0.0, 0.0), (0.0, 0.0)),
    "R2": ((0.0, 80.0), (0.0, 80.0), (0.0, 0.0)),
    "R3": ((0.0, 40.0), (0.0, 50.0), (0.0, 80.0)),
    "R4": ((0.0, 30.0), (0.0, 40.0), (0.0, 60.0)),
    "R5": ((0.0, 80.0), (0.0, 40.0), (0.0, 20.0)),
    "R6": ((0.0, 0.0), (0.0, 80.0), (0.0, 60.0)),
}

LIQUID_COLORS = ("colorless", "purple", "red", "orange", "yellow")
LIGHTING_TAGS = tuple(f"L{i}" for i in range(1, 9))
SCENE_TAGS = tuple(f"Lab{i}" for i in range(1, 6))

DEFAULT_FRAME_COUNT = 81


@dataclass
class RotationSchedule:
    mode: str
    ranges: tuple = ()
    frame_count: int = DEFAULT_FRAME_COUNT
    pivot: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.mode not in ROTATION_MODES:
            raise ValueError(f"unknown rotation mode {self.mode!r}")
        if not self.ranges:
            self.ranges = ROTATION_MODES[self.mode]
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")

    def rotation_at_frame(self, t: int):
        """Linear per-axis angle triple (degrees) at frame t."""
        if not 0 <= t < self.frame_count:
            raise FrameOutOfRange(
                f"frame {t} outside [0, {self.frame_count})"
            )
        if self.frame_count == 1:
            return tuple(r[0] for r in self.ranges)
        a = t / (self.frame_count - 1)
        return tuple(r[0] + (r[1] - r[0]) * a for r in self.ranges)

    def pose_at_frame(self, t: int) -> RigidPose:
        return RigidPose(self.rotation_at_frame(t), tuple(self.pivot))


@dataclass
class SceneConfig:
    container: ContainerSpec
    fill_volume: float
    schedule: RotationSchedule
    sim: SimParams = field(default_factory=SimParams)
    surface: SurfaceParams = None
    color: str = "colorless"
    lighting: str = "L1"
    scene_tag: str = "Lab1"
    tabletop: str = "matte-gray"
    resolution: int = 512
    camera_distance: float = 0.5
    sequence_id: str = "seq0"

    def __post_init__(self):
        if isinstance(self.container, str):
            self.container = get_container(self.container)
        if self.fill_volume <= 0:
            raise ValueError("fill_volume must be positive")
        if self.color not in LIQUID_COLORS:
            raise ValueError(f"liquid color {self.color!r} not in {LIQUID_COLORS}")
        if self.lighting not in LIGHTING_TAGS:
            raise ValueError(f"lighting {self.lighting!r} not in L1..L8")
        if self.scene_tag not in SCENE_TAGS:
            raise ValueError(f"scene {self.scene_tag!r} not in Lab1..Lab5")
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        if self.surface is None:
            self.surface = SurfaceParams(r_k=2.0 * self.sim.particle_radius)


@dataclass
class FrameRecord:
    index: int
    pose: RigidPose
    angles_deg: tuple
    mesh: TriMesh
    masks: dict
    aabb_dims: tuple  # (x, y, z) extents in meters
    mesh_volume: float
    substeps: int = 0
    stats: dict = field(default_factory=dict)


def make_config(container="cube-flask", mode="R1", fill_fraction=0.5,
                frame_count=DEFAULT_FRAME_COUNT, seed=0, **kw) -> SceneConfig:
    """Convenience preset builder: fill as a fraction of cavity capacity and
    a simulation grid scaled to the container size."""
    from .containers import cavity_volume

    spec = get_container(container) if isinstance(container, str) else container
    if not 0.0 < fill_fraction <= 1.0:
        raise ValueError("fill_fraction must lie in (0, 1]")
    cap = cavity_volume(spec)
    lo, hi = cavity_sdf(spec).aabb()
    # ~12 cells across the smallest cavity extent, capped for tiny tubes.
    dx = float(min((hi - lo).min() / 12.0, 0.0125))
    sim = kw.pop("sim", None) or SimParams(dx=dx, seed=seed)
    pivot = tuple(cavity_centroid(spec))
    sched = RotationSchedule(mode=mode, frame_count=frame_count, pivot=pivot)
    return SceneConfig(container=spec, fill_volume=fill_fraction * cap,
                       schedule=sched, sim=sim, **kw)


def iter_sequence(config: SceneConfig, stats=None):
    """Yield FrameRecords in frame order (the streaming form of run_sequence).

    A ``stats`` dict, if given, accumulates solver statistics for the whole
    sequence (max post-projection divergence, total substeps).
    """
    spec = config.container
    container = cavity_sdf(spec)
    sched = config.schedule
    pose0 = sched.pose_at_frame(0)
    particles = seed_particles(container, pose0, config.fill_volume, config.sim)

    # One fixed rig for the whole sequence: framed on the union of the
    # container's world AABBs over every frame pose.
    corners = []
    lo, hi = container.aabb()
    box = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
                    for z in (lo[2], hi[2])])
    for t in range(sched.frame_count):
        corners.append(sched.pose_at_frame(t).apply(box))
    corners = np.concatenate(corners)
    scene_lo, scene_hi = corners.min(axis=0), corners.max(axis=0)
    center = (scene_lo + scene_hi) / 2.0
    extent = 1.2 * float((scene_hi - scene_lo).max())
    rig = default_rig(center=center, extent=extent,
                      resolution=config.resolution,
                      distance=config.camera_distance)

    for t in range(sched.frame_count):
        pose_t = sched.pose_at_frame(t)
        mesh = extract_surface(particles.positions, config.surface)
        masks = render_rig(mesh, rig)
        record = FrameRecord(
            index=t,
            pose=pose_t,
            angles_deg=sched.rotation_at_frame(t),
            mesh=mesh,
            masks=masks,
            aabb_dims=mesh_aabb_dims(mesh),
            mesh_volume=mesh_volume(mesh),
            stats={"particles": particles.count,
                   "total_particle_volume": particles.total_volume},
        )
        yield record, rig
        if t + 1 < sched.frame_count:
            particles = simulate_step(
                particles, container, pose_t, sched.pose_at_frame(t + 1),
                config.sim, frame_index=t, stats=stats,
            )


def run_sequence(config: SceneConfig, stats=None):
    """All FrameRecords of the sequence, frame-ordered."""
    return [rec for rec, _rig in iter_sequence(config, stats=stats)]


def config_with(config: SceneConfig, **overrides) -> SceneConfig:
    return replace(config, **overrides)
