import numpy as np
import pytest

from liquidlab.errors import FrameOutOfRange
from liquidlab.render import VIEW_LABELS
from liquidlab.scene import (DEFAULT_FRAME_COUNT, LIQUID_COLORS,
                             ROTATION_MODES, RotationSchedule, SceneConfig,
                             config_with, make_config, run_sequence)
from liquidlab.sim import SimParams

ENDPOINTS = {
    "R1": (80.0, 0.0, 0.0),
    "R2": (80.0, 80.0, 0.0),
    "R3": (40.0, 50.0, 80.0),
    "R4": (30.0, 40.0, 60.0),
    "R5": (80.0, 40.0, 20.0),
    "R6": (0.0, 80.0, 60.0),
}


def test_all_modes_share_frame_grid():
    assert set(ROTATION_MODES) == set(ENDPOINTS)
    for mode, end in ENDPOINTS.items():
        sched = RotationSchedule(mode)
        assert sched.frame_count == DEFAULT_FRAME_COUNT == 81
        assert sched.rotation_at_frame(0) == (0.0, 0.0, 0.0)
        assert sched.rotation_at_frame(80) == end


def test_schedule_linear():
    sched = RotationSchedule("R3")  # (40, 50, 80) over 81 frames
    assert sched.rotation_at_frame(40) == pytest.approx((20.0, 25.0, 40.0))
    angles = np.array([sched.rotation_at_frame(t) for t in range(81)])
    steps = np.diff(angles, axis=0)
    assert np.allclose(steps, steps[0])


def test_schedule_bounds():
    sched = RotationSchedule("R1", frame_count=5)
    with pytest.raises(FrameOutOfRange):
        sched.rotation_at_frame(-1)
    with pytest.raises(FrameOutOfRange):
        sched.rotation_at_frame(5)
    with pytest.raises(ValueError):
        RotationSchedule("R9")
    with pytest.raises(ValueError):
        RotationSchedule("R1", frame_count=0)


def test_single_frame_schedule():
    sched = RotationSchedule("R2", ranges=((10.0, 50.0), (5.0, 9.0), (0.0, 0.0)),
                             frame_count=1)
    assert sched.rotation_at_frame(0) == (10.0, 5.0, 0.0)


def test_pose_carries_pivot():
    sched = RotationSchedule("R1", pivot=(0.01, 0.02, 0.03))
    pose = sched.pose_at_frame(80)
    assert tuple(pose.angles_deg) == (80.0, 0.0, 0.0)
    assert tuple(pose.pivot) == (0.01, 0.02, 0.03)


def test_config_validation():
    sched = RotationSchedule("R1", frame_count=3)
    good = SceneConfig("cube-bottle-S", 1e-5, sched)
    assert good.container.name == "cube-bottle-S"
    assert good.color in LIQUID_COLORS
    # default reconstruction kernel follows the particle radius
    assert good.surface.r_k == pytest.approx(2.0 * good.sim.particle_radius)
    with pytest.raises(ValueError):
        SceneConfig("cube-bottle-S", 0.0, sched)
    with pytest.raises(ValueError):
        SceneConfig("cube-bottle-S", 1e-5, sched, color="chartreuse")
    with pytest.raises(ValueError):
        SceneConfig("cube-bottle-S", 1e-5, sched, lighting="L9")
    with pytest.raises(ValueError):
        SceneConfig("cube-bottle-S", 1e-5, sched, scene_tag="Lab9")
    with pytest.raises(ValueError):
        SceneConfig("cube-bottle-S", 1e-5, sched, resolution=0)


def test_make_config_defaults():
    cfg = make_config("cube-bottle-L", "R2", fill_fraction=0.4, frame_count=7,
                      seed=3)
    assert cfg.schedule.mode == "R2"
    assert cfg.schedule.frame_count == 7
    assert cfg.sim.seed == 3
    # pivot sits at the cavity centroid (origin-centered box)
    assert np.allclose(cfg.schedule.pivot, 0.0, atol=1e-3)
    # ~12 cells across the smallest cavity extent
    assert cfg.sim.dx == pytest.approx(0.08 / 12.0)
    assert cfg.fill_volume == pytest.approx(0.4 * 0.08**3, rel=0.02)
    with pytest.raises(ValueError):
        make_config("cube-bottle-L", "R1", fill_fraction=0.0)
    with pytest.raises(ValueError):
        make_config("cube-bottle-L", "R1", fill_fraction=1.5)


def test_config_with_override():
    cfg = make_config(frame_count=2)
    other = config_with(cfg, sequence_id="seq9")
    assert other.sequence_id == "seq9"
    assert other.container is cfg.container
    assert cfg.sequence_id == "seq0"


def test_run_sequence_small():
    cfg = make_config("cube-bottle-S", "R1", fill_fraction=0.3, frame_count=3,
                      seed=1, resolution=64)
    stats = {}
    records = run_sequence(cfg, stats=stats)
    assert [r.index for r in records] == [0, 1, 2]
    assert records[0].angles_deg == (0.0, 0.0, 0.0)
    assert records[2].angles_deg == pytest.approx((80.0, 0.0, 0.0))
    for rec in records:
        assert rec.mesh.is_watertight()
        assert set(rec.masks) == set(VIEW_LABELS)
        assert all(m.pixels.shape == (64, 64) for m in rec.masks.values())
        assert any(m.pixels.any() for m in rec.masks.values())
        # reconstructed volume tracks the seeded particle volume
        target = rec.stats["total_particle_volume"]
        assert abs(rec.mesh_volume - target) / target < 0.10
        assert all(d > 0 for d in rec.aabb_dims)
    assert stats["max_divergence"] <= cfg.sim.pressure_tol
    assert stats["substeps"] >= 2
    assert stats["max_pressure_iters"] >= 1


def test_rig_is_fixed_across_frames():
    from liquidlab.scene import iter_sequence
    cfg = make_config("cube-bottle-S", "R1", fill_fraction=0.3, frame_count=2,
                      seed=1, resolution=32)
    rigs = [rig for _rec, rig in iter_sequence(cfg)]
    assert rigs[0] is rigs[1]
    cam = rigs[0]["front"]
    # extent frames the swept container with a 1.2x margin; under an 80 degree
    # x-rotation the widest union dimension is 0.05 * (cos 80 + sin 80)
    a = np.radians(80.0)
    expect = 1.2 * 0.05 * (np.cos(a) + np.sin(a))
    assert cam.extent[0] == pytest.approx(expect, rel=1e-6)
    assert cam.resolution == (32, 32)
