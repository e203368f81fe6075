"""End-to-end acceptance suite: one test per release criterion.

Each test checks one criterion at its stated tolerance; the terminal summary
hook in conftest.py prints one [PASS]/[FAIL] line per criterion at the end of
the run.
"""

import hashlib
import json
import time

import numpy as np
import pytest

from liquidlab.cli import main
from liquidlab.containers import (cavity_centroid, cavity_sdf, cavity_volume,
                                  get_container)
from liquidlab.dataset import (read_mask, read_obj, split_dataset, write_mask,
                               write_obj)
from liquidlab.mesh import TriMesh, box_mesh, icosphere
from liquidlab.metrics import (chamfer_distance, f_score, mask_iou,
                               sample_surface, scaling_factor, volume_iou)
from liquidlab.render import MaskImage
from liquidlab.scene import ROTATION_MODES, RotationSchedule, make_config, run_sequence
from liquidlab.sim.flip import measure_surface_tilt, seed_particles, simulate_step
from liquidlab.sim.params import SimParams
from liquidlab.transforms import RigidPose


def _translated(mesh, offset):
    return TriMesh(mesh.vertices + np.asarray(offset, dtype=np.float64),
                   mesh.faces)


# ---------------------------------------------------------------------------
# 1. Incompressibility: for every frame of a 32^3-grid, 9-frame run of each
#    mode R1-R6, post-projection max fluid-cell divergence <= 1e-4 1/s.
#    Runtime <= 2 min total.


def test_criterion_01_incompressibility_all_modes():
    spec = get_container("cube-bottle-L")
    cavity = cavity_sdf(spec)
    # dx such that the padded rest-pose MAC grid is exactly 32^3:
    # 26 interior cells across the 0.08 m cavity plus 3 ghost cells per side.
    dx = float(np.nextafter(0.08 / 26.0, np.inf))
    assert int(np.ceil((0.08 + 6.0 * dx) / dx)) == 32

    params = SimParams(dx=dx, seed=3)
    pivot = tuple(cavity_centroid(spec))
    pose0 = RigidPose((0.0, 0.0, 0.0), pivot)
    fill = 0.30 * cavity_volume(spec)
    seeded = seed_particles(cavity, pose0, fill, params)

    # Prime the jit kernels on a one-frame throwaway run before timing.
    warm = seed_particles(cavity, pose0, 0.02 * cavity_volume(spec), params)
    simulate_step(warm, cavity, pose0, pose0, params)

    t0 = time.monotonic()
    divergence = {}
    for mode in sorted(ROTATION_MODES):
        sched = RotationSchedule(mode=mode, frame_count=9, pivot=pivot)
        state = seeded.copy()
        stats = {}
        for t in range(8):
            state = simulate_step(state, cavity, sched.pose_at_frame(t),
                                  sched.pose_at_frame(t + 1), params,
                                  frame_index=t, stats=stats)
        divergence[mode] = stats["max_divergence"]
    elapsed = time.monotonic() - t0

    for mode in sorted(ROTATION_MODES):
        assert divergence[mode] <= 1e-4, (
            f"{mode}: max divergence {divergence[mode]:.3e} > 1e-4")
    assert elapsed <= 120.0, f"six 9-frame runs took {elapsed:.1f} s > 120 s"


# ---------------------------------------------------------------------------
# 2. Volume accounting: particle count exactly constant over a sequence, and
#    extracted-mesh volume within +/-10% of count * particle_volume at every
#    frame (default surface resolution).


def test_criterion_02_volume_accounting():
    cfg = make_config("cube-bottle-S", mode="R3", fill_fraction=0.4,
                      frame_count=9, seed=5, resolution=16)
    records = run_sequence(cfg)
    assert len(records) == 9
    count0 = records[0].stats["particles"]
    pv = cfg.sim.particle_volume
    for rec in records:
        assert rec.stats["particles"] == count0
        assert rec.mesh_volume == pytest.approx(count0 * pv, rel=0.10), (
            f"frame {rec.index}: mesh volume {rec.mesh_volume:.3e} vs "
            f"particle volume {count0 * pv:.3e}")


# ---------------------------------------------------------------------------
# 3. Hydrostatic rest: zero-rotation run, 60 frames: final mean particle
#    speed < 0.01 m/s and free-surface normal within 1 degree of vertical.


def test_criterion_03_hydrostatic_rest():
    cfg = make_config("cube-bottle-S", fill_fraction=0.4, frame_count=60,
                      seed=2)
    sched = RotationSchedule("R1", ranges=((0.0, 0.0),) * 3, frame_count=60,
                             pivot=cfg.schedule.pivot)
    cavity = cavity_sdf(cfg.container)
    state = seed_particles(cavity, sched.pose_at_frame(0), cfg.fill_volume,
                           cfg.sim)
    for t in range(59):
        state = simulate_step(state, cavity, sched.pose_at_frame(t),
                              sched.pose_at_frame(t + 1), cfg.sim,
                              frame_index=t)
    mean_speed = float(np.linalg.norm(state.velocities, axis=1).mean())
    normal, _ = measure_surface_tilt(state, sched.pose_at_frame(59))
    tilt_deg = float(np.degrees(np.arccos(np.clip(normal[2], -1.0, 1.0))))
    assert mean_speed < 0.01, f"mean speed {mean_speed:.4f} m/s"
    assert tilt_deg < 1.0, f"surface normal {tilt_deg:.2f} deg off vertical"


# ---------------------------------------------------------------------------
# 4. Tilt equilibrium: quasi-static 30-degree X-tilt settles to a wall angle
#    of 60 +/- 5 degrees.


def test_criterion_04_tilt_equilibrium():
    cfg = make_config("cube-bottle-S", fill_fraction=0.4, seed=6)
    cavity = cavity_sdf(cfg.container)
    pivot = cfg.schedule.pivot
    ramp = RotationSchedule("R1", ranges=((0.0, 30.0), (0.0, 0.0), (0.0, 0.0)),
                            frame_count=49, pivot=pivot)
    state = seed_particles(cavity, ramp.pose_at_frame(0), cfg.fill_volume,
                           cfg.sim)
    for t in range(48):
        state = simulate_step(state, cavity, ramp.pose_at_frame(t),
                              ramp.pose_at_frame(t + 1), cfg.sim,
                              frame_index=t)
    pose30 = ramp.pose_at_frame(48)
    for t in range(48, 72):
        state = simulate_step(state, cavity, pose30, pose30, cfg.sim,
                              frame_index=t)
    _normal, wall_angle = measure_surface_tilt(state, pose30)
    assert wall_angle == pytest.approx(60.0, abs=5.0), (
        f"settled wall angle {wall_angle:.1f} deg, expected 60 +/- 5")


# ---------------------------------------------------------------------------
# 5. Dataset completeness: C=2 sequences x F=9 frames yields exactly 18
#    meshes, 108 masks and 18 metadata files; linear extrapolation documents
#    the full-scale count (8,100 meshes at 100 sequences x 81 frames).


def test_criterion_05_dataset_completeness(tmp_path):
    doc = {"sequences": [
        {"id": "a", "container": "cube-bottle-S",
         "liquid": {"fill_fraction": 0.3},
         "rotation": {"mode": "R1", "frames": 9},
         "camera": {"resolution": 32}},
        {"id": "b", "container": "cube-bottle-S",
         "liquid": {"fill_fraction": 0.3},
         "rotation": {"mode": "R4", "frames": 9},
         "camera": {"resolution": 32}},
    ]}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(doc))
    out = tmp_path / "data"
    assert main(["generate", "--config", str(cfg_path),
                 "--out", str(out)]) == 0

    meshes = sorted(out.rglob("liquid.obj"))
    masks = sorted(out.rglob("mask_*.pgm"))
    metas = sorted(out.rglob("meta.json"))
    assert len(meshes) == 18
    assert len(masks) == 108
    assert len(metas) == 18

    # Outputs scale linearly in sequences x frames: 6 masks and one
    # mesh+metadata pair per frame, so the full 100 x 81 production run
    # yields 8,100 meshes and 48,600 masks.
    per_frame_masks = len(masks) // len(meshes)
    assert len(meshes) == 2 * 9
    assert per_frame_masks == 6
    full_meshes = 100 * 81
    assert full_meshes == 8100
    print(f"extrapolation: {len(meshes)} meshes at C=2, F=9 -> "
          f"{full_meshes} meshes and {per_frame_masks * full_meshes} masks "
          f"at C=100, F=81")


# ---------------------------------------------------------------------------
# 6. Rotation endpoints: with the default 81-frame schedule every mode starts
#    at (0, 0, 0) and frame 80 hits its endpoint triple exactly.


def test_criterion_06_rotation_endpoints():
    endpoints = {
        "R1": (80.0, 0.0, 0.0),
        "R2": (80.0, 80.0, 0.0),
        "R3": (40.0, 50.0, 80.0),
        "R4": (30.0, 40.0, 60.0),
        "R5": (80.0, 40.0, 20.0),
        "R6": (0.0, 80.0, 60.0),
    }
    assert set(endpoints) == set(ROTATION_MODES)
    for mode, end in endpoints.items():
        sched = RotationSchedule(mode=mode, frame_count=81)
        assert sched.rotation_at_frame(0) == (0.0, 0.0, 0.0)
        assert sched.rotation_at_frame(80) == end
        assert tuple(r[1] for r in sched.ranges) == end


# ---------------------------------------------------------------------------
# 7. Metric sanity: analytic oracles for every metric, and kd-tree metrics
#    agree with brute-force evaluation. Runtime <= 30 s.


def test_criterion_07_metric_sanity():
    t0 = time.monotonic()

    # mask IoU of two 10x10 squares overlapping by half: 50 / 150 == 1/3.
    a = np.zeros((32, 32), dtype=bool)
    b = np.zeros((32, 32), dtype=bool)
    a[4:14, 4:14] = True
    b[9:19, 4:14] = True
    assert mask_iou(a, b) == 1.0 / 3.0

    # volume IoU of unit cubes overlapping by half: 0.5 / 1.5, res 64.
    cube = box_mesh((1.0, 1.0, 1.0))
    shifted = _translated(cube, (0.5, 0.0, 0.0))
    assert volume_iou(cube, shifted, res=64) == pytest.approx(1.0 / 3.0,
                                                              abs=0.02)

    # chamfer of two parallel unit plates equals their separation within 5%.
    def plate(z):
        verts = np.array([[0.0, 0.0, z], [1.0, 0.0, z],
                          [1.0, 1.0, z], [0.0, 1.0, z]])
        return TriMesh(verts, np.array([[0, 1, 2], [0, 2, 3]]))

    sep = 0.01
    assert chamfer_distance(plate(0.0), plate(sep),
                            n=2000) == pytest.approx(sep, rel=0.05)

    # f-score of identical meshes is exactly 100.
    blob = icosphere(0.3, subdivisions=2)
    twin = TriMesh(blob.vertices.copy(), blob.faces.copy())
    assert f_score(blob, twin, tau=1e-9) == 100.0

    # kd-tree chamfer and f-score match an all-pairs brute-force oracle.
    other = _translated(blob, (0.05, 0.0, 0.0))
    pa = sample_surface(blob, 300, seed=0)
    pb = sample_surface(other, 300, seed=0)
    dist = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
    brute_cd = 0.5 * float(dist.min(axis=1).mean()) \
        + 0.5 * float(dist.min(axis=0).mean())
    assert chamfer_distance(blob, other, n=300) == pytest.approx(brute_cd,
                                                                 abs=1e-12)
    tau = 0.03
    precision = float((dist.min(axis=1) <= tau).mean())
    recall = float((dist.min(axis=0) <= tau).mean())
    brute_f = (0.0 if precision + recall == 0.0
               else 2.0 * precision * recall / (precision + recall) * 100.0)
    assert f_score(blob, other, tau=tau, n=300) == pytest.approx(brute_f,
                                                                 abs=1e-9)

    elapsed = time.monotonic() - t0
    assert elapsed <= 30.0, f"metric oracles took {elapsed:.1f} s > 30 s"


# ---------------------------------------------------------------------------
# 8. Scaling factor: exact on analytic dimension triples, and applying the
#    factor equalizes geometric-mean extents to machine precision.


def test_criterion_08_scaling_factor():
    assert scaling_factor((0.1, 0.2, 0.3), (0.1, 0.2, 0.3)) == 1.0
    assert scaling_factor((0.02, 0.02, 0.02), (1.0, 1.0, 1.0)) == 0.02
    assert scaling_factor((0.04, 0.02, 0.01), (2.0, 1.0, 0.5)) == 0.02

    rng = np.random.default_rng(11)
    for _ in range(20):
        v_dims = rng.uniform(0.5, 2.0, 3)
        s_true = rng.uniform(0.005, 0.1)
        spi_dims = s_true * v_dims
        s = scaling_factor(spi_dims, v_dims)
        gm_scaled = float(np.cbrt(np.prod(s * v_dims)))
        gm_real = float(np.cbrt(np.prod(spi_dims)))
        assert gm_scaled == pytest.approx(gm_real, rel=1e-12)


# ---------------------------------------------------------------------------
# 9. Split determinism: 100 sequence ids at ratio 0.9 give a deterministic,
#    disjoint 90/10 split.


def test_criterion_09_split_determinism():
    ids = [f"seq{i:03d}" for i in range(100)]
    train, test = split_dataset(ids, ratio=0.9, seed=0)
    assert len(train) == 90
    assert len(test) == 10
    assert set(train).isdisjoint(test)
    assert sorted(train + test) == sorted(ids)
    again = split_dataset(ids, ratio=0.9, seed=0)
    assert again == (train, test)
    other = split_dataset(ids, ratio=0.9, seed=1)
    assert other != (train, test)


# ---------------------------------------------------------------------------
# 10. Generation determinism: two identical generate runs produce
#     byte-identical OBJ and mask files.


def _digests(root, patterns):
    out = {}
    for pattern in patterns:
        for path in root.rglob(pattern):
            out[path.relative_to(root).as_posix()] = hashlib.sha256(
                path.read_bytes()).hexdigest()
    return out


def test_criterion_10_generation_determinism(tmp_path):
    doc = {"sequences": [
        {"id": "det", "container": "cube-bottle-S",
         "liquid": {"fill_fraction": 0.3},
         "rotation": {"mode": "R5", "frames": 3},
         "camera": {"resolution": 32}},
    ]}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(doc))
    out_a = tmp_path / "run_a"
    out_b = tmp_path / "run_b"
    assert main(["generate", "--config", str(cfg_path),
                 "--out", str(out_a)]) == 0
    assert main(["generate", "--config", str(cfg_path),
                 "--out", str(out_b)]) == 0
    hashes_a = _digests(out_a, ("*.obj", "mask_*.pgm"))
    hashes_b = _digests(out_b, ("*.obj", "mask_*.pgm"))
    assert hashes_a
    assert hashes_a == hashes_b


# ---------------------------------------------------------------------------
# 11. Format round-trips: OBJ and PGM write -> read -> write produce a
#     byte-identical second file.


def test_criterion_11_format_round_trips(tmp_path):
    rng = np.random.default_rng(13)
    sph = icosphere(0.31, subdivisions=2)
    mesh = TriMesh(sph.vertices + rng.normal(0.0, 0.02, sph.vertices.shape),
                   sph.faces)
    first = tmp_path / "first.obj"
    second = tmp_path / "second.obj"
    write_obj(mesh, first)
    write_obj(read_obj(first), second)
    assert first.read_bytes() == second.read_bytes()

    yy, xx = np.mgrid[0:37, 0:29]
    mask = MaskImage(((xx // 3 + yy // 5) % 2).astype(bool))
    first_pgm = tmp_path / "first.pgm"
    second_pgm = tmp_path / "second.pgm"
    write_mask(mask, first_pgm)
    write_mask(read_mask(first_pgm), second_pgm)
    assert first_pgm.read_bytes() == second_pgm.read_bytes()
