"""Mesh/mask evaluation suite: IoU, Chamfer, F-score, dimension RMSE, and
the real-world scaling factor with its MAPE.

Surface metrics follow the sampled conventions of the One-2-3-45 benchmark
family: both surfaces are sampled area-uniformly (n=10,000 by default) and
point-to-surface distances are approximated by nearest sample neighbors.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import (BadDims, BadReference, EmptyMesh, IdMismatch,
                     ShapeMismatch)
from .mesh import TriMesh, mesh_aabb, mesh_aabb_dims
from .render import MaskImage
from .voxel import voxelize

DEFAULT_SAMPLES = 10_000
DEFAULT_TAU = 0.005
DEFAULT_VOXEL_RES = 64


@dataclass
class ScalingRecord:
    """Real-world extents, reconstructed extents, and the derived scale."""

    spi_dims: tuple  # (x, y, z) meters, ground truth
    v_dims: tuple  # (x, y, z) model units, reconstruction
    s: float = 0.0

    def __post_init__(self):
        self.spi_dims = tuple(float(d) for d in self.spi_dims)
        self.v_dims = tuple(float(d) for d in self.v_dims)
        if not self.s:
            self.s = scaling_factor(self.spi_dims, self.v_dims)
        if self.s <= 0:
            raise BadDims("scale factor must be positive")


def sample_surface(mesh: TriMesh, n: int, seed: int = 0) -> np.ndarray:
    """n points distributed area-uniformly over the mesh surface."""
    if mesh.vertices.shape[0] == 0 or mesh.faces.shape[0] == 0:
        raise EmptyMesh("cannot sample an empty mesh")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    areas = mesh.face_areas()
    total = float(areas.sum())
    if total <= 0.0:
        raise EmptyMesh("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    idx = rng.choice(areas.shape[0], size=n, p=areas / total)
    tri = mesh.triangle_corners()[idx]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    r1 = np.sqrt(rng.random(n))[:, None]
    r2 = rng.random(n)[:, None]
    return (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c


def mask_iou(a: MaskImage, b: MaskImage) -> float:
    """|a AND b| / |a OR b|; 1.0 when both masks are empty."""
    pa = a.pixels if isinstance(a, MaskImage) else np.asarray(a, dtype=bool)
    pb = b.pixels if isinstance(b, MaskImage) else np.asarray(b, dtype=bool)
    if pa.shape != pb.shape:
        raise ShapeMismatch(f"mask shapes differ: {pa.shape} vs {pb.shape}")
    union = int(np.logical_or(pa, pb).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(pa, pb).sum())
    return inter / union


def chamfer_distance(a: TriMesh, b: TriMesh, n: int = DEFAULT_SAMPLES,
                     seed: int = 0) -> float:
    """Symmetric mean nearest-neighbor distance between surface samples.

    Both meshes are sampled with the same seed, which makes the metric
    symmetric bit-for-bit: cd(a, b) == cd(b, a).
    """
    if n < 100:
        raise ValueError("chamfer needs at least 100 samples")
    pa = sample_surface(a, n, seed)
    pb = sample_surface(b, n, seed)
    d_ab = cKDTree(pb).query(pa, k=1)[0]
    d_ba = cKDTree(pa).query(pb, k=1)[0]
    return 0.5 * float(np.mean(d_ab)) + 0.5 * float(np.mean(d_ba))


def volume_iou(a: TriMesh, b: TriMesh, res: int = DEFAULT_VOXEL_RES) -> float:
    """Occupancy IoU of the two solids, voxelized on their shared union AABB."""
    lo_a, hi_a = mesh_aabb(a)
    lo_b, hi_b = mesh_aabb(b)
    lo = np.minimum(lo_a, lo_b)
    hi = np.maximum(hi_a, hi_b)
    occ_a = voxelize(a, res, bounds=(lo, hi)).values.astype(bool)
    occ_b = voxelize(b, res, bounds=(lo, hi)).values.astype(bool)
    union = int(np.logical_or(occ_a, occ_b).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(occ_a, occ_b).sum())
    return inter / union


def f_score(a: TriMesh, b: TriMesh, tau: float = DEFAULT_TAU,
            n: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    """Harmonic mean of sampled precision/recall at threshold tau, in percent."""
    if tau <= 0:
        raise ValueError("f_score threshold must be positive")
    pa = sample_surface(a, n, seed)
    pb = sample_surface(b, n, seed)
    d_ab = cKDTree(pb).query(pa, k=1)[0]
    d_ba = cKDTree(pa).query(pb, k=1)[0]
    precision = float(np.mean(d_ab <= tau))
    recall = float(np.mean(d_ba <= tau))
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall) * 100.0


def dims_rmse(pred, gt) -> float:
    """RMSE pooled over all 3*k axis extents of k (pred, gt) records."""
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.size == 0 or g.size == 0:
        raise ShapeMismatch("dims_rmse needs non-empty lists")
    if p.shape != g.shape or p.ndim not in (1, 2) or (
            p.ndim == 2 and p.shape[1] != 3):
        raise ShapeMismatch(
            f"dims lists must both be k x 3, got {p.shape} vs {g.shape}")
    return float(np.sqrt(np.mean((p - g) ** 2)))


def scaling_factor(spi_dims, v_dims) -> float:
    """Geometric-mean ratio of real-world to reconstructed axis extents:
    s = cbrt((Sx/Vx)(Sy/Vy)(Sz/Vz))."""
    spi = np.asarray(spi_dims, dtype=np.float64)
    v = np.asarray(v_dims, dtype=np.float64)
    if spi.shape != (3,) or v.shape != (3,):
        raise BadDims("scaling_factor needs two (x, y, z) triples")
    if np.any(spi <= 0) or np.any(v <= 0):
        raise BadDims("all six extents must be positive")
    r = spi / v
    return float(np.cbrt(r[0] * r[1] * r[2]))


def mape(pred, gt) -> float:
    """Mean absolute percentage error: mean(|pred - gt| / |gt|) * 100."""
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape or p.size == 0:
        raise ShapeMismatch(
            f"mape needs equal-length non-empty lists, got {p.shape} vs "
            f"{g.shape}")
    if np.any(g == 0.0):
        raise BadReference("mape reference contains zeros")
    return float(np.mean(np.abs(p - g) / np.abs(g)) * 100.0)


# ---------------------------------------------------------------------------
# Batch directory evaluation


def _mesh_ids(root: Path):
    return sorted(str(p.relative_to(root)) for p in root.rglob("*.obj"))


def evaluate_dirs(gt_dir, pred_dir, tau: float = DEFAULT_TAU,
                  n: int = DEFAULT_SAMPLES, res: int = DEFAULT_VOXEL_RES,
                  seed: int = 0) -> dict:
    """Per-item and aggregate metrics over two directories of OBJ meshes.

    Items pair up by relative path. If `pred_dir/scales.json` exists
    ({id: {"s": float, "dims_model_units": [x,y,z]}}), the report also
    carries the MAPE of the predicted scale factors against the factors
    derived from the ground-truth extents.

    Raises IdMismatch when the two directories hold different id sets.
    """
    from .dataset import read_obj

    gt_dir = Path(gt_dir)
    pred_dir = Path(pred_dir)
    gt_ids = _mesh_ids(gt_dir)
    pred_ids = _mesh_ids(pred_dir)
    missing_pred = sorted(set(gt_ids) - set(pred_ids))
    missing_gt = sorted(set(pred_ids) - set(gt_ids))
    if missing_pred or missing_gt:
        raise IdMismatch(missing_pred=missing_pred, missing_gt=missing_gt)
    if not gt_ids:
        raise IdMismatch(missing_pred=["<no .obj files found>"])

    scales = None
    scales_path = pred_dir / "scales.json"
    if scales_path.is_file():
        scales = json.loads(scales_path.read_text())

    items = {}
    dims_pred = []
    dims_gt = []
    s_pred = []
    s_gt = []
    for item_id in gt_ids:
        gt_mesh = read_obj(gt_dir / item_id)
        pred_mesh = read_obj(pred_dir / item_id)
        gt_dims = mesh_aabb_dims(gt_mesh)
        pred_dims = mesh_aabb_dims(pred_mesh)
        entry = {
            "chamfer_m": chamfer_distance(gt_mesh, pred_mesh, n=n, seed=seed),
            "volume_iou": volume_iou(gt_mesh, pred_mesh, res=res),
            "f_score_pct": f_score(gt_mesh, pred_mesh, tau=tau, n=n,
                                   seed=seed),
            "aabb_gt_m": list(gt_dims),
            "aabb_pred_m": list(pred_dims),
        }
        dims_gt.append(gt_dims)
        dims_pred.append(pred_dims)
        if scales is not None and item_id in scales:
            rec = scales[item_id]
            s_hat = float(rec["s"])
            s_ref = scaling_factor(gt_dims, rec["dims_model_units"])
            entry["scale_pred"] = s_hat
            entry["scale_ref"] = s_ref
            s_pred.append(s_hat)
            s_gt.append(s_ref)
        items[item_id] = entry

    # Normalized variant: every extent divided by its record's largest
    # ground-truth extent, so differently sized meshes weigh equally.
    norm = np.asarray([max(d) for d in dims_gt])[:, None]
    aggregate = {
        "chamfer_m": float(np.mean([e["chamfer_m"] for e in items.values()])),
        "volume_iou": float(np.mean([e["volume_iou"]
                                     for e in items.values()])),
        "f_score_pct": float(np.mean([e["f_score_pct"]
                                      for e in items.values()])),
        "dims_rmse_m": dims_rmse(dims_pred, dims_gt),
        "dims_rmse_normalized": dims_rmse(
            np.asarray(dims_pred) / norm, np.asarray(dims_gt) / norm),
    }
    if s_pred:
        aggregate["scale_mape_pct"] = mape(s_pred, s_gt)

    return {
        "tau_m": tau,
        "samples": n,
        "voxel_res": res,
        "count": len(gt_ids),
        "items": items,
        "aggregate": aggregate,
    }
