"""Command-line entry point: generate / evaluate / split / inspect.

Exit codes: 0 success, 2 invalid input (config, ids, arguments),
3 solver failure (pressure non-convergence or numerical blowup).
"""

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .containers import CATALOG
from .errors import (IdMismatch, LiquidLabError, NonConverged,
                     NumericalBlowup, ParseError)
from .scene import ROTATION_MODES, make_config

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3


def _parse_preset(text: str):
    """`name` or `name:mode`, e.g. cube-flask or cube-flask:R3."""
    name, _, mode = text.partition(":")
    mode = mode or "R1"
    if mode not in ROTATION_MODES:
        raise ParseError(
            f"unknown rotation mode {mode!r}; choose from "
            f"{sorted(ROTATION_MODES)}")
    return name, mode


def _configs_from_args(args):
    from .dataset import load_config

    if args.config:
        cfgs = load_config(args.config, default_seed=args.seed)
    else:
        name, mode = _parse_preset(args.preset)
        cfgs = [make_config(container=name, mode=mode,
                            frame_count=args.frames or 81, seed=args.seed,
                            sequence_id="0")]
    if args.frames is not None:
        from dataclasses import replace

        for cfg in cfgs:
            cfg.schedule = replace(cfg.schedule, frame_count=args.frames)
    return cfgs


def _generate_one(task):
    """Worker: run one sequence and write its frames. Returns
    (manifest entry, solver stats, file counts)."""
    cfg, root, t0 = task
    from .dataset import DatasetLayout, write_frame
    from .scene import iter_sequence

    layout = DatasetLayout(root)
    stats = {}
    meshes = masks = metas = 0
    for record, rig in iter_sequence(cfg, stats=stats):
        write_frame(layout, cfg.sequence_id, record, cfg, rig)
        meshes += 1
        masks += len(record.masks)
        metas += 1
    entry = {
        "id": str(cfg.sequence_id),
        "frames": cfg.schedule.frame_count,
        "container": cfg.container.name,
        "mode": cfg.schedule.mode,
        "fill_volume_m3": cfg.fill_volume,
    }
    stats = {k: (round(v, 12) if isinstance(v, float) else v)
             for k, v in stats.items()}
    print(f"seq {cfg.sequence_id}: {meshes} frames written "
          f"({time.time() - t0:.1f}s, substeps {stats.get('substeps', 0)}, "
          f"max div {stats.get('max_divergence', 0.0):.2e})")
    return entry, stats, (meshes, masks, metas)


def cmd_generate(args) -> int:
    from .dataset import DatasetLayout, write_manifest

    t0 = time.time()
    if args.frames is not None and args.frames < 1:
        print("error: --frames must be >= 1", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        cfgs = _configs_from_args(args)
    except (LiquidLabError, ValueError, OSError, TypeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    ids = [str(c.sequence_id) for c in cfgs]
    if len(set(ids)) != len(ids):
        print(f"error: duplicate sequence ids {ids}", file=sys.stderr)
        return EXIT_BAD_INPUT

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    layout = DatasetLayout(root)
    tasks = [(cfg, root, t0) for cfg in cfgs]
    try:
        if args.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_generate_one, tasks))
        else:
            results = [_generate_one(t) for t in tasks]
    except (NumericalBlowup, NonConverged) as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (LiquidLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    entries = [r[0] for r in results]
    write_manifest(layout, entries)
    meshes = sum(r[2][0] for r in results)
    masks = sum(r[2][1] for r in results)
    metas = sum(r[2][2] for r in results)
    report = {
        "sequences": sorted(e["id"] for e in entries),
        "frames": meshes,
        "meshes": meshes,
        "masks": masks,
        "metadata_files": metas,
        "wall_time_s": round(time.time() - t0, 3),
        "solver": {e["id"]: r[1] for e, r in zip(entries, results)},
    }
    if masks != 6 * meshes:
        print(f"error: wrote {masks} masks for {meshes} meshes "
              "(expected 6 per mesh)", file=sys.stderr)
        return EXIT_SOLVER
    (root / "run_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {meshes} meshes, {masks} masks, {metas} metadata files "
          f"-> {root}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .metrics import evaluate_dirs

    try:
        report = evaluate_dirs(args.gt, args.pred, tau=args.tau,
                               n=args.samples, seed=args.seed)
    except IdMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (LiquidLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"report -> {args.out}")
    agg = report["aggregate"]
    print(f"evaluated {report['count']} meshes: "
          f"chamfer {agg['chamfer_m']:.6f} m, "
          f"volume IoU {agg['volume_iou']:.4f}, "
          f"F-score {agg['f_score_pct']:.2f}, "
          f"dims RMSE {agg['dims_rmse_m']:.6f} m")
    if "scale_mape_pct" in agg:
        print(f"scale MAPE {agg['scale_mape_pct']:.3f}%")
    if not args.out:
        print(text)
    return EXIT_OK


def cmd_split(args) -> int:
    from .dataset import read_manifest

    path = Path(args.manifest)
    if path.is_dir():
        path = path / "manifest.json"
    from .dataset import split_dataset

    try:
        doc = read_manifest(path)
        train, test = split_dataset(doc, ratio=args.ratio, seed=args.seed)
    except (LiquidLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    doc["split"] = {"train": train, "test": test}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"split {len(train)} train / {len(test)} test -> {path}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    from .dataset import read_mask, read_metadata, read_obj
    from .mesh import mesh_aabb_dims, mesh_volume

    frame_dir = Path(args.frame)
    obj_path = frame_dir / "liquid.obj"
    meta_path = frame_dir / "meta.json"
    if not frame_dir.is_dir() or not obj_path.is_file() \
            or not meta_path.is_file():
        print(f"error: {frame_dir} is not a generated frame directory",
              file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        meta = read_metadata(meta_path)
        mesh = read_obj(obj_path)
    except (LiquidLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    rot = meta.get("rotation", {})
    cont = meta.get("container", {})
    print(f"frame: {frame_dir}")
    print(f"container: {cont.get('name')} ({cont.get('shape')}, "
          f"dims_m {cont.get('dims_m')})")
    print(f"rotation: mode {rot.get('mode')} angles_deg "
          f"{rot.get('angles_deg')} frame {rot.get('frame_index')}")
    print(f"mesh: {mesh.vertices.shape[0]} vertices, "
          f"{mesh.faces.shape[0]} faces, "
          f"watertight={mesh.is_watertight()}")
    print(f"mesh volume: {mesh_volume(mesh):.17g} m^3")
    dims = mesh_aabb_dims(mesh)
    print(f"mesh AABB dims: [{dims[0]:.17g}, {dims[1]:.17g}, "
          f"{dims[2]:.17g}] m")
    for mask_path in sorted(frame_dir.glob("mask_*.*")):
        try:
            mask = read_mask(mask_path)
        except (LiquidLabError, ValueError) as exc:
            print(f"error: {mask_path.name}: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
        print(f"{mask_path.name}: {mask.width}x{mask.height}, "
              f"fill {mask.fill_fraction:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquidlab",
        description="Physics-based liquid dataset generator and "
                    "mesh-evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate and export sequences")
    src = gen.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scene config JSON file")
    src.add_argument(
        "--preset", metavar="NAME[:MODE]",
        help=f"container preset (one of {', '.join(sorted(CATALOG))}) with "
             "an optional rotation mode R1..R6")
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--frames", type=int, default=None,
                     help="frames per sequence (default: config value or 81)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--jobs", type=int, default=1,
                     help="sequences processed in parallel")
    gen.set_defaults(func=cmd_generate)

    ev = sub.add_parser("evaluate", help="compare predicted meshes with "
                                         "ground truth")
    ev.add_argument("--gt", required=True, help="ground-truth mesh directory")
    ev.add_argument("--pred", required=True, help="predicted mesh directory")
    ev.add_argument("--tau", type=float, default=0.005,
                    help="F-score distance threshold in meters")
    ev.add_argument("--samples", type=int, default=10_000)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", help="write the JSON report here")
    ev.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("split", help="assign sequences to train/test")
    sp.add_argument("--manifest", required=True,
                    help="manifest.json file or dataset root")
    sp.add_argument("--ratio", type=float, default=0.9)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_split)

    ins = sub.add_parser("inspect", help="print a generated frame's stats")
    ins.add_argument("--frame", required=True, help="frame directory")
    ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
