"""Bit-exact dataset serialization: OBJ meshes, PGM/PNG masks, JSON
metadata, the on-disk layout, the manifest, and sequence splitting."""

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, TooFewSequences
from .mesh import TriMesh
from .render import VIEW_LABELS, MaskImage

# ---------------------------------------------------------------------------
# OBJ


def write_obj(mesh: TriMesh, path) -> None:
    """ASCII OBJ subset: `v x y z` then `f i j k` (1-based, triangles).

    %.17g prints every float64 exactly, so write -> read -> write is
    byte-identical.
    """
    path = Path(path)
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.faces:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def read_obj(path) -> TriMesh:
    path = Path(path)
    verts = []
    faces = []
    face_lines = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "v":
            if len(tokens) != 4:
                raise ParseError(
                    f"vertex line needs 3 coordinates, got {len(tokens) - 1}",
                    line=lineno,
                )
            try:
                verts.append([float(t) for t in tokens[1:]])
            except ValueError:
                raise ParseError(f"bad vertex coordinate in {raw!r}",
                                 line=lineno) from None
        elif tokens[0] == "f":
            if len(tokens) != 4:
                raise ParseError(
                    f"only triangle faces supported, got {len(tokens) - 1} "
                    "indices", line=lineno,
                )
            try:
                idx = [int(t) for t in tokens[1:]]
            except ValueError:
                raise ParseError(f"bad face index in {raw!r}",
                                 line=lineno) from None
            faces.append(idx)
            face_lines.append(lineno)
        else:
            raise ParseError(f"unsupported OBJ keyword {tokens[0]!r}",
                             line=lineno)
    nv = len(verts)
    for idx, lineno in zip(faces, face_lines):
        for i in idx:
            if not 1 <= i <= nv:
                raise ParseError(f"face index {i} out of range 1..{nv}",
                                 line=lineno)
    vertices = np.asarray(verts, dtype=np.float64).reshape(nv, 3)
    tri = np.asarray(faces, dtype=np.int64).reshape(len(faces), 3) - 1
    # Degenerate faces must survive the round trip verbatim.
    return TriMesh(vertices, tri, drop_degenerate=False)


# ---------------------------------------------------------------------------
# Masks (binary PGM by default; 8-bit grayscale PNG optional)


def write_mask(mask: MaskImage, path) -> None:
    path = Path(path)
    data = np.where(mask.pixels, 255, 0).astype(np.uint8)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(data, mode="L").save(path, format="PNG")
        return
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    path.write_bytes(header + data.tobytes())


def _pgm_tokens(blob: bytes):
    """Header tokens of a PGM: whitespace-separated, `#` comments to EOL.
    Yields (token, end_offset)."""
    i = 0
    n = len(blob)
    while i < n:
        c = blob[i:i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            while i < n and blob[i:i + 1] not in b"\r\n":
                i += 1
        else:
            j = i
            while j < n and blob[j:j + 1] not in b" \t\r\n":
                j += 1
            yield blob[i:j], j
            i = j


def read_mask(path) -> MaskImage:
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        with Image.open(path) as im:
            data = np.asarray(im.convert("L"))
        return MaskImage(data > 0)
    blob = path.read_bytes()
    tokens = []
    end = 0
    it = _pgm_tokens(blob)
    try:
        for _ in range(4):
            tok, end = next(it)
            tokens.append(tok)
    except StopIteration:
        raise ParseError("truncated PGM header") from None
    if tokens[0] != b"P5":
        raise ParseError(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError("non-integer PGM dimensions") from None
    if width < 1 or height < 1:
        raise ParseError(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise ParseError(f"expected maxval 255, got {maxval}")
    # Exactly one whitespace byte separates the header from the raster.
    data = blob[end + 1:]
    if len(data) < width * height:
        raise ParseError(
            f"raster has {len(data)} bytes, header promises {width * height}"
        )
    pixels = np.frombuffer(data[:width * height], dtype=np.uint8)
    return MaskImage(pixels.reshape(height, width) > 0)


# ---------------------------------------------------------------------------
# Metadata


def frame_metadata(record, config, rig) -> dict:
    """The per-frame metadata value tree (see write_metadata)."""
    spec = config.container
    cams = sorted(rig.values(), key=lambda c: VIEW_LABELS.index(c.label))
    cam0 = cams[0]
    return {
        "container": {
            "name": spec.name,
            "shape": spec.shape,
            "dims_m": [float(d) for d in spec.dims_list()],
            "thickness_m": float(spec.thickness),
            "transparency": float(spec.transparency),
        },
        "camera": {
            "views": [c.label for c in cams],
            "extent_m": [float(cam0.extent[0]), float(cam0.extent[1])],
            "resolution": [int(cam0.resolution[0]), int(cam0.resolution[1])],
            "distance_m": float(cam0.distance),
        },
        "liquid": {
            "color": config.color,
            "initial_volume_m3": float(config.fill_volume),
            "mesh_path": "liquid.obj",
            "aabb_dims_m": [float(d) for d in record.aabb_dims],
            "mesh_volume_m3": float(record.mesh_volume),
        },
        "environment": {
            "lighting": config.lighting,
            "scene": config.scene_tag,
            "tabletop": config.tabletop,
        },
        "rotation": {
            "mode": config.schedule.mode,
            "angles_deg": [float(a) for a in record.angles_deg],
            "frame_index": int(record.index),
        },
        "image": {
            "resolution": [int(cam0.resolution[0]), int(cam0.resolution[1])],
        },
    }


def write_metadata(record, config, path, rig) -> None:
    Path(path).write_text(
        json.dumps(frame_metadata(record, config, rig), indent=2,
                   sort_keys=True) + "\n"
    )


def read_metadata(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad metadata JSON: {exc}") from None


# ---------------------------------------------------------------------------
# Layout

_SEQ_RE = re.compile(r"^seq_(.+)$")
_FRAME_RE = re.compile(r"^frame_(\d+)$")


@dataclass
class DatasetLayout:
    """seq_<id>/frame_<t>/{liquid.obj, mask_<view>.pgm, meta.json} under a
    root, plus manifest.json at the top."""

    root: Path
    mask_ext: str = "pgm"

    def __post_init__(self):
        self.root = Path(self.root)

    def seq_dir(self, seq_id) -> Path:
        return self.root / f"seq_{seq_id}"

    def frame_dir(self, seq_id, t) -> Path:
        return self.seq_dir(seq_id) / f"frame_{t}"

    def mesh_path(self, seq_id, t) -> Path:
        return self.frame_dir(seq_id, t) / "liquid.obj"

    def mask_path(self, seq_id, t, view) -> Path:
        return self.frame_dir(seq_id, t) / f"mask_{view}.{self.mask_ext}"

    def meta_path(self, seq_id, t) -> Path:
        return self.frame_dir(seq_id, t) / "meta.json"

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def sequence_ids(self):
        if not self.root.is_dir():
            return []
        ids = []
        for child in self.root.iterdir():
            m = _SEQ_RE.match(child.name)
            if m and child.is_dir():
                ids.append(m.group(1))
        return sorted(ids)

    def frame_indices(self, seq_id):
        d = self.seq_dir(seq_id)
        if not d.is_dir():
            return []
        out = []
        for child in d.iterdir():
            m = _FRAME_RE.match(child.name)
            if m and child.is_dir():
                out.append(int(m.group(1)))
        return sorted(out)


def write_frame(layout: DatasetLayout, seq_id, record, config, rig) -> None:
    d = layout.frame_dir(seq_id, record.index)
    d.mkdir(parents=True, exist_ok=True)
    write_obj(record.mesh, layout.mesh_path(seq_id, record.index))
    for view, mask in record.masks.items():
        write_mask(mask, layout.mask_path(seq_id, record.index, view))
    write_metadata(record, config, layout.meta_path(seq_id, record.index),
                   rig)


# ---------------------------------------------------------------------------
# Manifest & split


def write_manifest(layout: DatasetLayout, sequences, split=None) -> None:
    """`sequences` is a list of dicts with at least an "id" key."""
    doc = {"sequences": sorted(sequences, key=lambda s: str(s["id"]))}
    if split is not None:
        train, test = split
        doc["split"] = {"train": sorted(train), "test": sorted(test)}
    layout.root.mkdir(parents=True, exist_ok=True)
    layout.manifest_path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n"
    )


def read_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad manifest JSON: {exc}") from None
    if "sequences" not in doc or not isinstance(doc["sequences"], list):
        raise ParseError('manifest needs a "sequences" list')
    return doc


def split_dataset(sequences, ratio=0.9, seed=0):
    """Assign whole sequences to (train, test); both sides non-empty.

    `sequences` is an iterable of ids or a manifest dict.
    """
    if isinstance(sequences, dict):
        ids = [str(s["id"]) for s in sequences["sequences"]]
    else:
        ids = [str(s) for s in sequences]
    ids = sorted(ids)
    n = len(ids)
    if len(set(ids)) != n:
        raise ValueError("sequence ids must be unique")
    if n < 2:
        raise TooFewSequences(f"need at least 2 sequences to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise ValueError("split ratio must lie in (0, 1)")
    n_train = int(round(ratio * n))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    chosen = set(perm[:n_train].tolist())
    train = sorted(ids[i] for i in range(n) if i in chosen)
    test = sorted(ids[i] for i in range(n) if i not in chosen)
    return train, test


# ---------------------------------------------------------------------------
# Scene configuration files


def _scene_from_dict(doc: dict, index: int, default_seed: int):
    from .containers import ContainerSpec, get_container
    from .scene import make_config
    from .sim import SimParams

    if not isinstance(doc, dict):
        raise ParseError("sequence config must be a JSON object")
    known = {"id", "container", "liquid", "rotation", "camera",
             "environment", "sim", "surface"}
    extra = set(doc) - known
    if extra:
        raise ParseError(f"unknown config keys {sorted(extra)}")

    cont = doc.get("container", "cube-flask")
    if isinstance(cont, str):
        spec = get_container(cont)
    elif isinstance(cont, dict):
        if set(cont) == {"name"}:
            spec = get_container(cont["name"])
        else:
            try:
                spec = ContainerSpec(
                    name=cont.get("name", f"custom{index}"),
                    shape=cont["shape"],
                    dims=tuple(cont["dims_m"]),
                    thickness=cont.get("thickness_m", 0.003),
                    transparency=cont.get("transparency", 0.9),
                )
            except KeyError as exc:
                raise ParseError(f"container spec missing {exc}") from None
    else:
        raise ParseError('"container" must be a name or an object')

    liquid = doc.get("liquid", {})
    rotation = doc.get("rotation", {})
    camera = doc.get("camera", {})
    env = doc.get("environment", {})
    sim_kw = dict(doc.get("sim", {}))
    seed = int(sim_kw.pop("seed", default_seed + index))

    kw = {}
    if "fill_fraction" in liquid:
        kw["fill_fraction"] = float(liquid["fill_fraction"])
    if sim_kw:
        kw["sim"] = SimParams(seed=seed, **sim_kw)
    cfg = make_config(
        container=spec,
        mode=rotation.get("mode", "R1"),
        frame_count=int(rotation.get("frames", 81)),
        seed=seed,
        color=liquid.get("color", "colorless"),
        lighting=env.get("lighting", "L1"),
        scene_tag=env.get("scene", "Lab1"),
        tabletop=env.get("tabletop", "matte-gray"),
        resolution=int(camera.get("resolution", 512)),
        camera_distance=float(camera.get("distance_m", 0.5)),
        sequence_id=str(doc.get("id", index)),
        **kw,
    )
    if "initial_volume_m3" in liquid:
        cfg.fill_volume = float(liquid["initial_volume_m3"])
        if cfg.fill_volume <= 0:
            raise ParseError("initial_volume_m3 must be positive")
    if "surface" in doc:
        from .surface import SurfaceParams

        cfg.surface = SurfaceParams(**doc["surface"])
    return cfg


def load_config(path_or_doc, default_seed=0):
    """SceneConfigs from a JSON file (or parsed dict).

    Either a single scene object or {"sequences": [scene, ...]} where each
    scene uses the meta.json key vocabulary: container (preset name or
    custom spec), liquid {color, fill_fraction | initial_volume_m3},
    rotation {mode, frames}, camera {resolution, distance_m},
    environment {lighting, scene, tabletop}, sim {dx, seed, ...}.
    """
    if isinstance(path_or_doc, dict):
        doc = path_or_doc
    else:
        try:
            doc = json.loads(Path(path_or_doc).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad config JSON: {exc}") from None
    if "sequences" in doc:
        seqs = doc["sequences"]
        if not isinstance(seqs, list) or not seqs:
            raise ParseError('"sequences" must be a non-empty list')
        return [_scene_from_dict(s, i, default_seed)
                for i, s in enumerate(seqs)]
    return [_scene_from_dict(doc, 0, default_seed)]
