"""Orthographic silhouette rasterizer for the six-view binary mask rig.

A pixel is set iff its center lies inside the projection of any mesh
triangle (inclusive edge test).  Pixel centers are placed symmetrically
about the camera axis, edge functions are sign-canonicalized, and the rig
bases come in exactly negated pairs, so masks rendered from opposite
directions are pixel-exact mirror images of each other.
"""

from dataclasses import dataclass, field

import numpy as np

from . import accel
from .accel import njit
from .errors import BadRig
from .mesh import TriMesh

VIEW_LABELS = ("front", "back", "left", "right", "top", "bottom")

# (direction, up) per view.  Opposite views share `up` and have exactly
# negated directions, hence exactly negated `right` vectors.
_VIEW_BASES = {
    "front": ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
    "back": ((0.0, -1.0, 0.0), (0.0, 0.0, 1.0)),
    "left": ((1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "right": ((-1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "top": ((0.0, 0.0, -1.0), (0.0, 1.0, 0.0)),
    "bottom": ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0)),
}


@dataclass
class OrthoCamera:
    label: str
    direction: np.ndarray
    up: np.ndarray
    extent: tuple  # (width_m, height_m)
    resolution: tuple = (512, 512)  # (px_w, px_h)
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    distance: float = 0.5  # metadata only; orthographic projection ignores it

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=np.float64)
        self.up = np.asarray(self.up, dtype=np.float64)
        self.center = np.asarray(self.center, dtype=np.float64)
        if np.isscalar(self.extent) or np.ndim(self.extent) == 0:
            self.extent = (float(self.extent), float(self.extent))
        else:
            self.extent = (float(self.extent[0]), float(self.extent[1]))
        if np.isscalar(self.resolution) or np.ndim(self.resolution) == 0:
            self.resolution = (int(self.resolution), int(self.resolution))
        else:
            self.resolution = (int(self.resolution[0]), int(self.resolution[1]))
        dn = float(np.linalg.norm(self.direction))
        un = float(np.linalg.norm(self.up))
        if dn == 0.0 or un == 0.0:
            raise ValueError("camera direction and up must be nonzero")
        self.direction = self.direction / dn
        self.up = self.up / un
        if abs(float(np.dot(self.direction, self.up))) > 1e-9:
            raise ValueError("camera direction must be perpendicular to up")
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValueError("camera extent must be positive")
        if self.resolution[0] < 1 or self.resolution[1] < 1:
            raise ValueError("camera resolution must be >= 1 px")

    @property
    def right(self) -> np.ndarray:
        return np.cross(self.direction, self.up)


@dataclass
class MaskImage:
    pixels: np.ndarray  # (H, W) bool, row 0 = top of image

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=bool)
        if self.pixels.ndim != 2:
            raise ValueError("mask pixels must be a 2-D array")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def fill_fraction(self) -> float:
        return float(self.pixels.mean()) if self.pixels.size else 0.0


@njit(cache=True)
def _raster_kernel(u, v, faces, width, height, pw, ph, out):  # pragma: no cover
    for f in range(faces.shape[0]):
        i0, i1, i2 = faces[f, 0], faces[f, 1], faces[f, 2]
        x0, y0 = u[i0], v[i0]
        x1, y1 = u[i1], v[i1]
        x2, y2 = u[i2], v[i2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        s = 1.0 if area2 > 0.0 else -1.0
        xmin = min(x0, min(x1, x2))
        xmax = max(x0, max(x1, x2))
        ymin = min(y0, min(y1, y2))
        ymax = max(y0, max(y1, y2))
        cmin = int(np.floor(xmin / pw + 0.5 * width - 0.5))
        cmax = int(np.ceil(xmax / pw + 0.5 * width - 0.5))
        rmin = int(np.floor(0.5 * height - 0.5 - ymax / ph))
        rmax = int(np.ceil(0.5 * height - 0.5 - ymin / ph))
        if cmin < 0:
            cmin = 0
        if cmax > width - 1:
            cmax = width - 1
        if rmin < 0:
            rmin = 0
        if rmax > height - 1:
            rmax = height - 1
        for row in range(rmin, rmax + 1):
            py = (0.5 * height - row - 0.5) * ph
            for col in range(cmin, cmax + 1):
                if out[row, col]:
                    continue
                px = (col + 0.5 - 0.5 * width) * pw
                e0 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
                if e0 * s < 0.0:
                    continue
                e1 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
                if e1 * s < 0.0:
                    continue
                e2 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)
                if e2 * s < 0.0:
                    continue
                out[row, col] = True


def _raster_numpy(u, v, faces, width, height, pw, ph, out):
    for f in range(faces.shape[0]):
        i0, i1, i2 = faces[f, 0], faces[f, 1], faces[f, 2]
        x0, y0 = u[i0], v[i0]
        x1, y1 = u[i1], v[i1]
        x2, y2 = u[i2], v[i2]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 == 0.0:
            continue
        s = 1.0 if area2 > 0.0 else -1.0
        cmin = max(0, int(np.floor(min(x0, x1, x2) / pw + 0.5 * width - 0.5)))
        cmax = min(width - 1,
                   int(np.ceil(max(x0, x1, x2) / pw + 0.5 * width - 0.5)))
        rmin = max(0, int(np.floor(0.5 * height - 0.5 - max(y0, y1, y2) / ph)))
        rmax = min(height - 1,
                   int(np.ceil(0.5 * height - 0.5 - min(y0, y1, y2) / ph)))
        if cmin > cmax or rmin > rmax:
            continue
        cols = np.arange(cmin, cmax + 1)
        rows = np.arange(rmin, rmax + 1)
        px = (cols + 0.5 - 0.5 * width) * pw
        py = (0.5 * height - rows - 0.5) * ph
        px = px[None, :]
        py = py[:, None]
        e0 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
        e1 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        e2 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)
        inside = (e0 * s >= 0.0) & (e1 * s >= 0.0) & (e2 * s >= 0.0)
        out[rmin:rmax + 1, cmin:cmax + 1] |= inside


def render_mask(mesh: TriMesh, cam: OrthoCamera) -> MaskImage:
    """Binary silhouette of ``mesh`` seen through ``cam``.

    A pixel is set iff its center's orthographic ray hits any triangle
    (inclusive edge test); an empty mesh yields an all-zero mask.
    """
    width, height = cam.resolution
    out = np.zeros((height, width), dtype=bool)
    if mesh.vertices.shape[0] == 0 or mesh.faces.shape[0] == 0:
        return MaskImage(out)
    right = cam.right
    d = mesh.vertices - cam.center[None, :]
    # Explicit per-component dot products: identical expression trees on
    # both raster paths keep them bit-for-bit interchangeable.
    u = d[:, 0] * right[0] + d[:, 1] * right[1] + d[:, 2] * right[2]
    v = d[:, 0] * cam.up[0] + d[:, 1] * cam.up[1] + d[:, 2] * cam.up[2]
    pw = cam.extent[0] / width
    ph = cam.extent[1] / height
    faces = np.ascontiguousarray(mesh.faces, dtype=np.int64)
    if accel.NUMBA_ENABLED:
        _raster_kernel(u, v, faces, width, height, pw, ph, out)
    else:
        _raster_numpy(u, v, faces, width, height, pw, ph, out)
    return MaskImage(out)


def default_rig(center, extent, resolution=512, distance=0.5) -> dict:
    """The six-camera orthographic rig, all views sharing one square extent."""
    center = np.asarray(center, dtype=np.float64)
    rig = {}
    for label in VIEW_LABELS:
        direction, up = _VIEW_BASES[label]
        rig[label] = OrthoCamera(
            label=label,
            direction=np.array(direction),
            up=np.array(up),
            extent=extent,
            resolution=resolution,
            center=center,
            distance=distance,
        )
    return rig


def render_rig(mesh: TriMesh, rig) -> dict:
    """Render all six views; raises BadRig unless exactly the six labels
    front/back/left/right/top/bottom are present once each."""
    if isinstance(rig, dict):
        cams = list(rig.values())
    else:
        cams = list(rig)
    labels = [c.label for c in cams]
    if sorted(labels) != sorted(VIEW_LABELS):
        raise BadRig(
            f"rig must contain exactly the views {sorted(VIEW_LABELS)}, "
            f"got {sorted(labels)}"
        )
    return {c.label: render_mask(mesh, c) for c in cams}
