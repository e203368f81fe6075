"""Parametric transparent-container catalog: cavity SDFs + shell meshes."""

from dataclasses import dataclass, field

import numpy as np

from .errors import BadContainerSpec
from .marching import marching_cubes, sample_on_grid
from .mesh import TriMesh
from .sdf import BoxSdf, ConeSdf, CylinderSdf, SdfShape, SphereSdf, UnionSdf

_FAMILIES = ("box", "cylinder", "cone", "sphere", "composite")


@dataclass
class ContainerSpec:
    """One catalog entry. ``dims`` is family-specific (see builders below);
    containers are modeled as sealed cavities — particles never leave."""

    name: str
    shape: str
    dims: tuple
    thickness: float = 0.003
    transparency: float = 0.9
    parts: tuple = field(default=())  # composite: (spec-like tuples)

    def __post_init__(self):
        if self.shape not in _FAMILIES:
            raise BadContainerSpec(f"unknown shape family {self.shape!r}")
        if any(d <= 0 for d in np.atleast_1d(np.asarray(self.dims, dtype=float)).ravel()):
            raise BadContainerSpec("dimensions must be positive")
        if self.thickness <= 0:
            raise BadContainerSpec("wall thickness must be positive")
        if self.shape == "composite" and not self.parts:
            raise BadContainerSpec("composite container needs parts")
        if self.thickness >= self._min_half_extent():
            raise BadContainerSpec(
                f"thickness {self.thickness} >= min half-extent "
                f"{self._min_half_extent():.4g}"
            )

    def _min_half_extent(self) -> float:
        d = np.asarray(self.dims, dtype=float).ravel()
        if self.shape == "box":
            return float(d.min()) / 2.0
        if self.shape == "cylinder":
            return float(min(d[0], d[1] / 2.0))
        if self.shape == "cone":
            return float(min(d[0], d[1], d[2] / 2.0))
        if self.shape == "sphere":
            return float(d[0])
        # composite: smallest extent among parts
        return min(
            ContainerSpec(f"{self.name}-part", shp, dims)._min_half_extent()
            for shp, dims, _off in self.parts
        )

    def dims_list(self):
        return [float(x) for x in np.asarray(self.dims, dtype=float).ravel()]


def _family_sdf(shape, dims, offset=(0.0, 0.0, 0.0)) -> SdfShape:
    d = np.asarray(dims, dtype=float).ravel()
    if shape == "box":
        return BoxSdf(size=tuple(d[:3]), offset=offset)
    if shape == "cylinder":
        return CylinderSdf(radius=d[0], height=d[1], offset=offset)
    if shape == "cone":
        return ConeSdf(r_base=d[0], r_top=d[1], height=d[2], offset=offset)
    if shape == "sphere":
        return SphereSdf(radius=d[0], offset=offset)
    raise BadContainerSpec(f"unknown shape family {shape!r}")


def cavity_sdf(spec: ContainerSpec) -> SdfShape:
    if spec.shape == "composite":
        if not spec.parts:
            raise BadContainerSpec("composite container needs parts")
        return UnionSdf(tuple(
            _family_sdf(shp, dims, off) for shp, dims, off in spec.parts
        ))
    return _family_sdf(spec.shape, spec.dims)


def shell_mesh(spec: ContainerSpec, dx: float = 0.0) -> TriMesh:
    """Watertight glass-wall mesh: the band 0 <= cavity_phi <= thickness."""
    cavity = cavity_sdf(spec)
    t = spec.thickness
    if dx <= 0:
        dx = max(t / 2.0, 1e-4)
    lo, hi = cavity.aabb()
    pad = t + 3 * dx

    def band(pts):
        phi = cavity.distance(pts)
        return np.maximum(-phi, phi - t)

    grid = sample_on_grid(band, lo - pad, hi + pad, dx)
    return marching_cubes(grid, 0.0)


def cavity_centroid(spec: ContainerSpec, dx: float = 0.002) -> np.ndarray:
    """Centroid of the cavity volume (voxel average); default rotation pivot."""
    cavity = cavity_sdf(spec)
    lo, hi = cavity.aabb()
    ax = [np.arange(lo[a] + dx / 2, hi[a], dx) for a in range(3)]
    pts = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 3)
    inside = cavity.distance(pts) < 0.0
    if not inside.any():
        raise BadContainerSpec("cavity encloses no volume")
    return pts[inside].mean(axis=0)


def cavity_volume(spec: ContainerSpec, dx: float = 0.002) -> float:
    cavity = cavity_sdf(spec)
    lo, hi = cavity.aabb()
    ax = [np.arange(lo[a] + dx / 2, hi[a], dx) for a in range(3)]
    pts = np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1).reshape(-1, 3)
    return float(np.count_nonzero(cavity.distance(pts) < 0.0)) * dx**3


def build_container(spec: ContainerSpec):
    """(cavity SDF, renderable shell mesh) for a validated spec."""
    return cavity_sdf(spec), shell_mesh(spec)


def _spec(name, shape, dims, thickness=0.003, parts=()):
    return ContainerSpec(name=name, shape=shape, dims=dims,
                         thickness=thickness, parts=parts)


# Lab-plausible inner dimensions (m). The real models behind the names are
# not published; these are chosen to cover the same shape variety and size
# spread (cap heights ~<= 0.12 m).
CATALOG = {c.name: c for c in [
    _spec("cube-bottle-L", "box", (0.08, 0.08, 0.08)),
    _spec("cube-bottle-S", "box", (0.05, 0.05, 0.05), 0.002),
    _spec("cube-flask", "box", (0.07, 0.07, 0.05)),
    _spec("rect-bottle-L", "box", (0.06, 0.04, 0.10)),
    _spec("rect-bottle-S", "box", (0.045, 0.03, 0.075), 0.002),
    _spec("rect-flask", "box", (0.09, 0.05, 0.06)),
    _spec("cylinder-L", "cylinder", (0.035, 0.09)),
    _spec("cylinder-S", "cylinder", (0.025, 0.06)),
    _spec("cylinder-G", "cylinder", (0.014, 0.12), 0.002),
    _spec("cylinder-tube", "cylinder", (0.010, 0.12), 0.002),
    _spec("tube-L", "cylinder", (0.012, 0.10), 0.002),
    _spec("tube-M", "cylinder", (0.010, 0.075), 0.002),
    _spec("tube-S", "cylinder", (0.008, 0.05), 0.0015),
    _spec("cone-flask-L", "cone", (0.045, 0.014, 0.09)),
    _spec("cone-flask-M", "cone", (0.035, 0.012, 0.07)),
    _spec("cone-flask-S", "cone", (0.025, 0.010, 0.05), 0.002),
    _spec("cone-bottle", "cone", (0.030, 0.015, 0.08)),
    _spec("cone-tube", "cone", (0.015, 0.010, 0.09), 0.002),
    _spec("cylinder-flask", "composite", (0.035, 0.06), 0.003, parts=(
        ("cylinder", (0.035, 0.06), (0.0, 0.0, 0.0)),
        ("cylinder", (0.012, 0.05), (0.0, 0.0, 0.045)),
    )),
    _spec("sphere-flask", "composite", (0.04,), 0.003, parts=(
        ("sphere", (0.04,), (0.0, 0.0, 0.0)),
        ("cylinder", (0.011, 0.05), (0.0, 0.0, 0.045)),
    )),
]}


def get_container(name: str) -> ContainerSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise BadContainerSpec(
            f"unknown container {name!r}; catalog: {sorted(CATALOG)}"
        ) from None
