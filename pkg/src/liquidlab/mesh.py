"""Triangle meshes in meters: construction, measurement, factories."""

import logging

import numpy as np

from .errors import EmptyMesh, VolumeUndefined

log = logging.getLogger(__name__)

DEGENERATE_AREA_TOL = 1e-12  # m^2


class TriMesh:
    """Triangle mesh: vertices (n, 3) float64 meters, faces (m, 3) int indices.

    Degenerate faces (area below ``DEGENERATE_AREA_TOL``) are dropped at
    construction; ``dropped_degenerate`` counts them.
    """

    __slots__ = ("vertices", "faces", "dropped_degenerate")

    def __init__(self, vertices, faces, drop_degenerate=True):
        self.vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (
            self.faces.min() < 0 or self.faces.max() >= len(self.vertices)
        ):
            raise IndexError("face index out of range")
        self.dropped_degenerate = 0
        if drop_degenerate and len(self.faces):
            areas = self.face_areas()
            keep = areas > DEGENERATE_AREA_TOL
            self.dropped_degenerate = int(np.count_nonzero(~keep))
            if self.dropped_degenerate:
                log.warning("dropped %d degenerate triangles", self.dropped_degenerate)
                self.faces = self.faces[keep]

    def __repr__(self):
        return f"TriMesh({len(self.vertices)} vertices, {len(self.faces)} faces)"

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def triangle_corners(self):
        """(m, 3, 3) array of face corner positions."""
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        tri = self.triangle_corners()
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def is_watertight(self) -> bool:
        """True iff every undirected edge is shared by exactly two faces."""
        if not len(self.faces):
            return False
        edges = np.concatenate(
            [self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]
        )
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return bool(np.all(counts == 2))

    def transformed(self, pose) -> "TriMesh":
        return TriMesh(pose.apply(self.vertices), self.faces, drop_degenerate=False)

    def translated(self, offset) -> "TriMesh":
        return TriMesh(
            self.vertices + np.asarray(offset, dtype=np.float64),
            self.faces,
            drop_degenerate=False,
        )

    def scaled(self, s, origin=(0.0, 0.0, 0.0)) -> "TriMesh":
        origin = np.asarray(origin, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        return TriMesh(
            (self.vertices - origin) * s + origin, self.faces, drop_degenerate=False
        )


def mesh_volume(mesh: TriMesh) -> float:
    """Enclosed volume (m^3) via the divergence theorem.

    Positive for outward-oriented watertight meshes; raises VolumeUndefined
    otherwise.
    """
    if not mesh.is_watertight():
        raise VolumeUndefined("volume needs a watertight mesh")
    tri = mesh.triangle_corners()
    signed = np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2]))
    return float(signed.sum() / 6.0)


def mesh_aabb_dims(mesh: TriMesh):
    """Axis-aligned extents (length, width, height) = max - min per axis."""
    if not len(mesh.vertices):
        raise EmptyMesh("AABB of an empty mesh")
    ext = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    return (float(ext[0]), float(ext[1]), float(ext[2]))


def mesh_aabb(mesh: TriMesh):
    """(min, max) corners of the mesh's axis-aligned bounding box."""
    if not len(mesh.vertices):
        raise EmptyMesh("AABB of an empty mesh")
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


# mesh factories (tests and container shells)

_CUBE_FACES = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # z = min
        [4, 5, 6], [4, 6, 7],  # z = max
        [0, 1, 5], [0, 5, 4],  # y = min
        [2, 3, 7], [2, 7, 6],  # y = max
        [0, 4, 7], [0, 7, 3],  # x = min
        [1, 2, 6], [1, 6, 5],  # x = max
    ],
    dtype=np.int64,
)


def box_mesh(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box, outward-oriented, 12 triangles."""
    hx, hy, hz = np.asarray(size, dtype=np.float64) / 2.0
    cx, cy, cz = center
    verts = np.array(
        [
            [cx - hx, cy - hy, cz - hz],
            [cx + hx, cy - hy, cz - hz],
            [cx + hx, cy + hy, cz - hz],
            [cx - hx, cy + hy, cz - hz],
            [cx - hx, cy - hy, cz + hz],
            [cx + hx, cy - hy, cz + hz],
            [cx + hx, cy + hy, cz + hz],
            [cx - hx, cy + hy, cz + hz],
        ]
    )
    return TriMesh(verts, _CUBE_FACES)


def icosphere(radius=1.0, subdivisions=2, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Subdivided icosahedron projected onto a sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        midpoint = {}
        verts_list = list(verts)
        new_faces = []

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                p = verts_list[i] + verts_list[j]
                p = p / np.linalg.norm(p)
                midpoint[key] = len(verts_list)
                verts_list.append(p)
            return midpoint[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.asarray(verts_list)
        faces = np.asarray(new_faces, dtype=np.int64)
    return TriMesh(verts * radius + np.asarray(center, dtype=np.float64), faces)
