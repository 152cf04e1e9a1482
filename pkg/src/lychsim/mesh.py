"""Triangle meshes, a Wavefront-OBJ-compatible loader/writer, and primitives.

Meshes carry a per-triangle part id plus a part-name table.  The OBJ subset
understood here is `v`, `vn`, `f` and `g`; each `g` group becomes a part in
order of first appearance.  Faces with more than three vertices are fan
triangulated.
"""

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    pass


@dataclass
class TriangleMesh:
    vertices: np.ndarray          # (V, 3) float64
    faces: np.ndarray             # (F, 3) int32 vertex indices
    face_parts: np.ndarray        # (F,) uint16 part id per triangle
    part_names: list = field(default_factory=lambda: ["default"])

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int32).reshape(-1, 3)
        if self.face_parts is None:
            self.face_parts = np.zeros(len(self.faces), dtype=np.uint16)
        self.face_parts = np.asarray(self.face_parts, dtype=np.uint16).reshape(-1)
        if len(self.face_parts) != len(self.faces):
            raise MeshError("face_parts length must match faces")

    @property
    def num_triangles(self):
        return len(self.faces)

    @property
    def num_parts(self):
        return len(self.part_names)

    def triangle_corners(self):
        """Return (F,3) arrays v0, v1, v2 of triangle corner positions."""
        v = self.vertices
        f = self.faces
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def bounds(self):
        if len(self.vertices) == 0:
            raise MeshError("asset_empty")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def transformed(self, matrix=None, scale=1.0, translation=None):
        """New mesh with vertices mapped by rotation, then scale, then offset."""
        verts = self.vertices
        if matrix is not None:
            verts = verts @ np.asarray(matrix, dtype=np.float64).T
        verts = verts * float(scale)
        if translation is not None:
            verts = verts + np.asarray(translation, dtype=np.float64)
        return TriangleMesh(verts, self.faces.copy(), self.face_parts.copy(),
                            list(self.part_names))


def load_obj(path) -> TriangleMesh:
    """Load the OBJ subset: v/vn/f with g groups mapped to parts."""
    vertices = []
    faces = []
    parts = []
    part_names = []
    part_index = {}
    current_part = None

    def part_for(name):
        if name not in part_index:
            part_index[name] = len(part_names)
            part_names.append(name)
        return part_index[name]

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            tag = tokens[0]
            if tag == "v":
                if len(tokens) < 4:
                    raise MeshError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(t) for t in tokens[1:4]])
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad vertex: {exc}") from None
            elif tag == "g":
                name = tokens[1] if len(tokens) > 1 else "default"
                current_part = part_for(name)
            elif tag == "f":
                if len(tokens) < 4:
                    raise MeshError(f"{path}:{lineno}: face needs >= 3 vertices")
                try:
                    idx = [int(t.split("/")[0]) - 1 for t in tokens[1:]]
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad face index: {exc}") from None
                if any(i < 0 or i >= len(vertices) for i in idx):
                    raise MeshError(f"{path}:{lineno}: face index out of range")
                pid = current_part if current_part is not None else part_for("default")
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
                    parts.append(pid)
            elif tag in ("vn", "vt", "s", "o", "usemtl", "mtllib"):
                continue
            else:
                raise MeshError(f"{path}:{lineno}: unsupported directive {tag!r}")

    if not part_names:
        part_names = ["default"]
    if not faces:
        raise MeshError(f"{path}: no faces")
    return TriangleMesh(np.array(vertices), np.array(faces),
                        np.array(parts, dtype=np.uint16), part_names)


def save_obj(mesh: TriangleMesh, path):
    """Write the mesh back out in the same OBJ subset (round-trip safe)."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        order = np.argsort(mesh.face_parts, kind="stable")
        last_part = -1
        for fi in order:
            pid = int(mesh.face_parts[fi])
            if pid != last_part:
                fh.write(f"g {mesh.part_names[pid]}\n")
                last_part = pid
            a, b, c = (int(i) + 1 for i in mesh.faces[fi])
            fh.write(f"f {a} {b} {c}\n")


def _require_positive(name, *dims):
    for d in dims:
        if not (float(d) > 0.0):
            raise MeshError(f"{name}: dimensions must be positive")


def make_box(size_x, size_y, size_z, parts=False) -> TriangleMesh:
    """Closed box with bottom-center at the origin; 12 triangles.

    With parts=True each face gets its own part id (order: -x, +x, -y, +y,
    -z, +z), two triangles per part.
    """
    _require_positive("box", size_x, size_y, size_z)
    hx, hy = size_x / 2.0, size_y / 2.0
    z0, z1 = 0.0, float(size_z)
    v = np.array([
        [-hx, -hy, z0], [hx, -hy, z0], [hx, hy, z0], [-hx, hy, z0],
        [-hx, -hy, z1], [hx, -hy, z1], [hx, hy, z1], [-hx, hy, z1],
    ])
    # Outward-facing winding per face.
    face_quads = [
        ([0, 4, 7, 3], "face_neg_x"),
        ([1, 2, 6, 5], "face_pos_x"),
        ([0, 1, 5, 4], "face_neg_y"),
        ([3, 7, 6, 2], "face_pos_y"),
        ([0, 3, 2, 1], "face_neg_z"),
        ([4, 5, 6, 7], "face_pos_z"),
    ]
    faces = []
    pids = []
    names = [] if parts else ["default"]
    for pi, (quad, name) in enumerate(face_quads):
        a, b, c, d = quad
        faces += [[a, b, c], [a, c, d]]
        pid = pi if parts else 0
        pids += [pid, pid]
        if parts:
            names.append(name)
    return TriangleMesh(v, np.array(faces), np.array(pids, dtype=np.uint16), names)


def make_plane(size_x, size_y) -> TriangleMesh:
    """Flat rectangle in the XY plane at z=0 (two triangles, +Z normal)."""
    _require_positive("plane", size_x, size_y)
    hx, hy = size_x / 2.0, size_y / 2.0
    v = np.array([[-hx, -hy, 0.0], [hx, -hy, 0.0], [hx, hy, 0.0], [-hx, hy, 0.0]])
    faces = np.array([[0, 1, 2], [0, 2, 3]])
    return TriangleMesh(v, faces, np.zeros(2, dtype=np.uint16))


def make_cylinder(radius, height, segments=24, parts=False) -> TriangleMesh:
    """Closed cylinder about +Z with its base at z=0."""
    _require_positive("cylinder", radius, height)
    segments = max(3, int(segments))
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    bottom = np.column_stack([ring, np.zeros(segments)])
    top = np.column_stack([ring, np.full(segments, float(height))])
    v = np.vstack([bottom, top, [[0.0, 0.0, 0.0]], [[0.0, 0.0, float(height)]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    pids = []
    side, cap_b, cap_t = (0, 1, 2) if parts else (0, 0, 0)
    for i in range(segments):
        j = (i + 1) % segments
        faces += [[i, j, segments + j], [i, segments + j, segments + i]]
        pids += [side, side]
        faces.append([cb, j, i])
        pids.append(cap_b)
        faces.append([ct, segments + i, segments + j])
        pids.append(cap_t)
    names = ["side", "cap_bottom", "cap_top"] if parts else ["default"]
    return TriangleMesh(v, np.array(faces), np.array(pids, dtype=np.uint16), names)


def make_sphere(radius, subdivisions=3) -> TriangleMesh:
    """Icosphere of the given radius, centered at (0, 0, radius)."""
    _require_positive("sphere", radius)
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts[0])
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = [v for v in verts]
    for _ in range(int(subdivisions)):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new_faces

    v = np.array(verts) * float(radius)
    v[:, 2] += float(radius)
    return TriangleMesh(v, np.array(faces), np.zeros(len(faces), dtype=np.uint16))


_PRIMITIVES = {"box": make_box, "plane": make_plane,
               "cylinder": make_cylinder, "sphere": make_sphere}


def make_primitive(kind, dimensions, parts=False) -> TriangleMesh:
    """Build a test primitive: box(x,y,z), plane(x,y), cylinder(r,h), sphere(r).

    All primitives come out canonically placed (bottom-center at the local
    origin) with outward normals.
    """
    if kind not in _PRIMITIVES:
        raise MeshError(f"unknown primitive kind {kind!r}")
    dims = [float(d) for d in np.atleast_1d(dimensions)]
    if kind == "box":
        if len(dims) == 1:
            dims = dims * 3
        return make_box(*dims[:3], parts=parts)
    if kind == "plane":
        if len(dims) == 1:
            dims = dims * 2
        return make_plane(*dims[:2])
    if kind == "cylinder":
        return make_cylinder(dims[0], dims[1] if len(dims) > 1 else dims[0],
                             parts=parts)
    if len(dims) > 1:
        return make_sphere(dims[0], subdivisions=int(dims[1]))
    return make_sphere(dims[0])
