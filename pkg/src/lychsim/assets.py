"""Asset catalog: annotated meshes behind a unified lookup.

Every asset is canonicalized at load so downstream code can rely on one
convention: bottom-center of the mesh at the local origin (min-Z = 0, base
AABB centered in XY), forward facing +X, size already at canonical scale.
The catalog does not care whether an entry came from a mesh file or a
built-in primitive; records behave identically afterwards.
"""

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import SimError, ASSET_NOT_FOUND, ASSET_EMPTY, EXTENT_UNAVAILABLE
from .geometry import Rotator, rotator_to_matrix
from .mesh import TriangleMesh, load_obj, make_primitive

log = logging.getLogger(__name__)

_MASK64 = 0xFFFFFFFFFFFFFFFF

_KNOWN_FIELDS = {
    "asset_path", "category", "canonical_scale", "pose_alignment", "caption",
    "kind", "mesh_file", "primitive", "extent_unavailable", "sampling_offset",
}


class CatalogError(ValueError):
    pass


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def part_albedo(asset_path: str, part_id: int) -> np.ndarray:
    """Deterministic flat color in [0.2, 0.9]^3 for an (asset, part) pair."""
    h = _splitmix64(_fnv1a64(asset_path.encode("utf-8")) ^ (part_id & _MASK64))
    rgb = np.array([(h >> s) & 0xFF for s in (0, 8, 16)], dtype=np.float64)
    return 0.2 + 0.7 * rgb / 255.0


@dataclass
class AssetRecord:
    asset_path: str
    mesh: TriangleMesh          # canonicalized
    category: str = "misc"
    canonical_scale: float = 1.0
    pose_alignment: Rotator = field(default_factory=Rotator)
    sampling_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    caption: str = ""
    kind: str = "static"        # {static, composite}
    extent_unavailable: bool = False

    # lazily built acceleration/shading data, keyed off the canonical mesh
    _blas: object = field(default=None, repr=False, compare=False)
    _tri_albedo: object = field(default=None, repr=False, compare=False)

    def bounds(self):
        return self.mesh.bounds()

    def extents(self) -> np.ndarray:
        lo, hi = self.mesh.bounds()
        return hi - lo

    def triangle_albedo(self) -> np.ndarray:
        if self._tri_albedo is None:
            palette = np.stack([part_albedo(self.asset_path, p)
                                for p in range(self.mesh.num_parts)])
            self._tri_albedo = palette[self.mesh.face_parts].astype(np.float32)
        return self._tri_albedo


def canonicalize(raw: TriangleMesh, pose_alignment: Rotator = Rotator(),
                 canonical_scale: float = 1.0) -> TriangleMesh:
    """Rotate by the alignment, scale, then shift bottom-center to the origin."""
    if raw.num_triangles == 0 or len(raw.vertices) == 0:
        raise SimError(ASSET_EMPTY)
    m = raw.transformed(matrix=rotator_to_matrix(pose_alignment),
                        scale=canonical_scale)
    lo, hi = m.bounds()
    offset = np.array([-(lo[0] + hi[0]) / 2.0, -(lo[1] + hi[1]) / 2.0, -lo[2]])
    return m.transformed(translation=offset)


class Catalog:
    """Immutable-after-load map from asset path to AssetRecord."""

    def __init__(self, manifest_path: str | None = None):
        self.manifest_path = manifest_path
        self._records: dict[str, AssetRecord] = {}
        self._paths: list[str] = []

    def __len__(self):
        return len(self._records)

    def __contains__(self, asset_path):
        return asset_path in self._records

    @property
    def asset_paths(self):
        return list(self._paths)

    def get(self, asset_path: str) -> AssetRecord:
        rec = self._records.get(asset_path)
        if rec is None:
            raise SimError(ASSET_NOT_FOUND, asset_path)
        return rec

    def add(self, record: AssetRecord) -> AssetRecord:
        if record.asset_path in self._records:
            raise CatalogError(f"duplicate asset_path {record.asset_path!r}")
        self._records[record.asset_path] = record
        self._paths.append(record.asset_path)
        return record

    def add_mesh(self, asset_path: str, raw: TriangleMesh, **kwargs) -> AssetRecord:
        """Register a raw mesh, canonicalizing it with the given annotations."""
        alignment = kwargs.pop("pose_alignment", Rotator())
        if not isinstance(alignment, Rotator):
            alignment = Rotator(*alignment)
        scale = float(kwargs.pop("canonical_scale", 1.0))
        mesh = canonicalize(raw, alignment, scale)
        rec = AssetRecord(asset_path=asset_path, mesh=mesh,
                          pose_alignment=alignment, canonical_scale=scale,
                          **kwargs)
        return self.add(rec)

    def add_primitive(self, asset_path: str, shape: str, dimensions,
                      parts: bool = False, **kwargs) -> AssetRecord:
        """Register a built-in primitive (shape: box/plane/cylinder/sphere)."""
        return self.add_mesh(asset_path, make_primitive(shape, dimensions, parts),
                             **kwargs)

    def categories(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for p in self._paths:
            out.setdefault(self._records[p].category, []).append(p)
        return out

    def paths_in_category(self, category: str) -> list[str]:
        return [p for p in self._paths if self._records[p].category == category]

    def get_mesh_extent(self, asset_path: str) -> np.ndarray:
        """Full canonical AABB extents (cm); some assets refuse on purpose."""
        rec = self.get(asset_path)
        if rec.extent_unavailable:
            raise SimError(EXTENT_UNAVAILABLE, asset_path)
        return rec.extents()


def load_catalog(manifest_path: str) -> Catalog:
    """Load a catalog from a JSON manifest.

    Each entry carries the asset annotations plus either a mesh_file
    (OBJ subset, relative to the manifest) or a primitive spec
    {kind, dimensions, parts?}.
    """
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CatalogError(f"cannot read manifest: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CatalogError(
            f"{manifest_path}:{exc.lineno}: malformed manifest: {exc.msg}") from None

    if not isinstance(doc, dict) or "assets" not in doc:
        raise CatalogError(f"{manifest_path}: manifest must contain an 'assets' list")
    root = os.path.dirname(os.path.abspath(manifest_path))
    catalog = Catalog(manifest_path=manifest_path)

    for i, entry in enumerate(doc["assets"]):
        if not isinstance(entry, dict) or "asset_path" not in entry:
            raise CatalogError(f"{manifest_path}: asset #{i} missing asset_path")
        unknown = set(entry) - _KNOWN_FIELDS
        if unknown:
            log.warning("manifest %s asset %r: ignoring unknown fields %s",
                        manifest_path, entry["asset_path"], sorted(unknown))
        path = entry["asset_path"]
        align = entry.get("pose_alignment", [0.0, 0.0, 0.0])
        common = dict(
            category=entry.get("category", "misc"),
            canonical_scale=float(entry.get("canonical_scale", 1.0)),
            pose_alignment=Rotator(*align),
            caption=entry.get("caption", ""),
            kind=entry.get("kind", "static"),
            extent_unavailable=bool(entry.get("extent_unavailable", False)),
        )
        if common["kind"] not in ("static", "composite"):
            raise CatalogError(f"{manifest_path}: asset {path!r}: bad kind")
        try:
            if "primitive" in entry:
                prim = entry["primitive"]
                catalog.add_primitive(path, prim["kind"], prim["dimensions"],
                                      parts=bool(prim.get("parts", False)), **common)
            elif "mesh_file" in entry:
                mesh_path = os.path.join(root, entry["mesh_file"])
                if not os.path.exists(mesh_path):
                    raise SimError(ASSET_NOT_FOUND, mesh_path)
                catalog.add_mesh(path, load_obj(mesh_path), **common)
            else:
                raise CatalogError(
                    f"{manifest_path}: asset {path!r}: needs mesh_file or primitive")
        except CatalogError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CatalogError(f"{manifest_path}: asset {path!r}: {exc}") from None
    return catalog
