"""Scene acceleration structure: per-asset BLAS trees under an instance TLAS.

Immutable once built; safe to trace from any number of threads.  The BLAS
for an asset is built once and cached on its record, so ordinary worlds
(many instances, few unique assets) rebuild only the small top level per
snapshot.
"""

from dataclasses import dataclass

import numpy as np

from .bvh import build_bvh, triangle_bounds
from .geometry import Hit, Pose, Ray, transform_points
from .kernels import trace_region


def _asset_blas(record):
    """Reordered triangle arrays + BVH nodes for an asset, cached on the record."""
    if record._blas is None:
        v0, v1, v2 = record.mesh.triangle_corners()
        tri_min, tri_max = triangle_bounds(v0, v1, v2)
        tree = build_bvh(tri_min, tri_max, leaf_size=4)
        order = tree.order
        e1 = v1[order] - v0[order]
        e2 = v2[order] - v0[order]
        normals = np.cross(e1, e2)
        lengths = np.linalg.norm(normals, axis=1, keepdims=True)
        np.divide(normals, lengths, out=normals, where=lengths > 0)
        record._blas = {
            "nodes": tree,
            "v0": np.ascontiguousarray(v0[order]),
            "v1": np.ascontiguousarray(v1[order]),
            "v2": np.ascontiguousarray(v2[order]),
            "orig": np.ascontiguousarray(order.astype(np.int32)),
            "part": np.ascontiguousarray(record.mesh.face_parts[order]),
            "albedo": np.ascontiguousarray(record.triangle_albedo()[order]),
            "normal": np.ascontiguousarray(normals),
        }
    return record._blas


@dataclass
class SceneAccel:
    """Flattened arrays the trace kernel consumes, plus gather tables."""

    # TLAS
    t_nmin: np.ndarray
    t_nmax: np.ndarray
    t_na: np.ndarray
    t_nb: np.ndarray
    t_nleaf: np.ndarray
    t_order: np.ndarray
    # instances
    inst_amin: np.ndarray
    inst_amax: np.ndarray
    inst_rot: np.ndarray
    inst_loc: np.ndarray
    inst_scale: np.ndarray
    inst_asset: np.ndarray
    # BLAS pool
    b_nmin: np.ndarray
    b_nmax: np.ndarray
    b_na: np.ndarray
    b_nb: np.ndarray
    b_nleaf: np.ndarray
    b_node_ofs: np.ndarray
    tri_v0: np.ndarray
    tri_v1: np.ndarray
    tri_v2: np.ndarray
    tri_orig: np.ndarray
    b_tri_ofs: np.ndarray
    # per global reordered triangle, for channel gathers
    tri_part: np.ndarray
    tri_albedo: np.ndarray
    tri_normal: np.ndarray   # local-space unit geometric normals
    num_instances: int

    def trace(self, origin, dirs, out_t, out_inst, out_gtri,
              px0=0, px1=None, py0=0, py1=None, t_min=0.0, t_max=np.inf):
        h, w = out_t.shape
        trace_region(
            self.t_nmin, self.t_nmax, self.t_na, self.t_nb, self.t_nleaf,
            self.t_order,
            self.inst_amin, self.inst_amax, self.inst_rot, self.inst_loc,
            self.inst_scale, self.inst_asset,
            self.b_nmin, self.b_nmax, self.b_na, self.b_nb, self.b_nleaf,
            self.b_node_ofs,
            self.tri_v0, self.tri_v1, self.tri_v2, self.tri_orig, self.b_tri_ofs,
            np.asarray(origin, dtype=np.float64), dirs,
            float(t_min), float(t_max),
            int(px0), int(w if px1 is None else px1),
            int(py0), int(h if py1 is None else py1),
            out_t, out_inst, out_gtri)

    def cast(self, ray: Ray) -> Hit | None:
        """Nearest hit for a single ray, honoring its (t_min, t_max] window."""
        dirs = np.ascontiguousarray(ray.direction, dtype=np.float64).reshape(1, 1, 3)
        out_t = np.full((1, 1), np.inf)
        out_inst = np.full((1, 1), -1, dtype=np.int32)
        out_gtri = np.full((1, 1), -1, dtype=np.int32)
        self.trace(ray.origin, dirs, out_t, out_inst, out_gtri,
                   t_min=ray.t_min, t_max=ray.t_max)
        slot = int(out_inst[0, 0])
        if slot < 0:
            return None
        gtri = int(out_gtri[0, 0])
        t = float(out_t[0, 0])
        normal = self.inst_rot[slot] @ self.tri_normal[gtri]
        if float(normal @ ray.direction) > 0.0:
            normal = -normal
        return Hit(
            t=t,
            point=ray.origin + t * ray.direction,
            geometric_normal=normal,
            instance_id=slot,
            part_id=int(self.tri_part[gtri]),
            triangle_index=int(self.tri_orig[gtri]),
        )


def build_scene_accel(entries) -> SceneAccel:
    """Build the two-level structure over (AssetRecord, Pose) pairs.

    Instance slots follow the given order; that order defines the ids used
    by the deterministic tie rule and the instance buffer values (slot + 1).
    """
    entries = list(entries)
    records = []
    record_index = {}
    inst_asset = np.empty(len(entries), dtype=np.int32)
    inst_rot = np.empty((len(entries), 3, 3))
    inst_loc = np.empty((len(entries), 3))
    inst_scale = np.empty(len(entries))
    inst_amin = np.empty((len(entries), 3))
    inst_amax = np.empty((len(entries), 3))

    for i, (record, pose) in enumerate(entries):
        key = id(record)
        if key not in record_index:
            record_index[key] = len(records)
            records.append(record)
        inst_asset[i] = record_index[key]
        inst_rot[i] = pose.matrix()
        inst_loc[i] = pose.location
        inst_scale[i] = pose.scale
        pts = transform_points(pose, record.mesh.vertices)
        inst_amin[i] = pts.min(axis=0)
        inst_amax[i] = pts.max(axis=0)

    blas = [_asset_blas(r) for r in records]
    if blas:
        node_counts = [b["nodes"].num_nodes for b in blas]
        tri_counts = [len(b["orig"]) for b in blas]
        b_node_ofs = np.cumsum([0] + node_counts[:-1]).astype(np.int32)
        b_tri_ofs = np.cumsum([0] + tri_counts[:-1]).astype(np.int32)
        b_nmin = np.vstack([b["nodes"].node_min for b in blas])
        b_nmax = np.vstack([b["nodes"].node_max for b in blas])
        b_na = np.concatenate([b["nodes"].node_a for b in blas])
        b_nb = np.concatenate([b["nodes"].node_b for b in blas])
        b_nleaf = np.concatenate([b["nodes"].node_leaf for b in blas])
        tri_v0 = np.vstack([b["v0"] for b in blas])
        tri_v1 = np.vstack([b["v1"] for b in blas])
        tri_v2 = np.vstack([b["v2"] for b in blas])
        tri_orig = np.concatenate([b["orig"] for b in blas])
        tri_part = np.concatenate([b["part"] for b in blas])
        tri_albedo = np.vstack([b["albedo"] for b in blas])
        tri_normal = np.vstack([b["normal"] for b in blas])
    else:
        b_node_ofs = np.zeros(0, dtype=np.int32)
        b_tri_ofs = np.zeros(0, dtype=np.int32)
        b_nmin = np.zeros((0, 3))
        b_nmax = np.zeros((0, 3))
        b_na = np.zeros(0, dtype=np.int32)
        b_nb = np.zeros(0, dtype=np.int32)
        b_nleaf = np.zeros(0, dtype=np.uint8)
        tri_v0 = np.zeros((0, 3))
        tri_v1 = np.zeros((0, 3))
        tri_v2 = np.zeros((0, 3))
        tri_orig = np.zeros(0, dtype=np.int32)
        tri_part = np.zeros(0, dtype=np.uint16)
        tri_albedo = np.zeros((0, 3), dtype=np.float32)
        tri_normal = np.zeros((0, 3))

    tlas = build_bvh(inst_amin, inst_amax, leaf_size=2)

    return SceneAccel(
        t_nmin=tlas.node_min, t_nmax=tlas.node_max,
        t_na=tlas.node_a, t_nb=tlas.node_b, t_nleaf=tlas.node_leaf,
        t_order=tlas.order,
        inst_amin=inst_amin, inst_amax=inst_amax, inst_rot=inst_rot,
        inst_loc=inst_loc, inst_scale=inst_scale, inst_asset=inst_asset,
        b_nmin=b_nmin, b_nmax=b_nmax, b_na=b_na, b_nb=b_nb, b_nleaf=b_nleaf,
        b_node_ofs=b_node_ofs,
        tri_v0=tri_v0, tri_v1=tri_v1, tri_v2=tri_v2, tri_orig=tri_orig,
        b_tri_ofs=b_tri_ofs,
        tri_part=tri_part, tri_albedo=tri_albedo, tri_normal=tri_normal,
        num_instances=len(entries),
    )


def accel_for_mesh(record, pose: Pose | None = None) -> SceneAccel:
    """Single-instance accel: the BVH-over-one-mesh convenience for tests."""
    return build_scene_accel([(record, pose or Pose())])
