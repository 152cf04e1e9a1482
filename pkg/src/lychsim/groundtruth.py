"""Object-level ground truth derived from rendered buffers.

Occlusion and truncation are pixel-counting estimators built on
instance-alone depth buffers: the alone buffer gives the object's
unoccluded footprint, the full-scene buffers say who actually won each
pixel, and an expanded viewport exposes silhouette area falling outside
the image window.  One expanded (E=3) alone render per object feeds every
estimator, since its central window aligns exactly with the E=1 viewport.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SimError, BAD_ARGS
from .geometry import Aabb, Pose, transform_points
from .renderer import render, render_instance_alone

DEPTH_EPS = 0.1          # cm; nearer-than tolerance for "covered by other geometry"
EDGE_MIN_FRACTION = 0.005  # occlusion-graph edges need >= 0.5% of the footprint
TRUNCATION_EXPAND = 3


@dataclass
class ObjectAnnotation:
    obj_id: str
    category: str
    pose: Pose
    bbox_3d: np.ndarray                      # (8, 3) world corners
    bbox_2d_visible: tuple | None            # (x0, y0, x1, y1) inclusive pixels
    bbox_2d_amodal: tuple | None             # original-window coords, may exceed bounds
    occlusion_ratio: float
    truncation_ratio: float
    fully_truncated: bool
    occluded_by: list = field(default_factory=list)
    part_visibility: dict = field(default_factory=dict)
    caption: str = ""                        # free text from the asset record


def _instance_value(full_fs, obj_id: str) -> int:
    try:
        return full_fs.instance_ids.index(obj_id) + 1
    except ValueError:
        raise SimError(BAD_ARGS, f"{obj_id} not in frame") from None


def _alone_window(alone):
    """(depth, part) central-window views of an alone buffer of any E."""
    return alone.window_view(), (None if alone.part is None
                                 else alone.window_view(alone.part))


def occlusion_ratio(full_fs, alone) -> float:
    """Fraction of the in-window unoccluded footprint covered by nearer geometry.

    A footprint pixel counts as occluded when the full scene resolves to a
    different instance whose depth beats the alone depth by DEPTH_EPS.
    Empty footprints (fully truncated objects) yield 0.
    """
    depth_w, _ = _alone_window(alone)
    if full_fs.depth is None or full_fs.instance is None:
        raise SimError(BAD_ARGS, "full frame needs depth and instance channels")
    if depth_w.shape != full_fs.depth.shape:
        raise SimError(BAD_ARGS, "alone/full resolution mismatch")
    footprint = np.isfinite(depth_w)
    n = int(footprint.sum())
    if n == 0:
        return 0.0
    value = _instance_value(full_fs, alone.obj_id)
    occluded = footprint & (full_fs.instance != value) \
        & (full_fs.depth < depth_w - DEPTH_EPS)
    return float(occluded.sum()) / n


def truncation_ratio(alone):
    """(ratio, fully_truncated) from an expanded-viewport alone buffer.

    ratio = 1 - (finite pixels inside the window) / (finite pixels overall);
    an object entirely beyond the expanded viewport reports (1.0, True),
    which is a lower bound on its true truncation.
    """
    finite = np.isfinite(alone.depth)
    total = int(finite.sum())
    if total == 0:
        return 1.0, True
    inside = int(np.isfinite(alone.window_view()).sum())
    return 1.0 - inside / total, inside == 0


def bbox_2d(full_fs, alone):
    """(visible, amodal) tight pixel rects for one object.

    visible comes from the full-scene instance mask (None when hidden);
    amodal from the alone buffer's finite pixels, expressed in
    original-window coordinates, so it may run negative or past the
    window edge.  Rects are (x0, y0, x1, y1), inclusive.
    """
    value = _instance_value(full_fs, alone.obj_id)
    visible = None
    mask = full_fs.instance == value
    if mask.any():
        ys, xs = np.nonzero(mask)
        visible = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    amodal = None
    finite = np.isfinite(alone.depth)
    if finite.any():
        ys, xs = np.nonzero(finite)
        amodal = (int(xs.min()) - alone.window_x, int(ys.min()) - alone.window_y,
                  int(xs.max()) - alone.window_x, int(ys.max()) - alone.window_y)
    return visible, amodal


def _graph_from_buffers(full_fs, windows):
    """Directed occlusion relation from per-object alone windows.

    windows: list of (obj_id, instance value, window depth).  A -> B when A
    wins at least max(1, EDGE_MIN_FRACTION * footprint(B)) pixels where both
    footprints overlap and A sits in front.
    """
    masks = [(obj_id, value, depth, np.isfinite(depth))
             for obj_id, value, depth in windows]
    edges = set()
    for a_id, a_val, a_depth, a_mask in masks:
        for b_id, _b_val, b_depth, b_mask in masks:
            if a_id == b_id:
                continue
            both = a_mask & b_mask
            if not both.any():
                continue
            in_front = both & (a_depth < b_depth - DEPTH_EPS) \
                & (full_fs.instance == a_val)
            threshold = max(1, int(np.ceil(EDGE_MIN_FRACTION * b_mask.sum())))
            if int(in_front.sum()) >= threshold:
                edges.add((a_id, b_id))
    return edges


def occlusion_graph(snapshot, cam, threads=None):
    """All (A occludes B) relations visible from one camera."""
    full_fs = render(snapshot, cam, channels=("depth", "instance"), threads=threads)
    windows = []
    for obj_id in snapshot.object_ids:
        alone = render_instance_alone(snapshot, cam, obj_id, expand=1,
                                      threads=threads, with_parts=False)
        windows.append((obj_id, _instance_value(full_fs, obj_id), alone.depth))
    return _graph_from_buffers(full_fs, windows)


def part_visibility(full_fs, alone, num_parts: int) -> dict:
    """Visible fraction per part: full-scene wins over the alone footprint."""
    depth_w, part_w = _alone_window(alone)
    if part_w is None:
        raise SimError(BAD_ARGS, "alone buffer was rendered without parts")
    value = _instance_value(full_fs, alone.obj_id)
    mine = full_fs.instance == value
    out = {}
    for pid in range(num_parts):
        denom = int((part_w == pid + 1).sum())
        if denom == 0:
            out[pid] = 0.0
            continue
        num = int((mine & (full_fs.part == pid + 1)).sum())
        out[pid] = num / denom
    return out


def annotate_all(snapshot, cam, threads=None) -> list:
    """One ObjectAnnotation per scene object, from shared rendered buffers."""
    if not snapshot.object_ids:
        return []
    full_fs = render(snapshot, cam, channels=("depth", "instance", "part"),
                     threads=threads)
    alones = {}
    for obj_id in snapshot.object_ids:
        alones[obj_id] = render_instance_alone(
            snapshot, cam, obj_id, expand=TRUNCATION_EXPAND, threads=threads)

    windows = [(obj_id, _instance_value(full_fs, obj_id),
                alones[obj_id].window_view()) for obj_id in snapshot.object_ids]
    edges = _graph_from_buffers(full_fs, windows)

    annotations = []
    for obj_id in snapshot.object_ids:
        obj = snapshot.object(obj_id)
        record = snapshot.catalog.get(obj.asset_path)
        alone = alones[obj_id]
        lo, hi = record.mesh.bounds()
        corners = transform_points(obj.pose, Aabb(lo, hi).corners())
        visible, amodal = bbox_2d(full_fs, alone)
        trunc, fully = truncation_ratio(alone)
        annotations.append(ObjectAnnotation(
            obj_id=obj_id,
            category=record.category,
            pose=obj.pose,
            bbox_3d=corners,
            bbox_2d_visible=visible,
            bbox_2d_amodal=amodal,
            occlusion_ratio=occlusion_ratio(full_fs, alone),
            truncation_ratio=trunc,
            fully_truncated=fully,
            occluded_by=sorted(a for a, b in edges if b == obj_id),
            part_visibility=part_visibility(full_fs, alone, record.mesh.num_parts),
            caption=record.caption,
        ))
    return annotations


def annotation_to_dict(ann: ObjectAnnotation) -> dict:
    """Wire form of an annotation (embedded in protocol responses)."""
    return {
        "obj_id": ann.obj_id,
        "category": ann.category,
        "pose": {
            "location": [float(c) for c in ann.pose.location],
            "rotation": list(ann.pose.rotation.as_tuple()),
            "scale": float(ann.pose.scale),
        },
        "bbox_3d": [[float(c) for c in corner] for corner in ann.bbox_3d],
        "bbox_2d_visible": (None if ann.bbox_2d_visible is None
                            else list(ann.bbox_2d_visible)),
        "bbox_2d_amodal": (None if ann.bbox_2d_amodal is None
                           else list(ann.bbox_2d_amodal)),
        "occlusion_ratio": ann.occlusion_ratio,
        "truncation_ratio": ann.truncation_ratio,
        "fully_truncated": ann.fully_truncated,
        "occluded_by": list(ann.occluded_by),
        "part_visibility": {str(k): v for k, v in ann.part_visibility.items()},
        "caption": ann.caption,
    }
