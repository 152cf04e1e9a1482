"""The mutable 3D world: objects, cameras, scene parameters, snapshots.

All mutations are serialized through one re-entrant lock and are atomic: a
call that raises leaves the observable world exactly as it was.  Renders
operate on an immutable snapshot taken at dispatch time, so long renders
never block later mutations and never observe torn state.
"""

import json
import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from .accel import build_scene_accel
from .assets import Catalog
from .errors import (SimError, BAD_ARGS, CAMERA_NOT_FOUND, FAILED_TO_SPAWN,
                     OBJECT_EXISTS, OBJECT_NOT_FOUND, ROTATION_LOCKED,
                     ASSET_NOT_FOUND, VERSION_MISMATCH)
from .geometry import Aabb, Pose, Rotator, normalize, vec3, world_aabb_of_vertices
from . import renderer

SNAPSHOT_VERSION = 1

COLLISION_MODES = ("default", "skip_if_colliding", "adjust_if_possible")

# adjust_if_possible ring search: radii k*s for k=1..16 with s = 0.25 * the
# larger horizontal AABB extent, 8k angles per ring starting at +X.
NUDGE_RINGS = 16
NUDGE_STEP_FRACTION = 0.25


@dataclass
class SceneObject:
    obj_id: str
    asset_path: str
    pose: Pose
    lock_rotation: bool = False
    spawn_order: int = 0
    world_aabb: Aabb | None = None


@dataclass
class CameraState:
    cam_id: int
    pose: Pose = field(default_factory=Pose)
    horizontal_fov: float = 90.0
    width: int = 640
    height: int = 480


@dataclass
class SceneParams:
    sun_direction: np.ndarray = field(
        default_factory=lambda: normalize([1.0, -1.0, -2.0]))
    sun_intensity: float = 1.0
    sun_color: tuple = (1.0, 1.0, 1.0)
    ambient_intensity: float = 0.2
    fog_visibility: float = math.inf      # cm; inf disables fog
    fog_color: tuple = (0.7, 0.7, 0.75)
    rain_params: dict = field(default_factory=dict)


class WorldSnapshot:
    """Immutable scene state plus lazily built acceleration structures."""

    def __init__(self, catalog: Catalog, objects, cameras, params: SceneParams):
        self.catalog = catalog
        self.objects = tuple(objects)
        self.cameras = dict(cameras)
        self.params = params
        self.object_ids = tuple(o.obj_id for o in self.objects)
        self._by_id = {o.obj_id: o for o in self.objects}
        self._accel = None
        self._single = {}
        self._lock = threading.Lock()

    def object(self, obj_id: str) -> SceneObject:
        obj = self._by_id.get(obj_id)
        if obj is None:
            raise SimError(OBJECT_NOT_FOUND, obj_id)
        return obj

    def world_aabb(self, obj_id: str) -> Aabb:
        return self.object(obj_id).world_aabb

    def camera(self, cam_id: int) -> CameraState:
        cam = self.cameras.get(int(cam_id))
        if cam is None:
            raise SimError(CAMERA_NOT_FOUND, str(cam_id))
        return cam

    def accel(self):
        with self._lock:
            if self._accel is None:
                self._accel = build_scene_accel(
                    (self.catalog.get(o.asset_path), o.pose) for o in self.objects)
            return self._accel

    def single_accel(self, obj_id: str):
        obj = self.object(obj_id)
        with self._lock:
            if obj_id not in self._single:
                self._single[obj_id] = build_scene_accel(
                    [(self.catalog.get(obj.asset_path), obj.pose)])
            return self._single[obj_id]


def _candidate_aabb(record, pose: Pose) -> Aabb:
    return world_aabb_of_vertices(record.mesh.vertices, pose)


class SceneWorld:
    """Single-writer world registry; see module docstring for the model."""

    def __init__(self, catalog: Catalog | None = None):
        self.catalog = catalog if catalog is not None else Catalog()
        self._lock = threading.RLock()
        self._objects: dict[str, SceneObject] = {}
        self._cameras: dict[int, CameraState] = {0: CameraState(cam_id=0)}
        self._params = SceneParams()
        self._spawn_counter = 0
        self._version = 0
        self._snapshot = None

    # -- helpers -----------------------------------------------------------

    def _bump(self):
        self._version += 1
        self._snapshot = None

    def _get(self, obj_id) -> SceneObject:
        obj = self._objects.get(obj_id)
        if obj is None:
            raise SimError(OBJECT_NOT_FOUND, str(obj_id))
        return obj

    def snapshot(self) -> WorldSnapshot:
        with self._lock:
            if self._snapshot is None:
                self._snapshot = WorldSnapshot(
                    self.catalog,
                    [replace(o) for o in self._objects.values()],
                    {k: replace(v) for k, v in self._cameras.items()},
                    replace(self._params),
                )
            return self._snapshot

    # -- spawning ----------------------------------------------------------

    def _free_pose(self, record, pose: Pose, mode: str) -> Pose:
        """Resolve the collision mode, returning the final pose or raising."""
        others = [o.world_aabb for o in self._objects.values()]

        def collides(aabb):
            return any(aabb.overlaps(b) for b in others)

        box = _candidate_aabb(record, pose)
        if mode == "default" or not collides(box):
            return pose
        if mode == "skip_if_colliding":
            raise SimError(FAILED_TO_SPAWN, "location overlaps existing geometry")

        step = NUDGE_STEP_FRACTION * max(box.extents[0], box.extents[1])
        if step <= 0.0:
            raise SimError(FAILED_TO_SPAWN, "degenerate extents")
        base = pose.location
        for k in range(1, NUDGE_RINGS + 1):
            radius = k * step
            n_angles = 8 * k
            for j in range(n_angles):
                ang = 2.0 * math.pi * j / n_angles
                loc = base + np.array([radius * math.cos(ang),
                                       radius * math.sin(ang), 0.0])
                cand = replace(pose, location=loc)
                if not collides(_candidate_aabb(record, cand)):
                    return cand
        raise SimError(FAILED_TO_SPAWN, "no free spot within nudge radius")

    def spawn_object(self, obj_id, obj_path, location=(0.0, 0.0, 0.0),
                     rotation=(0.0, 0.0, 0.0), scale=1.0,
                     collision_handling="default", lock_rotation=False) -> SceneObject:
        """Register a new object; the three collision modes decide placement."""
        if not isinstance(obj_id, str) or not obj_id:
            raise SimError(BAD_ARGS, "obj_id must be a non-empty string")
        if collision_handling not in COLLISION_MODES:
            raise SimError(BAD_ARGS, f"bad collision_handling {collision_handling!r}")
        try:
            pose = Pose(location=vec3(location), rotation=Rotator(*rotation),
                        scale=scale)
        except (TypeError, ValueError) as exc:
            raise SimError(BAD_ARGS, str(exc)) from None
        with self._lock:
            if obj_id in self._objects:
                raise SimError(OBJECT_EXISTS, obj_id)
            try:
                record = self.catalog.get(obj_path)
            except SimError as exc:
                raise SimError(FAILED_TO_SPAWN, exc.detail) from None
            final = self._free_pose(record, pose, collision_handling)
            obj = SceneObject(
                obj_id=obj_id, asset_path=obj_path, pose=final,
                lock_rotation=bool(lock_rotation),
                spawn_order=self._spawn_counter,
                world_aabb=_candidate_aabb(record, final))
            self._spawn_counter += 1
            self._objects[obj_id] = obj
            self._bump()
            return obj

    # -- object editing ----------------------------------------------------

    def _reposed(self, obj: SceneObject, pose: Pose) -> SceneObject:
        record = self.catalog.get(obj.asset_path)
        return replace(obj, pose=pose, world_aabb=_candidate_aabb(record, pose))

    def set_object_location(self, obj_id, location):
        with self._lock:
            obj = self._get(obj_id)
            try:
                pose = replace(obj.pose, location=vec3(location))
            except (TypeError, ValueError) as exc:
                raise SimError(BAD_ARGS, str(exc)) from None
            self._objects[obj_id] = self._reposed(obj, pose)
            self._bump()

    def set_object_rotation(self, obj_id, rotation):
        with self._lock:
            obj = self._get(obj_id)
            if obj.lock_rotation:
                raise SimError(ROTATION_LOCKED, obj_id)
            try:
                pose = replace(obj.pose, rotation=Rotator(*rotation))
            except (TypeError, ValueError) as exc:
                raise SimError(BAD_ARGS, str(exc)) from None
            self._objects[obj_id] = self._reposed(obj, pose)
            self._bump()

    def update_object(self, obj_id, location=None, rotation=None, scale=None):
        """Partial pose update, atomic across the given fields."""
        with self._lock:
            obj = self._get(obj_id)
            if rotation is not None and obj.lock_rotation:
                raise SimError(ROTATION_LOCKED, obj_id)
            pose = obj.pose
            try:
                if location is not None:
                    pose = replace(pose, location=vec3(location))
                if rotation is not None:
                    pose = replace(pose, rotation=Rotator(*rotation))
                if scale is not None:
                    pose = replace(pose, scale=float(scale))
            except (TypeError, ValueError) as exc:
                raise SimError(BAD_ARGS, str(exc)) from None
            self._objects[obj_id] = self._reposed(obj, pose)
            self._bump()

    def delete_object(self, obj_id):
        with self._lock:
            self._get(obj_id)
            del self._objects[obj_id]
            self._bump()

    def clear(self):
        with self._lock:
            self._objects.clear()
            self._bump()

    # -- queries -----------------------------------------------------------

    def list_objects(self) -> list:
        with self._lock:
            return list(self._objects.keys())

    def get_object_location(self, obj_id) -> np.ndarray:
        with self._lock:
            return self._get(obj_id).pose.location.copy()

    def get_object_rotation(self, obj_id) -> Rotator:
        with self._lock:
            return self._get(obj_id).pose.rotation

    def get_object(self, obj_id) -> SceneObject:
        with self._lock:
            return replace(self._get(obj_id))

    # -- cameras -----------------------------------------------------------

    def set_camera(self, cam_id=0, location=None, rotation=None, fov=None,
                   width=None, height=None):
        """Create-or-update a camera; camera 0 always exists."""
        cam_id = int(cam_id)
        if cam_id < 0:
            raise SimError(BAD_ARGS, "cam_id must be >= 0")
        with self._lock:
            cam = self._cameras.get(cam_id, CameraState(cam_id=cam_id))
            pose = cam.pose
            try:
                if location is not None:
                    pose = replace(pose, location=vec3(location))
                if rotation is not None:
                    pose = replace(pose, rotation=Rotator(*rotation))
            except (TypeError, ValueError) as exc:
                raise SimError(BAD_ARGS, str(exc)) from None
            if fov is not None:
                fov = float(fov)
                if not (1.0 <= fov <= 179.0):
                    raise SimError(BAD_ARGS, "fov must be within [1, 179]")
            if width is not None or height is not None:
                width = int(width if width is not None else cam.width)
                height = int(height if height is not None else cam.height)
                if width < 1 or height < 1:
                    raise SimError(BAD_ARGS, "resolution must be >= 1x1")
            self._cameras[cam_id] = CameraState(
                cam_id=cam_id, pose=pose,
                horizontal_fov=fov if fov is not None else cam.horizontal_fov,
                width=width if width is not None else cam.width,
                height=height if height is not None else cam.height)
            self._bump()

    def get_camera(self, cam_id=0) -> CameraState:
        with self._lock:
            cam = self._cameras.get(int(cam_id))
            if cam is None:
                raise SimError(CAMERA_NOT_FOUND, str(cam_id))
            return replace(cam)

    # -- scene params ------------------------------------------------------

    def set_scene_params(self, sun_direction=None, sun_intensity=None,
                         sun_color=None, ambient_intensity=None,
                         fog_visibility=None, fog_color=None, rain_params=None):
        with self._lock:
            p = self._params
            if sun_direction is not None:
                v = vec3(sun_direction)
                if float(np.linalg.norm(v)) == 0.0:
                    raise SimError(BAD_ARGS, "sun_direction must be nonzero")
                p = replace(p, sun_direction=normalize(v))
            if sun_intensity is not None:
                if float(sun_intensity) < 0:
                    raise SimError(BAD_ARGS, "sun_intensity must be >= 0")
                p = replace(p, sun_intensity=float(sun_intensity))
            if sun_color is not None:
                p = replace(p, sun_color=tuple(float(c) for c in sun_color))
            if ambient_intensity is not None:
                if float(ambient_intensity) < 0:
                    raise SimError(BAD_ARGS, "ambient_intensity must be >= 0")
                p = replace(p, ambient_intensity=float(ambient_intensity))
            if fog_visibility is not None:
                vis = math.inf if fog_visibility in (None, "inf") else float(fog_visibility)
                if not (vis > 0):
                    raise SimError(BAD_ARGS, "fog_visibility must be positive")
                p = replace(p, fog_visibility=vis)
            if fog_color is not None:
                p = replace(p, fog_color=tuple(float(c) for c in fog_color))
            if rain_params is not None:
                if not isinstance(rain_params, dict):
                    raise SimError(BAD_ARGS, "rain_params must be a mapping")
                p = replace(p, rain_params=dict(rain_params))
            self._params = p
            self._bump()

    def get_scene_params(self) -> SceneParams:
        with self._lock:
            return replace(self._params)

    # -- snapshots ---------------------------------------------------------

    def export_snapshot(self) -> dict:
        """Serializable record sufficient to reconstruct the world exactly."""
        with self._lock:
            p = self._params
            return {
                "format_version": SNAPSHOT_VERSION,
                "catalog": self.catalog.manifest_path,
                "objects": [
                    {
                        "obj_id": o.obj_id,
                        "asset_path": o.asset_path,
                        "location": [float(c) for c in o.pose.location],
                        "rotation": list(o.pose.rotation.as_tuple()),
                        "scale": float(o.pose.scale),
                        "lock_rotation": bool(o.lock_rotation),
                    }
                    for o in self._objects.values()
                ],
                "cameras": [
                    {
                        "cam_id": c.cam_id,
                        "location": [float(x) for x in c.pose.location],
                        "rotation": list(c.pose.rotation.as_tuple()),
                        "fov": float(c.horizontal_fov),
                        "width": c.width,
                        "height": c.height,
                    }
                    for c in self._cameras.values()
                ],
                "scene_params": {
                    "sun_direction": [float(c) for c in p.sun_direction],
                    "sun_intensity": p.sun_intensity,
                    "sun_color": list(p.sun_color),
                    "ambient_intensity": p.ambient_intensity,
                    "fog_visibility": (None if math.isinf(p.fog_visibility)
                                       else p.fog_visibility),
                    "fog_color": list(p.fog_color),
                    "rain_params": dict(p.rain_params),
                },
            }

    # sim.get_obj_annots() in the public API returns this structure
    get_obj_annots = export_snapshot

    def load_snapshot(self, doc: dict, clear: bool = False):
        """Rebuild world state from an exported snapshot; atomic on failure."""
        if not isinstance(doc, dict):
            raise SimError(BAD_ARGS, "snapshot must be a mapping")
        if doc.get("format_version") != SNAPSHOT_VERSION:
            raise SimError(VERSION_MISMATCH,
                           f"snapshot format {doc.get('format_version')!r}")
        with self._lock:
            if self._objects and not clear:
                raise SimError(BAD_ARGS,
                               "world not empty; pass clear=true to replace it")
            objects = []
            for i, rec in enumerate(doc.get("objects", [])):
                asset_path = rec["asset_path"]
                if asset_path not in self.catalog:
                    raise SimError(ASSET_NOT_FOUND, asset_path)
                pose = Pose(location=vec3(rec["location"]),
                            rotation=Rotator(*rec["rotation"]),
                            scale=float(rec.get("scale", 1.0)))
                objects.append(SceneObject(
                    obj_id=rec["obj_id"], asset_path=asset_path, pose=pose,
                    lock_rotation=bool(rec.get("lock_rotation", False)),
                    spawn_order=i,
                    world_aabb=_candidate_aabb(self.catalog.get(asset_path), pose)))
            if len({o.obj_id for o in objects}) != len(objects):
                raise SimError(BAD_ARGS, "duplicate obj_id in snapshot")
            cameras = {}
            for rec in doc.get("cameras", []):
                cam_id = int(rec["cam_id"])
                cameras[cam_id] = CameraState(
                    cam_id=cam_id,
                    pose=Pose(location=vec3(rec["location"]),
                              rotation=Rotator(*rec["rotation"])),
                    horizontal_fov=float(rec.get("fov", 90.0)),
                    width=int(rec.get("width", 640)),
                    height=int(rec.get("height", 480)))
            cameras.setdefault(0, CameraState(cam_id=0))
            sp = doc.get("scene_params", {})
            vis = sp.get("fog_visibility", None)
            params = SceneParams(
                sun_direction=normalize(sp.get("sun_direction", [1.0, -1.0, -2.0])),
                sun_intensity=float(sp.get("sun_intensity", 1.0)),
                sun_color=tuple(sp.get("sun_color", (1.0, 1.0, 1.0))),
                ambient_intensity=float(sp.get("ambient_intensity", 0.2)),
                fog_visibility=math.inf if vis is None else float(vis),
                fog_color=tuple(sp.get("fog_color", (0.7, 0.7, 0.75))),
                rain_params=dict(sp.get("rain_params", {})))
            self._objects = {o.obj_id: o for o in objects}
            self._spawn_counter = len(objects)
            self._cameras = cameras
            self._params = params
            self._bump()

    def save_snapshot_file(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.export_snapshot(), fh, indent=2)

    def load_snapshot_file(self, path, clear=False):
        with open(path, "r", encoding="utf-8") as fh:
            self.load_snapshot(json.load(fh), clear=clear)

    # -- rendering convenience ----------------------------------------------

    def render(self, cam_id=0, channels=renderer.ALL_CHANNELS, threads=None):
        snap = self.snapshot()
        return renderer.render(snap, snap.camera(cam_id), channels, threads)

    def render_cameras(self, cam_ids, channels=renderer.ALL_CHANNELS, threads=None):
        snap = self.snapshot()
        cams = [snap.camera(c) for c in cam_ids]
        return renderer.render_cameras(snap, cams, channels, threads)

    def render_instance_alone(self, cam_id, obj_id, expand=1, threads=None):
        snap = self.snapshot()
        return renderer.render_instance_alone(snap, snap.camera(cam_id), obj_id,
                                              expand=expand, threads=threads)
