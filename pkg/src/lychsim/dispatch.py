"""Command registry shared by the wire protocol server and the MCP front-end.

Every command validates its arguments against a JSON-schema-shaped
declaration (defaults applied, unknown keys rejected) before touching the
world; schema violations and unknown commands surface as stable status
code strings, never exceptions, so agent clients can read and react.
"""

import math

import numpy as np

from . import examiner as ex
from . import procedural as pr
from .errors import SimError, BAD_ARGS, UNKNOWN_COMMAND
from .groundtruth import annotate_all, annotation_to_dict
from .protocol import encode_tensor, tensor_checksum
from .renderer import pointmap_in_space, render, render_cameras

# The published spawn_object tool contract; the MCP descriptor must carry it
# field for field, and the validator enforces its inputSchema.
SPAWN_OBJECT_TOOL = {
    "name": "spawn_object",
    "description": (
        "Spawn a new object into the LychSim scene.\n\nReturns:\n"
        "    `{\"status\": \"ok\"}` on success, or\n"
        "    `{\"status\": \"<error_code>\"}` describing what went wrong\n"
        "    (e.g. `\"object_with_same_name_already_exists\"`,\n"
        "    `\"failed_to_spawn_actor\"`, `\"unknown_argument_format\"`)."
    ),
    "inputSchema": {
        "type": "object",
        "properties": {
            "obj_id": {
                "type": "string",
                "title": "Obj Id",
                "description": (
                    "A unique name for the new object (e.g. `\"Table_1\"`). "
                    "Must not collide with an existing object ID in the scene "
                    "— call `list_objects` first to check."
                ),
            },
            "obj_path": {
                "type": "string",
                "title": "Obj Path",
                "description": (
                    "Unreal Engine asset path for the mesh or blueprint to "
                    "spawn (e.g. `\"/Game/Assets/Mesh/SM_Table\"`). Use "
                    "`list_objects` + `get_object_location` to inspect what "
                    "is already in the scene, but asset paths come from the "
                    "project's Content directory, not from scene queries."
                ),
            },
            "location": {
                "type": "array",
                "items": {"type": "number"},
                "title": "Location",
                "description": (
                    "World-space `[x, y, z]` in centimeters (left-handed, "
                    "Z-up). Defaults to the world origin `[0, 0, 0]`."
                ),
                "default": [0.0, 0.0, 0.0],
            },
            "rotation": {
                "type": "array",
                "items": {"type": "number"},
                "title": "Rotation",
                "description": "`[pitch, yaw, roll]` in degrees. Defaults to `[0, 0, 0]`.",
                "default": [0.0, 0.0, 0.0],
            },
            "scale": {
                "type": "number",
                "title": "Scale",
                "description": "Uniform scale factor. Defaults to `1.0`.",
                "default": 1.0,
            },
            "collision_handling": {
                "type": "string",
                "title": "Collision Handling",
                "description": (
                    "How to handle spawn-time collisions. `\"default\"` — "
                    "always spawn; `\"skip_if_colliding\"` — do not spawn if "
                    "the location overlaps existing geometry; "
                    "`\"adjust_if_possible\"` — try to nudge the object to a "
                    "free spot, but fail if none is found."
                ),
                "default": "default",
            },
            "lock_rotation": {
                "type": "boolean",
                "title": "Lock Rotation",
                "description": (
                    "If `true`, lock the actor's rotation after spawning "
                    "(useful for static props)."
                ),
                "default": False,
            },
        },
        "required": ["obj_id", "obj_path"],
    },
}

_CHANNEL_NAMES = ("lit", "depth", "instance", "part", "normal", "pointmap")


def validate_args(schema: dict, args) -> dict:
    """Check args against an object schema; returns a copy with defaults."""
    if args is None:
        args = {}
    if not isinstance(args, dict):
        raise SimError(BAD_ARGS, "args must be an object")
    props = schema.get("properties", {})
    unknown = set(args) - set(props)
    if unknown:
        raise SimError(BAD_ARGS, f"unknown arguments {sorted(unknown)}")
    for name in schema.get("required", []):
        if name not in args:
            raise SimError(BAD_ARGS, f"missing required argument {name!r}")
    out = {}
    for name, spec in props.items():
        if name not in args:
            if "default" in spec:
                out[name] = spec["default"]
            continue
        out[name] = _check_value(name, spec, args[name])
    return out


def _check_value(name, spec, value):
    kind = spec.get("type")
    if kind == "string":
        if not isinstance(value, str):
            raise SimError(BAD_ARGS, f"{name} must be a string")
    elif kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SimError(BAD_ARGS, f"{name} must be a number")
        value = float(value)
    elif kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SimError(BAD_ARGS, f"{name} must be an integer")
    elif kind == "boolean":
        if not isinstance(value, bool):
            raise SimError(BAD_ARGS, f"{name} must be a boolean")
    elif kind == "array":
        if not isinstance(value, list):
            raise SimError(BAD_ARGS, f"{name} must be an array")
        n = spec.get("minItems")
        if n is not None and len(value) < n:
            raise SimError(BAD_ARGS, f"{name} needs >= {n} items")
        n = spec.get("maxItems")
        if n is not None and len(value) > n:
            raise SimError(BAD_ARGS, f"{name} takes <= {n} items")
        items = spec.get("items")
        if items is not None:
            value = [_check_value(f"{name}[{i}]", items, v)
                     for i, v in enumerate(value)]
    elif kind == "object":
        if not isinstance(value, dict):
            raise SimError(BAD_ARGS, f"{name} must be an object")
    if "enum" in spec and value not in spec["enum"]:
        raise SimError(BAD_ARGS, f"{name} must be one of {spec['enum']}")
    if "minimum" in spec and value < spec["minimum"]:
        raise SimError(BAD_ARGS, f"{name} must be >= {spec['minimum']}")
    if "maximum" in spec and value > spec["maximum"]:
        raise SimError(BAD_ARGS, f"{name} must be <= {spec['maximum']}")
    return value


def _vec3_schema(desc):
    return {"type": "array", "items": {"type": "number"},
            "minItems": 3, "maxItems": 3, "description": desc}


def instance_color(index: int):
    """Unique RGB for an instance value (bijective below 2^24)."""
    mixed = (index * 2654435761) & 0xFFFFFF
    return ((mixed >> 16) & 0xFF, (mixed >> 8) & 0xFF, mixed & 0xFF)


def _seg_image(fs):
    colors = np.zeros((len(fs.instance_ids) + 1, 3), dtype=np.uint8)
    for i in range(1, len(fs.instance_ids) + 1):
        colors[i] = instance_color(i)
    return colors[fs.instance]


class Dispatcher:
    """Maps validated commands onto one world (plus rule/session state)."""

    def __init__(self, world, rules=None):
        self.world = world
        self.rules = list(rules) if rules else []
        self._commands = {}
        self._register_all()

    # -- plumbing -----------------------------------------------------------

    def command_names(self):
        return sorted(self._commands)

    def schema_for(self, name):
        return self._commands[name][0]

    def dispatch(self, cmd, args):
        """Run one command; returns (data, tensors). Raises SimError only."""
        entry = self._commands.get(cmd)
        if entry is None:
            raise SimError(UNKNOWN_COMMAND, str(cmd))
        schema, handler = entry
        return handler(validate_args(schema, args))

    def _register(self, name, schema, handler):
        self._commands[name] = (schema, handler)

    def _cam(self, args):
        return self.world.snapshot().camera(args.get("cam_id", 0))

    # -- registry -----------------------------------------------------------

    def _register_all(self):
        w = self.world
        cam_arg = {"cam_id": {"type": "integer", "default": 0, "minimum": 0}}

        def obj_schema(**extra):
            props = {"obj_id": {"type": "string"}}
            props.update(extra)
            return {"type": "object", "properties": props,
                    "required": ["obj_id"]}

        spawn_schema = SPAWN_OBJECT_TOOL["inputSchema"]

        def do_spawn(a):
            w.spawn_object(a["obj_id"], a["obj_path"], location=a["location"],
                           rotation=a["rotation"], scale=a["scale"],
                           collision_handling=a["collision_handling"],
                           lock_rotation=a["lock_rotation"])
            return {}, []

        for alias in ("spawn_object", "add_obj", "add_object"):
            self._register(alias, spawn_schema, do_spawn)

        loc_schema = obj_schema(location=_vec3_schema("world [x, y, z] cm"))
        loc_schema["required"] = ["obj_id", "location"]
        self._register("set_object_location", loc_schema,
                       self._set_object_location)
        rot_schema = obj_schema(rotation=_vec3_schema("[pitch, yaw, roll] degrees"))
        rot_schema["required"] = ["obj_id", "rotation"]
        self._register("set_object_rotation", rot_schema,
                       self._set_object_rotation)
        self._register(
            "update_object",
            obj_schema(location=_vec3_schema("world [x, y, z] cm"),
                       rotation=_vec3_schema("[pitch, yaw, roll] degrees"),
                       scale={"type": "number"}),
            self._update_object)
        self._register("delete_object", obj_schema(), self._delete_object)
        self._register("list_objects", {"type": "object", "properties": {}},
                       lambda a: ({"objects": w.list_objects()}, []))
        self._register("get_object_location", obj_schema(),
                       lambda a: ({"location": [float(c) for c in
                                                w.get_object_location(a["obj_id"])]},
                                  []))
        self._register("get_object_rotation", obj_schema(),
                       lambda a: ({"rotation": list(
                           w.get_object_rotation(a["obj_id"]).as_tuple())}, []))
        self._register(
            "get_mesh_extent",
            {"type": "object", "properties": {"obj_path": {"type": "string"}},
             "required": ["obj_path"]},
            lambda a: ({"extent": [float(c) for c in
                                   w.catalog.get_mesh_extent(a["obj_path"])]}, []))
        self._register("get_object_aabb", obj_schema(), self._get_object_aabb)

        self._register(
            "set_camera",
            {"type": "object", "properties": {
                **cam_arg,
                "location": _vec3_schema("world [x, y, z] cm"),
                "rotation": _vec3_schema("[pitch, yaw, roll] degrees"),
                "fov": {"type": "number", "minimum": 1.0, "maximum": 179.0},
                "width": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 1}}},
            self._set_camera)
        self._register(
            "set_camera_location",
            {"type": "object", "properties": {
                **cam_arg, "location": _vec3_schema("world [x, y, z] cm")},
             "required": ["location"]},
            self._set_camera_location)
        self._register(
            "set_camera_rotation",
            {"type": "object", "properties": {
                **cam_arg, "rotation": _vec3_schema("[pitch, yaw, roll] degrees")},
             "required": ["rotation"]},
            self._set_camera_rotation)
        self._register(
            "get_camera_location", {"type": "object", "properties": cam_arg},
            lambda a: ({"location": [float(c) for c in
                                     w.get_camera(a["cam_id"]).pose.location]}, []))
        self._register(
            "get_camera_rotation", {"type": "object", "properties": cam_arg},
            lambda a: ({"rotation": list(
                w.get_camera(a["cam_id"]).pose.rotation.as_tuple())}, []))

        render_schema = {"type": "object", "properties": {
            **cam_arg, "warmup": {"type": "number", "default": 0}}}
        self._register("get_cam_lit", render_schema, self._get_cam_lit)
        self._register("get_cam_seg",
                       {"type": "object", "properties": cam_arg},
                       self._get_cam_seg)
        self._register("get_cam_depth",
                       {"type": "object", "properties": cam_arg},
                       self._get_cam_depth)
        self._register("get_cam_normal",
                       {"type": "object", "properties": cam_arg},
                       self._get_cam_normal)
        self._register("get_cam_partseg",
                       {"type": "object", "properties": cam_arg},
                       self._get_cam_partseg)
        self._register(
            "get_cam_pointmap",
            {"type": "object", "properties": {
                **cam_arg,
                "space": {"type": "string", "enum": ["world", "opencv"],
                          "default": "world"}}},
            self._get_cam_pointmap)
        self._register(
            "get_cam_checksums",
            {"type": "object", "properties": {
                **cam_arg,
                "channels": {"type": "array", "items": {"type": "string"},
                             "default": list(_CHANNEL_NAMES)}}},
            self._get_cam_checksums)
        self._register(
            "render_cameras",
            {"type": "object", "properties": {
                "cam_ids": {"type": "array", "items": {"type": "integer"},
                            "minItems": 1},
                "channels": {"type": "array", "items": {"type": "string"},
                             "default": ["lit"]}},
             "required": ["cam_ids"]},
            self._render_cameras)

        self._register(
            "get_obj_annots",
            {"type": "object", "properties": {
                "cam_id": {"type": "integer", "minimum": 0}}},
            self._get_obj_annots)
        self._register(
            "load_snapshot",
            {"type": "object", "properties": {
                "snapshot": {"type": "object"},
                "clear": {"type": "boolean", "default": False}},
             "required": ["snapshot"]},
            self._load_snapshot)

        self._register(
            "set_scene_params",
            {"type": "object", "properties": {
                "sun_direction": _vec3_schema("unit sun direction"),
                "sun_intensity": {"type": "number", "minimum": 0.0},
                "sun_color": _vec3_schema("RGB in [0, 1]"),
                "ambient_intensity": {"type": "number", "minimum": 0.0},
                "fog_visibility": {"type": "number"},
                "fog_disabled": {"type": "boolean"},
                "fog_color": _vec3_schema("RGB in [0, 1]"),
                "rain_params": {"type": "object"}}},
            self._set_scene_params)
        self._register("get_scene_params",
                       {"type": "object", "properties": {}},
                       self._get_scene_params)

        self._register(
            "parse_rules",
            {"type": "object", "properties": {
                "text": {"type": "string"}, "path": {"type": "string"}}},
            self._parse_rules)
        self._register(
            "generate_scene",
            {"type": "object", "properties": {
                "config": {"type": "object"},
                "rules_text": {"type": "string"}},
             "required": ["config"]},
            self._generate_scene)
        self._register(
            "run_examiner",
            {"type": "object", "properties": {
                "target": {"type": "string"},
                "segmenter": {"type": "string",
                              "enum": ["perfect", "flawed"],
                              "default": "flawed"},
                "population": {"type": "integer", "default": 16, "minimum": 4},
                "elite_frac": {"type": "number", "default": 0.25},
                "alpha": {"type": "number", "default": 0.7},
                "iterations": {"type": "integer", "default": 50, "minimum": 1},
                "seed": {"type": "integer", "default": 0},
                "width": {"type": "integer", "default": 320, "minimum": 8},
                "height": {"type": "integer", "default": 240, "minimum": 8},
                "elevation_bounds": {"type": "array",
                                     "items": {"type": "number"},
                                     "minItems": 2, "maxItems": 2,
                                     "default": [-89.0, 89.0]},
                "radius_bounds": {"type": "array",
                                  "items": {"type": "number"},
                                  "minItems": 2, "maxItems": 2,
                                  "default": [100.0, 1000.0]},
                "include_trace": {"type": "boolean", "default": False}},
             "required": ["target"]},
            self._run_examiner)

    # -- handlers ------------------------------------------------------------

    def _set_object_location(self, a):
        self.world.set_object_location(a["obj_id"], a["location"])
        return {}, []

    def _set_object_rotation(self, a):
        self.world.set_object_rotation(a["obj_id"], a["rotation"])
        return {}, []

    def _update_object(self, a):
        self.world.update_object(a["obj_id"], location=a.get("location"),
                                 rotation=a.get("rotation"),
                                 scale=a.get("scale"))
        return {}, []

    def _delete_object(self, a):
        self.world.delete_object(a["obj_id"])
        return {}, []

    def _get_object_aabb(self, a):
        box = self.world.snapshot().world_aabb(a["obj_id"])
        return {"min": [float(c) for c in box.min],
                "max": [float(c) for c in box.max]}, []

    def _set_camera(self, a):
        self.world.set_camera(a.get("cam_id", 0), location=a.get("location"),
                              rotation=a.get("rotation"), fov=a.get("fov"),
                              width=a.get("width"), height=a.get("height"))
        return {}, []

    def _set_camera_location(self, a):
        self.world.set_camera(a["cam_id"], location=a["location"])
        return {}, []

    def _set_camera_rotation(self, a):
        self.world.set_camera(a["cam_id"], rotation=a["rotation"])
        return {}, []

    def _load_snapshot(self, a):
        self.world.load_snapshot(a["snapshot"], clear=a["clear"])
        return {}, []

    def _render_one(self, a, channels):
        snap = self.world.snapshot()
        cam = snap.camera(a.get("cam_id", 0))
        return snap, cam, render(snap, cam, channels=channels)

    def _get_cam_lit(self, a):
        _, _, fs = self._render_one(a, ("lit",))
        return {}, [encode_tensor("lit", fs.lit)]

    def _get_cam_seg(self, a):
        _, _, fs = self._render_one(a, ("instance",))
        data = {"instances": [
            {"obj_id": obj_id, "index": i + 1,
             "color": list(instance_color(i + 1))}
            for i, obj_id in enumerate(fs.instance_ids)]}
        return data, [encode_tensor("seg", _seg_image(fs))]

    def _get_cam_depth(self, a):
        _, _, fs = self._render_one(a, ("depth",))
        return {}, [encode_tensor("depth", fs.depth)]

    def _get_cam_normal(self, a):
        _, _, fs = self._render_one(a, ("normal",))
        return {}, [encode_tensor("normal", fs.normal)]

    def _get_cam_partseg(self, a):
        _, _, fs = self._render_one(a, ("part",))
        return {}, [encode_tensor("partseg", fs.part)]

    def _get_cam_pointmap(self, a):
        _, _, fs = self._render_one(a, ("pointmap",))
        out = pointmap_in_space(fs, a["space"])
        return {"space": a["space"]}, [encode_tensor("pointmap", out)]

    def _get_cam_checksums(self, a):
        for ch in a["channels"]:
            if ch not in _CHANNEL_NAMES:
                raise SimError(BAD_ARGS, f"unknown channel {ch!r}")
        _, _, fs = self._render_one(a, tuple(a["channels"]))
        sums = {ch: tensor_checksum(getattr(fs, ch)) for ch in a["channels"]}
        return {"checksums": sums}, []

    def _render_cameras(self, a):
        for ch in a["channels"]:
            if ch not in _CHANNEL_NAMES:
                raise SimError(BAD_ARGS, f"unknown channel {ch!r}")
        snap = self.world.snapshot()
        cams = [snap.camera(c) for c in a["cam_ids"]]
        frames = render_cameras(snap, cams, channels=tuple(a["channels"]))
        tensors = []
        for cam_id, fs in zip(a["cam_ids"], frames):
            for ch in a["channels"]:
                tensors.append(encode_tensor(f"{ch}_{cam_id}", getattr(fs, ch)))
        return {"cam_ids": a["cam_ids"], "channels": a["channels"]}, tensors

    def _get_obj_annots(self, a):
        data = {"snapshot": self.world.export_snapshot()}
        if "cam_id" in a:
            snap = self.world.snapshot()
            cam = snap.camera(a["cam_id"])
            data["annotations"] = [annotation_to_dict(ann)
                                   for ann in annotate_all(snap, cam)]
        return data, []

    def _set_scene_params(self, a):
        vis = a.get("fog_visibility")
        if a.get("fog_disabled"):
            vis = "inf"
        self.world.set_scene_params(
            sun_direction=a.get("sun_direction"),
            sun_intensity=a.get("sun_intensity"),
            sun_color=a.get("sun_color"),
            ambient_intensity=a.get("ambient_intensity"),
            fog_visibility=vis,
            fog_color=a.get("fog_color"),
            rain_params=a.get("rain_params"))
        return {}, []

    def _get_scene_params(self, a):
        p = self.world.get_scene_params()
        return {
            "sun_direction": [float(c) for c in p.sun_direction],
            "sun_intensity": p.sun_intensity,
            "sun_color": list(p.sun_color),
            "ambient_intensity": p.ambient_intensity,
            "fog_visibility": None if math.isinf(p.fog_visibility)
            else p.fog_visibility,
            "fog_color": list(p.fog_color),
            "rain_params": dict(p.rain_params),
        }, []

    def _parse_rules(self, a):
        if "text" in a:
            rules = pr.parse_rules_text(a["text"])
        elif "path" in a:
            rules = pr.parse_rules(a["path"])
        else:
            raise SimError(BAD_ARGS, "parse_rules needs text or path")
        self.rules = rules
        return {"count": len(rules),
                "rule_ids": [r.rule_id for r in rules]}, []

    def _generate_scene(self, a):
        rules = self.rules
        if "rules_text" in a:
            rules = pr.parse_rules_text(a["rules_text"])
            self.rules = rules
        try:
            config = pr.GenerationConfig(**a["config"])
        except TypeError as exc:
            raise SimError(BAD_ARGS, str(exc)) from None
        report = pr.generate_scene(self.world, rules, config)
        return pr.report_to_dict(report), []

    def _run_examiner(self, a):
        cfg = ex.ExaminerConfig(
            population=a["population"], elite_frac=a["elite_frac"],
            alpha=a["alpha"], iterations=a["iterations"], seed=a["seed"],
            bounds=ex.ViewpointBounds(
                elevation=tuple(a["elevation_bounds"]),
                radius=tuple(a["radius_bounds"])),
            width=a["width"], height=a["height"])
        report = ex.run_examiner(self.world, a["target"], a["segmenter"], cfg)
        doc = ex.report_to_dict(report)
        if not a["include_trace"]:
            doc.pop("trace")
        return doc, []
