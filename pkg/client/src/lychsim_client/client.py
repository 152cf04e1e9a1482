"""Socket client for the simulation server's framed JSON protocol.

The LychSim class mirrors the server's Python-method command surface:
spawn/edit/query calls return the server's status string unchanged, image
and buffer getters decode the binary tensors into PIL images and numpy
arrays.  All simulation semantics live server-side; this module is pure
transport and decoding.
"""

import base64
import json
import socket
import struct
import threading

import numpy as np
from PIL import Image

_HEADER = struct.Struct(">I")
_DTYPES = {"f32": np.dtype("<f4"), "u8": np.dtype("u1"),
           "u16": np.dtype("<u2"), "u32": np.dtype("<u4")}


class TransportError(ConnectionError):
    pass


class ServerError(RuntimeError):
    """A query command returned an error status instead of data."""

    def __init__(self, status):
        self.status = status
        super().__init__(status)


def decode_tensor(entry):
    raw = base64.b64decode(entry["data"])
    return np.frombuffer(raw, dtype=_DTYPES[entry["dtype"]]) \
        .reshape(entry["shape"]).copy()


class LychSim:
    """Connection to one simulation server; thread-safe via a request lock."""

    def __init__(self, server_name="localhost", port=9000, timeout=120.0):
        self._sock = socket.create_connection((server_name, port),
                                              timeout=timeout)
        self._lock = threading.Lock()
        self._next_id = 0
        self.server_name = server_name
        self.port = port
        self.calls = 0  # total requests issued, handy for loop accounting

    def close(self):
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- transport -----------------------------------------------------------

    def _recv_exact(self, n):
        buf = b""
        while len(buf) < n:
            chunk = self._sock.recv(n - len(buf))
            if not chunk:
                raise TransportError("server closed the connection")
            buf += chunk
        return buf

    def _rpc(self, cmd, args=None):
        with self._lock:
            self._next_id += 1
            self.calls += 1
            req_id = self._next_id
            payload = json.dumps({"id": req_id, "cmd": cmd,
                                  "args": args or {}}).encode("utf-8")
            try:
                self._sock.sendall(_HEADER.pack(len(payload)) + payload)
                (length,) = _HEADER.unpack(self._recv_exact(_HEADER.size))
                response = json.loads(self._recv_exact(length))
            except OSError as exc:
                raise TransportError(str(exc)) from None
        if response.get("id") != req_id:
            raise TransportError(f"response id {response.get('id')} "
                                 f"!= request id {req_id}")
        return response

    def _status_call(self, cmd, args):
        """Commands whose result is just the status string."""
        return self._rpc(cmd, args)["status"]

    def _data_call(self, cmd, args=None):
        response = self._rpc(cmd, args)
        if response["status"] != "ok":
            raise ServerError(response["status"])
        return response

    # -- objects --------------------------------------------------------------

    def add_obj(self, obj_id, obj_path, location=(0.0, 0.0, 0.0),
                rotation=(0.0, 0.0, 0.0), scale=1.0,
                collision_handling="default", lock_rotation=False,
                adjust_if_possible=False):
        """Spawn an object; returns the server status string ("ok" or code)."""
        if adjust_if_possible:
            collision_handling = "adjust_if_possible"
        return self._status_call("spawn_object", {
            "obj_id": obj_id, "obj_path": obj_path,
            "location": [float(c) for c in location],
            "rotation": [float(c) for c in rotation],
            "scale": float(scale),
            "collision_handling": collision_handling,
            "lock_rotation": bool(lock_rotation)})

    spawn_object = add_obj

    def set_object_location(self, obj_id, location):
        return self._status_call("set_object_location", {
            "obj_id": obj_id, "location": [float(c) for c in location]})

    def set_object_rotation(self, obj_id, rotation):
        return self._status_call("set_object_rotation", {
            "obj_id": obj_id, "rotation": [float(c) for c in rotation]})

    def update_object(self, obj_id, location=None, rotation=None, scale=None):
        args = {"obj_id": obj_id}
        if location is not None:
            args["location"] = [float(c) for c in location]
        if rotation is not None:
            args["rotation"] = [float(c) for c in rotation]
        if scale is not None:
            args["scale"] = float(scale)
        return self._status_call("update_object", args)

    def delete_object(self, obj_id):
        return self._status_call("delete_object", {"obj_id": obj_id})

    def list_objects(self):
        return self._data_call("list_objects")["data"]["objects"]

    def get_object_location(self, obj_id):
        return self._data_call("get_object_location",
                               {"obj_id": obj_id})["data"]["location"]

    def get_object_rotation(self, obj_id):
        return self._data_call("get_object_rotation",
                               {"obj_id": obj_id})["data"]["rotation"]

    def get_object_aabb(self, obj_id):
        data = self._data_call("get_object_aabb", {"obj_id": obj_id})["data"]
        return data["min"], data["max"]

    def get_mesh_extent(self, obj_path):
        return self._data_call("get_mesh_extent",
                               {"obj_path": obj_path})["data"]["extent"]

    # -- cameras ---------------------------------------------------------------

    def set_camera_location(self, location, cam_id=0):
        return self._status_call("set_camera_location", {
            "cam_id": cam_id, "location": [float(c) for c in location]})

    def set_camera_rotation(self, rotation, cam_id=0):
        return self._status_call("set_camera_rotation", {
            "cam_id": cam_id, "rotation": [float(c) for c in rotation]})

    def set_camera(self, cam_id=0, location=None, rotation=None, fov=None,
                   width=None, height=None):
        args = {"cam_id": cam_id}
        if location is not None:
            args["location"] = [float(c) for c in location]
        if rotation is not None:
            args["rotation"] = [float(c) for c in rotation]
        if fov is not None:
            args["fov"] = float(fov)
        if width is not None:
            args["width"] = int(width)
        if height is not None:
            args["height"] = int(height)
        return self._status_call("set_camera", args)

    def get_camera_location(self, cam_id=0):
        return self._data_call("get_camera_location",
                               {"cam_id": cam_id})["data"]["location"]

    def get_camera_rotation(self, cam_id=0):
        return self._data_call("get_camera_rotation",
                               {"cam_id": cam_id})["data"]["rotation"]

    # -- rendering ---------------------------------------------------------------

    def get_cam_lit(self, cam_id=0, warmup=0):
        """Lit render as a PIL.Image (warmup is forwarded and ignored)."""
        r = self._data_call("get_cam_lit", {"cam_id": cam_id,
                                            "warmup": warmup})
        return Image.fromarray(decode_tensor(r["tensors"][0]), mode="RGB")

    def get_cam_lit_array(self, cam_id=0):
        r = self._data_call("get_cam_lit", {"cam_id": cam_id})
        return decode_tensor(r["tensors"][0])

    def get_cam_seg(self, cam_id=0):
        """Color-mapped instance segmentation as a PIL.Image."""
        array, _ = self.get_cam_seg_with_instances(cam_id)
        return Image.fromarray(array, mode="RGB")

    def get_cam_seg_with_instances(self, cam_id=0):
        """(seg array u8 HxWx3, instance records with obj_id/index/color)."""
        r = self._data_call("get_cam_seg", {"cam_id": cam_id})
        return decode_tensor(r["tensors"][0]), r["data"]["instances"]

    def get_cam_depth(self, cam_id=0):
        r = self._data_call("get_cam_depth", {"cam_id": cam_id})
        return decode_tensor(r["tensors"][0])

    def get_cam_normal(self, cam_id=0):
        r = self._data_call("get_cam_normal", {"cam_id": cam_id})
        return decode_tensor(r["tensors"][0])

    def get_cam_partseg(self, cam_id=0):
        r = self._data_call("get_cam_partseg", {"cam_id": cam_id})
        return decode_tensor(r["tensors"][0])

    def get_cam_pointmap(self, cam_id=0, space="world"):
        """Point map keyed by the requested space: result[space] -> ndarray."""
        r = self._data_call("get_cam_pointmap", {"cam_id": cam_id,
                                                 "space": space})
        return {r["data"]["space"]: decode_tensor(r["tensors"][0])}

    def get_cam_checksums(self, cam_id=0, channels=None):
        args = {"cam_id": cam_id}
        if channels is not None:
            args["channels"] = list(channels)
        return self._data_call("get_cam_checksums", args)["data"]["checksums"]

    def render_cameras(self, cam_ids, channels=("lit",)):
        r = self._data_call("render_cameras", {"cam_ids": list(cam_ids),
                                               "channels": list(channels)})
        out = {}
        for entry in r["tensors"]:
            out[entry["name"]] = decode_tensor(entry)
        return out

    # -- scene state ---------------------------------------------------------------

    def get_obj_annots(self, cam_id=None):
        """Scene snapshot (plus per-object annotations when cam_id given)."""
        args = {} if cam_id is None else {"cam_id": cam_id}
        data = self._data_call("get_obj_annots", args)["data"]
        return data if cam_id is not None else data["snapshot"]

    def load_snapshot(self, snapshot, clear=False):
        return self._status_call("load_snapshot", {"snapshot": snapshot,
                                                   "clear": clear})

    def set_scene_params(self, **params):
        return self._status_call("set_scene_params", params)

    def get_scene_params(self):
        return self._data_call("get_scene_params")["data"]

    def parse_rules(self, text):
        return self._data_call("parse_rules", {"text": text})["data"]

    def generate_scene(self, config, rules_text=None):
        args = {"config": config}
        if rules_text is not None:
            args["rules_text"] = rules_text
        return self._data_call("generate_scene", args)["data"]

    def run_examiner(self, target, **kwargs):
        args = {"target": target}
        args.update(kwargs)
        return self._data_call("run_examiner", args)["data"]
