"""Model Context Protocol front-end over standard input/output.

Exposes the scene-command surface as MCP tools (JSON-RPC 2.0, one message
per line) so agentic LLM clients can query scene state, manipulate
objects, and visually inspect renders.  Tool calls route through the same
dispatch layer as the wire protocol, so both surfaces mutate the world
identically; camera images come back as base64 PNG content blocks at
native resolution.

Domain errors are tool results carrying the status string (agents must be
able to read and react to them); only malformed JSON-RPC itself produces
protocol-level errors.  Run with: python -m lychsim.mcp [--catalog ...]
"""

import argparse
import base64
import io
import json
import logging
import os
import sys

import numpy as np

from .assets import Catalog, load_catalog
from .dispatch import SPAWN_OBJECT_TOOL, Dispatcher
from .errors import SimError
from .procedural import parse_rules
from .renderer import render_cameras
from .world import SceneWorld

log = logging.getLogger("lychsim.mcp")

PROTOCOL_VERSION = "2024-11-05"
SERVER_INFO = {"name": "lychsim", "version": "0.1.0"}

# MCP tool name -> dispatch command (None = handled specially)
_TOOL_COMMANDS = {
    "list_objects": "list_objects",
    "get_object_location": "get_object_location",
    "get_object_rotation": "get_object_rotation",
    "get_camera_location": "get_camera_location",
    "get_camera_rotation": "get_camera_rotation",
    "add_object": "spawn_object",
    "spawn_object": "spawn_object",
    "set_object_location": "set_object_location",
    "set_object_rotation": "set_object_rotation",
    "update_object": "update_object",
    "delete_object": "delete_object",
    "get_mesh_extent": "get_mesh_extent",
    "set_camera_location": "set_camera_location",
    "set_camera_rotation": "set_camera_rotation",
    "get_camera_lit": "get_cam_lit",
    "get_camera_ground_truths": None,
}

_TOOL_DESCRIPTIONS = {
    "list_objects": "List ids of all scene objects in spawn order.",
    "get_object_location": "World-space [x, y, z] (cm) of an object.",
    "get_object_rotation": "[pitch, yaw, roll] (degrees) of an object.",
    "get_camera_location": "World-space [x, y, z] (cm) of a camera.",
    "get_camera_rotation": "[pitch, yaw, roll] (degrees) of a camera.",
    "add_object": "Spawn a new object into the scene (alias of spawn_object).",
    "set_object_location": "Move an existing object.",
    "set_object_rotation": "Rotate an existing object (fails when locked).",
    "update_object": "Partially update an object's location/rotation/scale.",
    "delete_object": "Remove an object from the scene.",
    "get_mesh_extent": "Full [x, y, z] extents (cm) of a catalog asset; "
                       "may fail on assets flagged extent-unavailable.",
    "set_camera_location": "Move a camera (created on first use).",
    "set_camera_rotation": "Rotate a camera.",
    "get_camera_lit": "Render the lit view of a camera; returns a PNG image.",
}

_GROUND_TRUTH_TOOL = {
    "name": "get_camera_ground_truths",
    "description": (
        "Batch-render ground-truth channels for one or more cameras "
        "(parallel across cameras). Returns per-channel summary statistics; "
        "pass sink_dir to also write full-resolution .npz files."
    ),
    "inputSchema": {
        "type": "object",
        "properties": {
            "cam_ids": {"type": "array", "items": {"type": "integer"},
                        "default": [0],
                        "description": "Cameras to render."},
            "channels": {"type": "array", "items": {"type": "string"},
                         "default": ["depth", "instance", "normal", "pointmap"],
                         "description": "Channels to compute."},
            "sink_dir": {"type": "string",
                         "description": "Directory for full .npz dumps."},
        },
    },
}


def _png_base64(rgb: np.ndarray) -> str:
    from PIL import Image
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class McpServer:
    """One MCP session over stdio; tool calls processed in arrival order."""

    def __init__(self, world: SceneWorld, rules=None):
        self.dispatcher = Dispatcher(world, rules=rules)
        self.world = world
        self.initialized = False

    # -- tool surface --------------------------------------------------------

    def tool_descriptors(self):
        tools = []
        for name, cmd in _TOOL_COMMANDS.items():
            if name == "spawn_object":
                tools.append(dict(SPAWN_OBJECT_TOOL))
            elif name == "get_camera_ground_truths":
                tools.append(dict(_GROUND_TRUTH_TOOL))
            elif name == "add_object":
                tools.append({
                    "name": "add_object",
                    "description": _TOOL_DESCRIPTIONS[name],
                    "inputSchema": SPAWN_OBJECT_TOOL["inputSchema"],
                })
            else:
                tools.append({
                    "name": name,
                    "description": _TOOL_DESCRIPTIONS[name],
                    "inputSchema": self.dispatcher.schema_for(cmd),
                })
        return tools

    def call_tool(self, name, arguments):
        """Execute one tool; returns an MCP tool result dict."""
        if name not in _TOOL_COMMANDS:
            raise KeyError(name)
        try:
            if name == "get_camera_ground_truths":
                return self._ground_truths(arguments)
            cmd = _TOOL_COMMANDS[name]
            data, tensors = self.dispatcher.dispatch(cmd, arguments)
            if name == "get_camera_lit":
                (entry,) = tensors
                from .protocol import decode_tensor
                return {"content": [{
                    "type": "image",
                    "data": _png_base64(decode_tensor(entry)),
                    "mimeType": "image/png",
                }], "isError": False}
            payload = {"status": "ok"}
            payload.update(data)
            return {"content": [{"type": "text",
                                 "text": json.dumps(payload)}],
                    "isError": False}
        except SimError as exc:
            return {"content": [{"type": "text",
                                 "text": json.dumps({"status": exc.code})}],
                    "isError": True}

    def _ground_truths(self, arguments):
        from .dispatch import validate_args
        args = validate_args(_GROUND_TRUTH_TOOL["inputSchema"], arguments)
        snap = self.world.snapshot()
        cams = [snap.camera(c) for c in args["cam_ids"]]
        frames = render_cameras(snap, cams, channels=tuple(args["channels"]))
        stats = {}
        sink_paths = []
        for cam_id, fs in zip(args["cam_ids"], frames):
            cam_stats = {}
            arrays = {}
            for ch in args["channels"]:
                buf = getattr(fs, ch)
                arrays[ch] = buf
                vals = buf[np.isfinite(buf)] if buf.dtype.kind == "f" else buf
                cam_stats[ch] = {
                    "shape": list(buf.shape),
                    "dtype": str(buf.dtype),
                    "min": float(vals.min()) if vals.size else None,
                    "max": float(vals.max()) if vals.size else None,
                    "mean": float(vals.mean()) if vals.size else None,
                }
            stats[str(cam_id)] = cam_stats
            if "sink_dir" in args:
                os.makedirs(args["sink_dir"], exist_ok=True)
                path = os.path.join(args["sink_dir"], f"cam_{cam_id}.npz")
                np.savez_compressed(path, **arrays)
                sink_paths.append(path)
        payload = {"status": "ok", "stats": stats}
        if sink_paths:
            payload["files"] = sink_paths
        return {"content": [{"type": "text", "text": json.dumps(payload)}],
                "isError": False}

    # -- JSON-RPC ------------------------------------------------------------

    def handle_message(self, message: dict):
        """Process one JSON-RPC message; returns the response or None."""
        if not isinstance(message, dict) or message.get("jsonrpc") != "2.0":
            return _rpc_error(None, -32600, "invalid request")
        method = message.get("method")
        msg_id = message.get("id")
        if method == "notifications/initialized":
            return None
        if method == "initialize":
            if self.initialized:
                return _rpc_error(msg_id, -32600, "already initialized")
            self.initialized = True
            params = message.get("params") or {}
            version = params.get("protocolVersion", PROTOCOL_VERSION)
            return _rpc_result(msg_id, {
                "protocolVersion": version,
                "capabilities": {"tools": {}},
                "serverInfo": SERVER_INFO,
            })
        if not self.initialized:
            return _rpc_error(msg_id, -32002, "not initialized")
        if method == "ping":
            return _rpc_result(msg_id, {})
        if method == "tools/list":
            return _rpc_result(msg_id, {"tools": self.tool_descriptors()})
        if method == "tools/call":
            params = message.get("params") or {}
            name = params.get("name")
            try:
                result = self.call_tool(name, params.get("arguments") or {})
            except KeyError:
                return _rpc_error(msg_id, -32602, f"unknown tool {name!r}")
            return _rpc_result(msg_id, result)
        return _rpc_error(msg_id, -32601, f"unknown method {method!r}")

    def run_stdio(self, stdin=None, stdout=None):
        """Blocking line-delimited JSON-RPC loop; never exits on bad input."""
        stdin = stdin if stdin is not None else sys.stdin.buffer
        stdout = stdout if stdout is not None else sys.stdout.buffer
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError:
                _write_message(stdout, _rpc_error(None, -32700, "parse error"))
                continue
            try:
                reply = self.handle_message(message)
            except Exception:
                log.exception("unhandled error")
                reply = _rpc_error(message.get("id"), -32603, "internal error")
            if reply is not None:
                _write_message(stdout, reply)


def _write_message(stdout, message):
    stdout.write(json.dumps(message).encode("utf-8") + b"\n")
    stdout.flush()


def _rpc_result(msg_id, result):
    return {"jsonrpc": "2.0", "id": msg_id, "result": result}


def _rpc_error(msg_id, code, text):
    return {"jsonrpc": "2.0", "id": msg_id,
            "error": {"code": code, "message": text}}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="python -m lychsim.mcp",
        description="MCP stdio server exposing the simulation tool surface.")
    parser.add_argument("--catalog", default=os.environ.get("SIM_CATALOG"),
                        help="asset manifest JSON (env SIM_CATALOG)")
    parser.add_argument("--rules", default=os.environ.get("SIM_RULES"),
                        help="procedural rule file (env SIM_RULES)")
    parser.add_argument("--snapshot", default=os.environ.get("SIM_SNAPSHOT"),
                        help="scene snapshot to load at startup (env SIM_SNAPSHOT)")
    parser.add_argument("--log-level",
                        default=os.environ.get("SIM_LOG_LEVEL", "warning"))
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, args.log_level.upper(), logging.WARNING))
    catalog = load_catalog(args.catalog) if args.catalog else Catalog()
    world = SceneWorld(catalog)
    if args.snapshot:
        with open(args.snapshot, "r", encoding="utf-8") as fh:
            world.load_snapshot(json.load(fh))
    rules = parse_rules(args.rules) if args.rules else None
    McpServer(world, rules=rules).run_stdio()


if __name__ == "__main__":
    main()
