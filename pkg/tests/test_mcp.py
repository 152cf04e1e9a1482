import base64
import io
import json
import subprocess
import sys

import numpy as np

from conftest import BOX_PATH

from lychsim.dispatch import SPAWN_OBJECT_TOOL, Dispatcher
from lychsim.mcp import McpServer
from lychsim.world import SceneWorld

EXPECTED_TOOLS = {
    "list_objects", "get_object_location", "get_object_rotation",
    "get_camera_location", "get_camera_rotation", "add_object",
    "set_object_location", "set_object_rotation", "update_object",
    "delete_object", "get_mesh_extent", "set_camera_location",
    "set_camera_rotation", "get_camera_lit", "spawn_object",
    "get_camera_ground_truths",
}


def _mcp(catalog):
    server = McpServer(SceneWorld(catalog))
    server.handle_message({"jsonrpc": "2.0", "id": 0, "method": "initialize",
                           "params": {"protocolVersion": "2024-11-05"}})
    return server


def _call(server, req_id, name, arguments=None):
    return server.handle_message({
        "jsonrpc": "2.0", "id": req_id, "method": "tools/call",
        "params": {"name": name, "arguments": arguments or {}}})


def _text_result(reply):
    return json.loads(reply["result"]["content"][0]["text"])


class TestHandshake:
    def test_initialize_declares_tools(self, catalog):
        server = McpServer(SceneWorld(catalog))
        r = server.handle_message({
            "jsonrpc": "2.0", "id": 1, "method": "initialize",
            "params": {"protocolVersion": "2024-11-05"}})
        assert r["result"]["protocolVersion"] == "2024-11-05"
        assert "tools" in r["result"]["capabilities"]
        assert r["result"]["serverInfo"]["name"] == "lychsim"

    def test_tools_list_before_initialize_fails(self, catalog):
        server = McpServer(SceneWorld(catalog))
        r = server.handle_message({"jsonrpc": "2.0", "id": 1,
                                   "method": "tools/list"})
        assert "error" in r

    def test_duplicate_initialize_fails(self, catalog):
        server = _mcp(catalog)
        r = server.handle_message({"jsonrpc": "2.0", "id": 2,
                                   "method": "initialize", "params": {}})
        assert "error" in r


class TestToolsList:
    def test_exact_tool_set(self, catalog):
        server = _mcp(catalog)
        r = server.handle_message({"jsonrpc": "2.0", "id": 1,
                                   "method": "tools/list"})
        names = {t["name"] for t in r["result"]["tools"]}
        assert names == EXPECTED_TOOLS

    def test_spawn_object_deep_equals_published_schema(self, catalog):
        server = _mcp(catalog)
        r = server.handle_message({"jsonrpc": "2.0", "id": 1,
                                   "method": "tools/list"})
        by_name = {t["name"]: t for t in r["result"]["tools"]}
        assert by_name["spawn_object"] == SPAWN_OBJECT_TOOL
        # structural spot checks of the published contract
        schema = by_name["spawn_object"]["inputSchema"]
        assert schema["required"] == ["obj_id", "obj_path"]
        assert schema["properties"]["location"]["default"] == [0.0, 0.0, 0.0]
        assert schema["properties"]["scale"]["default"] == 1.0
        assert schema["properties"]["collision_handling"]["default"] == "default"
        assert schema["properties"]["lock_rotation"]["default"] is False

    def test_required_subset_of_properties(self, catalog):
        server = _mcp(catalog)
        r = server.handle_message({"jsonrpc": "2.0", "id": 1,
                                   "method": "tools/list"})
        for tool in r["result"]["tools"]:
            schema = tool["inputSchema"]
            assert set(schema.get("required", [])) <= set(
                schema.get("properties", {})), tool["name"]
            assert tool["description"]

    def test_stable_across_calls(self, catalog):
        server = _mcp(catalog)
        a = server.handle_message({"jsonrpc": "2.0", "id": 1,
                                   "method": "tools/list"})
        b = server.handle_message({"jsonrpc": "2.0", "id": 2,
                                   "method": "tools/list"})
        assert a["result"] == b["result"]


class TestToolCalls:
    def test_spawn_ok_and_duplicate(self, catalog):
        server = _mcp(catalog)
        r = _call(server, 1, "spawn_object",
                  {"obj_id": "Table_1", "obj_path": BOX_PATH})
        assert _text_result(r) == {"status": "ok"}
        assert r["result"]["isError"] is False
        r = _call(server, 2, "spawn_object",
                  {"obj_id": "Table_1", "obj_path": BOX_PATH})
        assert _text_result(r)["status"] \
            == "object_with_same_name_already_exists"
        assert "error" not in r  # domain errors are tool results

    def test_schema_violation_status(self, catalog):
        server = _mcp(catalog)
        r = _call(server, 1, "spawn_object", {"obj_id": "x"})
        assert _text_result(r)["status"] == "unknown_argument_format"

    def test_unknown_tool_is_method_error(self, catalog):
        server = _mcp(catalog)
        r = _call(server, 1, "summon_dragon", {})
        assert "error" in r

    def test_camera_lit_png(self, catalog):
        from PIL import Image
        server = _mcp(catalog)
        _call(server, 1, "add_object",
              {"obj_id": "cube", "obj_path": BOX_PATH,
               "location": [400, 0, -50]})
        r = _call(server, 2, "get_camera_lit", {"cam_id": 0})
        block = r["result"]["content"][0]
        assert block["type"] == "image" and block["mimeType"] == "image/png"
        img = Image.open(io.BytesIO(base64.b64decode(block["data"])))
        assert img.size == (640, 480)

    def test_camera_move_changes_image(self, catalog):
        server = _mcp(catalog)
        _call(server, 1, "add_object",
              {"obj_id": "cube", "obj_path": BOX_PATH,
               "location": [644, -115, -20]})
        _call(server, 2, "set_camera_location",
              {"cam_id": 0, "location": [644, -115, 250]})
        _call(server, 3, "set_camera_rotation",
              {"cam_id": 0, "rotation": [-89, 0, 0]})
        top = _call(server, 4, "get_camera_lit", {})
        _call(server, 5, "set_camera_location",
              {"cam_id": 0, "location": [260, -300, 165]})
        _call(server, 6, "set_camera_rotation",
              {"cam_id": 0, "rotation": [0, -13, 24]})
        hero = _call(server, 7, "get_camera_lit", {})
        a = top["result"]["content"][0]["data"]
        b = hero["result"]["content"][0]["data"]
        assert a != b

    def test_ground_truths_stats_and_sink(self, catalog, tmp_path):
        server = _mcp(catalog)
        _call(server, 1, "add_object",
              {"obj_id": "cube", "obj_path": BOX_PATH,
               "location": [400, 0, -50]})
        r = _call(server, 2, "get_camera_ground_truths",
                  {"cam_ids": [0], "channels": ["depth", "instance"],
                   "sink_dir": str(tmp_path)})
        body = _text_result(r)
        assert body["status"] == "ok"
        assert body["stats"]["0"]["depth"]["min"] > 0
        data = np.load(body["files"][0])
        assert data["depth"].shape == (480, 640)

    def test_parity_with_protocol_dispatch(self, catalog):
        """Identical arguments cause identical mutations on both surfaces."""
        args = {"obj_id": "t", "obj_path": BOX_PATH,
                "location": [10.5, -3.25, 0.0], "rotation": [0.0, 33.0, 0.0],
                "scale": 1.25, "collision_handling": "adjust_if_possible"}
        w_mcp = SceneWorld(catalog)
        mcp_server = McpServer(w_mcp)
        mcp_server.initialized = True
        _call_direct = mcp_server.call_tool("spawn_object", dict(args))
        w_proto = SceneWorld(catalog)
        Dispatcher(w_proto).dispatch("spawn_object", dict(args))
        assert w_mcp.export_snapshot() == w_proto.export_snapshot()


class TestSessionRobustness:
    def test_malformed_and_unknown_messages(self, catalog):
        server = _mcp(catalog)
        r = server.handle_message({"jsonrpc": "2.0", "id": 9,
                                   "method": "no/such"})
        assert "error" in r
        r = server.handle_message({"not": "jsonrpc"})
        assert "error" in r
        # session still works afterwards
        r = _call(server, 10, "list_objects", {})
        assert _text_result(r)["objects"] == []

    def test_stdio_subprocess_session(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "lychsim.mcp"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL)
        try:
            def send(obj):
                proc.stdin.write(json.dumps(obj).encode() + b"\n")
                proc.stdin.flush()
                return json.loads(proc.stdout.readline())

            r = send({"jsonrpc": "2.0", "id": 1, "method": "initialize",
                      "params": {"protocolVersion": "2024-11-05"}})
            assert r["result"]["serverInfo"]["name"] == "lychsim"
            proc.stdin.write(b"garbage that is not json\n")
            proc.stdin.flush()
            r = json.loads(proc.stdout.readline())
            assert r["error"]["code"] == -32700
            r = send({"jsonrpc": "2.0", "id": 2, "method": "tools/list"})
            assert {t["name"] for t in r["result"]["tools"]} == EXPECTED_TOOLS
            r = send({"jsonrpc": "2.0", "id": 3, "method": "tools/call",
                      "params": {"name": "list_objects", "arguments": {}}})
            assert json.loads(r["result"]["content"][0]["text"])["objects"] == []
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)
