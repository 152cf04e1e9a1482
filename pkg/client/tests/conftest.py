import json
import socket
import subprocess
import sys
import time

import pytest

BOX = "/Game/Assets/SM_Box.SM_Box"
TRUCK = "/Game/path/to/SKM_Reach_Truck_01a.SKM_Reach_Truck_01a"
CAR = "/Game/path/to/BP_vehicle12_Car.BP_vehicle12_Car"

MANIFEST = {
    "format_version": 1,
    "assets": [
        {"asset_path": BOX, "category": "box",
         "primitive": {"kind": "box", "dimensions": [100, 100, 100],
                       "parts": True}},
        {"asset_path": TRUCK, "category": "vehicle", "kind": "composite",
         "caption": "a forklift-style reach truck",
         "primitive": {"kind": "box", "dimensions": [220, 110, 200]}},
        {"asset_path": CAR, "category": "vehicle", "kind": "composite",
         "caption": "a compact car",
         "primitive": {"kind": "box", "dimensions": [420, 180, 140]}},
    ],
}


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="session")
def server_port(tmp_path_factory):
    """A live server subprocess started through its CLI."""
    manifest = tmp_path_factory.mktemp("srv") / "manifest.json"
    manifest.write_text(json.dumps(MANIFEST))
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "lychsim.server", "--port", str(port),
         "--catalog", str(manifest), "--log-level", "warning"],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    deadline = time.time() + 60
    while time.time() < deadline:
        try:
            socket.create_connection(("127.0.0.1", port), timeout=1).close()
            break
        except OSError:
            if proc.poll() is not None:
                raise RuntimeError("server process exited during startup")
            time.sleep(0.2)
    else:
        proc.terminate()
        raise RuntimeError("server did not come up")
    yield port
    proc.terminate()
    proc.wait(timeout=10)


@pytest.fixture
def sim(server_port):
    from lychsim_client import LychSim
    client = LychSim(server_name="localhost", port=server_port)
    # each test starts from an empty world with the default camera
    client.load_snapshot({
        "format_version": 1, "catalog": None, "objects": [],
        "cameras": [{"cam_id": 0, "location": [0, 0, 0],
                     "rotation": [0, 0, 0], "fov": 90.0,
                     "width": 640, "height": 480}],
        "scene_params": {}}, clear=True)
    yield client
    client.close()
