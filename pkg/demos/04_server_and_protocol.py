"""Talk to the simulation server over its wire protocol, bare sockets only.

Starts an in-process server on a free port, then exchanges length-prefixed
JSON frames by hand: spawn, query, render, and decode a tensor — exactly
what any non-Python client would implement.  (The packaged client SDK in
client/ wraps this protocol; `python -m lychsim.server` runs the same
server standalone.)
"""

import base64
import json
import socket
import struct

import numpy as np

from lychsim import Catalog, SceneWorld
from lychsim.server import SimServer

catalog = Catalog()
catalog.add_primitive("/Game/Demo/SM_Crate.SM_Crate", "box", [100, 100, 100],
                      category="crate")
server = SimServer(SceneWorld(catalog), port=0).start()
print(f"server listening on 127.0.0.1:{server.port}")

sock = socket.create_connection(("127.0.0.1", server.port))


def rpc(req_id, cmd, **args):
    payload = json.dumps({"id": req_id, "cmd": cmd, "args": args}).encode()
    sock.sendall(struct.pack(">I", len(payload)) + payload)
    (length,) = struct.unpack(">I", sock.recv(4, socket.MSG_WAITALL))
    buf = b""
    while len(buf) < length:
        buf += sock.recv(length - len(buf))
    return json.loads(buf)


print(rpc(1, "list_objects"))
print(rpc(2, "spawn_object", obj_id="crate",
          obj_path="/Game/Demo/SM_Crate.SM_Crate", location=[450, 0, -50]))
print(rpc(3, "spawn_object", obj_id="crate",
          obj_path="/Game/Demo/SM_Crate.SM_Crate"))  # duplicate -> error code
print(rpc(4, "get_object_location", obj_id="crate"))

resp = rpc(5, "get_cam_depth")
tensor = resp["tensors"][0]
depth = np.frombuffer(base64.b64decode(tensor["data"]),
                      dtype="<f4").reshape(tensor["shape"])
finite = np.isfinite(depth)
print(f"depth tensor {tensor['shape']}: {finite.sum()} hit pixels, "
      f"nearest {depth[finite].min():.1f} cm")

snapshot = rpc(6, "get_obj_annots")["data"]["snapshot"]
print("snapshot objects:", [o["obj_id"] for o in snapshot["objects"]])

sock.close()
server.stop()
