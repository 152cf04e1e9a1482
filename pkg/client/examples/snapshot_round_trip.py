"""Export the scene, wipe it, reload it, and prove the renders match.

Needs a running server (see build_and_render.py).  The snapshot returned
by get_obj_annots fully reconstructs the world: reloading it reproduces
every ground-truth buffer bit for bit, which we verify via the server's
checksum command.
"""

import json

from lychsim_client import LychSim

BOX = "/Game/Assets/SM_Box.SM_Box"

sim = LychSim(server_name="localhost", port=9000)

sim.add_obj(obj_id="crate_a", obj_path=BOX, location=[420, -410, -20],
            rotation=[0, -13, 24])
sim.add_obj(obj_id="crate_b", obj_path=BOX, location=[550, 60, -20],
            adjust_if_possible=True)
sim.set_camera_location([260, -300, 165])
sim.set_camera_rotation([0, -13, 24])

before = sim.get_cam_checksums(cam_id=0)
snapshot = sim.get_obj_annots()
with open("scene_snapshot.json", "w") as fh:
    json.dump(snapshot, fh, indent=2)
print("saved scene_snapshot.json with", len(snapshot["objects"]), "objects")

print("reload:", sim.load_snapshot(snapshot, clear=True))
after = sim.get_cam_checksums(cam_id=0)
print("render checksums identical:", before == after)
sim.close()
