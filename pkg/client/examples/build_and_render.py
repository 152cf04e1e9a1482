"""Connect to a running server, stage a scene, and pull ground truths.

Start the server first, e.g.:
    python -m lychsim.server --port 9000 --catalog manifest.json
then run this script (asset paths below must exist in your manifest).
"""

import numpy as np
import PIL.Image

from lychsim_client import LychSim

TRUCK = "/Game/path/to/SKM_Reach_Truck_01a.SKM_Reach_Truck_01a"
CAR = "/Game/path/to/BP_vehicle12_Car.BP_vehicle12_Car"

sim = LychSim(server_name="localhost", port=9000)

# scene layout planning: e.g., from procedural rules
locations = {"reach_truck_01": [700, -150, 0], "car_01": [800, 150, 0]}
rotations = {"reach_truck_01": [0, 35, 0], "car_01": [0, -90, 0]}

sim.add_obj(
    obj_id="reach_truck_01",
    obj_path=TRUCK,
    location=locations["reach_truck_01"],
    rotation=rotations["reach_truck_01"])

sim.add_obj(
    obj_id="car_01",
    obj_path=CAR,
    location=locations["car_01"],
    rotation=rotations["car_01"],
    adjust_if_possible=True)

img: PIL.Image.Image = sim.get_cam_lit(cam_id=0, warmup=50)
seg: PIL.Image.Image = sim.get_cam_seg(cam_id=0)
depth: np.ndarray = sim.get_cam_depth(cam_id=0)
point_map: np.ndarray = sim.get_cam_pointmap(cam_id=0, space="opencv")["opencv"]

obj_annots = sim.get_obj_annots()

img.save("lit.png")
seg.save("seg.png")
print("objects:", sim.list_objects())
print("depth range:", np.nanmin(depth[np.isfinite(depth)]), "to",
      np.nanmax(depth[np.isfinite(depth)]), "cm")
print("snapshot objects:", [o["obj_id"] for o in obj_annots["objects"]])
sim.close()
