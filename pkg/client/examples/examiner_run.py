"""Attach your own segmenter to the adversarial examiner, client-side.

Needs a running server.  segment_fn receives the lit image (uint8 HxWx3),
the ground-truth target mask, and the sampled viewpoint; plug in a real
model here (the demo uses the built-in flawed oracle so there is a
weakness to find).
"""

from lychsim_client import (ClientExaminerConfig, LychSim, flawed_oracle,
                            run_external_examiner)

BOX = "/Game/Assets/SM_Box.SM_Box"

sim = LychSim(server_name="localhost", port=9000)
sim.add_obj(obj_id="target", obj_path=BOX, location=[0, 0, -50])


def segment_fn(lit, gt_mask, viewpoint):
    # swap in your model: return a boolean mask at the lit resolution
    return flawed_oracle(lit, gt_mask, viewpoint)


report = run_external_examiner(
    sim, "target", segment_fn,
    ClientExaminerConfig(population=16, iterations=25, seed=0,
                         elevation_bounds=(0.0, 60.0),
                         radius_bounds=(250.0, 450.0),
                         width=320, height=240))

print("total renders:", report["total_renders"])
print("best IoU:", round(report["best_iou"], 3),
      "at", report["best_viewpoint"])
print("final policy mean:", report["final_policy"]["mean"])
for entry in report["gallery"]:
    print("  gallery:", round(entry["iou"], 3), entry["viewpoint"])
sim.close()
