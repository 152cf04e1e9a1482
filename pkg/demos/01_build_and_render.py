"""Build a small scene programmatically and render every ground-truth channel.

Walks the core loop: define a catalog of annotated assets, spawn objects
with collision handling, point a camera, and pull the aligned buffer stack
(lit / depth / instance / part / normal / point map).  Writes PNGs next to
this script under output/.
"""

import os

import numpy as np
from PIL import Image

from lychsim import Catalog, SceneWorld

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# A catalog entry = mesh + annotations (category, canonical scale, alignment).
catalog = Catalog()
catalog.add_primitive("/Game/Demo/SM_Crate.SM_Crate", "box", [100, 100, 100],
                      parts=True, category="crate",
                      caption="a slatted wooden shipping crate")
catalog.add_primitive("/Game/Demo/SM_Barrel.SM_Barrel", "cylinder", [30, 90],
                      category="barrel", caption="a steel drum barrel")
catalog.add_primitive("/Game/Demo/SM_Ball.SM_Ball", "sphere", [40, 3],
                      category="ball", caption="a smooth rubber ball")
catalog.add_primitive("/Game/Demo/Floor.Floor", "box", [1200, 1200, 10],
                      category="floor")

world = SceneWorld(catalog)
world.spawn_object("floor", "/Game/Demo/Floor.Floor", location=(600, 0, -60))
world.spawn_object("crate_1", "/Game/Demo/SM_Crate.SM_Crate",
                   location=(500, -80, -50), rotation=(0, 30, 0))
world.spawn_object("crate_2", "/Game/Demo/SM_Crate.SM_Crate",
                   location=(520, -70, -50),
                   collision_handling="adjust_if_possible")
world.spawn_object("barrel", "/Game/Demo/SM_Barrel.SM_Barrel",
                   location=(420, 90, -50))
world.spawn_object("ball", "/Game/Demo/SM_Ball.SM_Ball",
                   location=(350, 10, -50))

# nudged spawn landed somewhere nearby but collision-free
print("crate_2 ended at", world.get_object_location("crate_2").round(1))

world.set_camera(0, location=(0, 0, 60), rotation=(-5, 0, 0))
world.set_scene_params(fog_visibility=4000.0)

fs = world.render(0)


def save(name, img):
    Image.fromarray(img).save(os.path.join(OUT, name))
    print("wrote", name)


def colorize(scalar, valid):
    lo, hi = scalar[valid].min(), scalar[valid].max()
    norm = np.zeros_like(scalar, dtype=np.float64)
    norm[valid] = (scalar[valid] - lo) / max(hi - lo, 1e-9)
    return (np.stack([norm, norm, norm], axis=2) * 255).astype(np.uint8)


save("lit.png", fs.lit)
save("depth.png", colorize(fs.depth, np.isfinite(fs.depth)))
save("instance.png", (fs.instance.astype(np.uint32)[..., None]
                      * np.array([97, 57, 23], np.uint32) % 256
                      ).astype(np.uint8))
save("part.png", (fs.part.astype(np.uint32)[..., None]
                  * np.array([41, 83, 139], np.uint32) % 256).astype(np.uint8))
save("normal.png", ((fs.normal * 0.5 + 0.5) * 255).astype(np.uint8))

# the point map holds per-pixel 3D surface coordinates; its camera-frame
# forward component is exactly the depth buffer
from lychsim import pointmap_in_space  # noqa: E402

cv = pointmap_in_space(fs, "opencv")
hit = fs.instance != 0
print("max |pointmap_z - depth| =", np.abs(cv[..., 2][hit] - fs.depth[hit]).max())
