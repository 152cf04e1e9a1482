"""Per-object ground truth: occlusion, truncation, boxes, part visibility.

Stages a deliberately occluded and truncated arrangement, then prints the
full annotation record for each object, including who occludes whom.
"""

from lychsim import Catalog, SceneWorld, annotate_all, occlusion_graph

catalog = Catalog()
catalog.add_primitive("/Game/Demo/SM_Crate.SM_Crate", "box", [100, 100, 100],
                      parts=True, category="crate")
catalog.add_primitive("/Game/Demo/SM_Panel.SM_Panel", "box", [4, 160, 160],
                      category="panel")

world = SceneWorld(catalog)
# crate partially hidden behind a panel, second crate shoved off-frame right
world.spawn_object("crate_back", "/Game/Demo/SM_Crate.SM_Crate",
                   location=(600, 0, -50))
world.spawn_object("panel", "/Game/Demo/SM_Panel.SM_Panel",
                   location=(300, -60, -80))
world.spawn_object("crate_edge", "/Game/Demo/SM_Crate.SM_Crate",
                   location=(400, 360, -50))

snapshot = world.snapshot()
camera = snapshot.camera(0)

print("occlusion graph:", sorted(occlusion_graph(snapshot, camera)))
print()

for ann in annotate_all(snapshot, camera):
    print(f"== {ann.obj_id} ({ann.category})")
    print(f"   occlusion    {ann.occlusion_ratio:.3f}")
    print(f"   truncation   {ann.truncation_ratio:.3f}"
          f"{'  (fully truncated)' if ann.fully_truncated else ''}")
    print(f"   occluded_by  {ann.occluded_by}")
    print(f"   bbox2d vis   {ann.bbox_2d_visible}")
    print(f"   bbox2d amod  {ann.bbox_2d_amodal}")
    visible_parts = {p: round(v, 2)
                     for p, v in ann.part_visibility.items() if v > 0}
    print(f"   parts >0     {visible_parts}")
