"""Shipped sample content: the loft-office test scene.

A furnished loft office built entirely from primitive stand-ins (the real
marketplace meshes are not redistributable): floor spanning the room
corners at Z = -20, a desk group with monitor/books/vase on the 75 cm
table top, chairs, a reading nook, plants at scale 5, and the canonical
hero camera at (260, -300, 165) with rotation (0, -13, 24).

Used by the test suite as a deterministic fixture and by the demos as a
ready-made scene.
"""

from .assets import Catalog
from .procedural import ProceduralRule
from .world import SceneWorld

FLOOR_Z = -20.0
FLOOR_X = (420.0, 869.0)
FLOOR_Y = (-410.0, 180.0)
DESK_TOP_HEIGHT = 75.0
HERO_CAMERA_LOCATION = (260.0, -300.0, 165.0)
HERO_CAMERA_ROTATION = (0.0, -13.0, 24.0)  # [pitch, yaw, roll]

_ASSETS = [
    # (path, category, primitive kind, dimensions cm, parts)
    ("/Game/LoftOffice/Meshes/SM_Table_2.SM_Table_2", "table",
     "box", [180.0, 90.0, DESK_TOP_HEIGHT], True),
    ("/Game/LoftOffice/Meshes/SM_Chair_1.SM_Chair_1", "chair",
     "box", [45.0, 45.0, 95.0], False),
    ("/Game/LoftOffice/Meshes/SM_Chair_3.SM_Chair_3", "chair",
     "box", [50.0, 50.0, 90.0], False),
    ("/Game/LoftOffice/Meshes/SM_Armchair_2.SM_Armchair_2", "chair",
     "box", [80.0, 85.0, 75.0], False),
    ("/Game/LoftOffice/Meshes/SM_Monitor_2.SM_Monitor_2", "electronics",
     "box", [55.0, 8.0, 40.0], False),
    ("/Game/LoftOffice/Meshes/SM_Stack_of_Books_2.SM_Stack_of_Books_2", "decor",
     "box", [25.0, 18.0, 22.0], False),
    ("/Game/LoftOffice/Meshes/SM_Vase_1.SM_Vase_1", "decor",
     "cylinder", [8.0, 28.0], False),
    ("/Game/LoftOffice/Meshes/SM_Plant_3.SM_Plant_3", "plant",
     "cylinder", [6.0, 30.0], False),
    ("/Game/LoftOffice/Meshes/SM_Floor_Lamp.SM_Floor_Lamp", "lamp",
     "cylinder", [15.0, 150.0], False),
    ("/Game/LoftOffice/Meshes/SM_Drawer.SM_Drawer", "storage",
     "box", [80.0, 45.0, 70.0], False),
    ("/Game/LoftOffice/Floor.Floor", "floor",
     "box", [FLOOR_X[1] - FLOOR_X[0], FLOOR_Y[1] - FLOOR_Y[0], 4.0], False),
]

# (obj_id, asset path index, location, yaw, scale)
_LAYOUT = [
    ("floor", 10, ((FLOOR_X[0] + FLOOR_X[1]) / 2,
                   (FLOOR_Y[0] + FLOOR_Y[1]) / 2, FLOOR_Z - 4.0), 0.0, 1.0),
    ("table_1", 0, (620.0, -120.0, FLOOR_Z), 0.0, 1.0),
    ("monitor_1", 4, (640.0, -130.0, FLOOR_Z + DESK_TOP_HEIGHT), 180.0, 1.0),
    ("books_1", 5, (590.0, -90.0, FLOOR_Z + DESK_TOP_HEIGHT), 20.0, 1.0),
    ("vase_1", 6, (660.0, -85.0, FLOOR_Z + DESK_TOP_HEIGHT), 0.0, 1.0),
    ("chair_office_1", 1, (540.0, -120.0, FLOOR_Z), 0.0, 1.0),
    ("chair_1", 2, (700.0, -160.0, FLOOR_Z), 180.0, 1.0),
    ("chair_2", 2, (700.0, -75.0, FLOOR_Z), 180.0, 1.0),
    ("armchair_1", 3, (790.0, 100.0, FLOOR_Z), -135.0, 1.0),
    ("lamp_1", 8, (845.0, 140.0, FLOOR_Z), 0.0, 1.0),
    ("plant_1", 7, (450.0, 150.0, FLOOR_Z), 0.0, 5.0),
    ("plant_2", 7, (845.0, -380.0, FLOOR_Z), 0.0, 5.0),
    ("drawer_1", 9, (450.0, -380.0, FLOOR_Z), 90.0, 1.0),
]


def loft_office_catalog() -> Catalog:
    catalog = Catalog()
    for path, category, kind, dims, parts in _ASSETS:
        catalog.add_primitive(path, kind, dims, parts=parts, category=category,
                              caption=f"loft office {category} stand-in")
    return catalog


def build_loft_office(world: SceneWorld | None = None) -> SceneWorld:
    """Spawn the furnished loft office and set the hero camera."""
    if world is None:
        world = SceneWorld(loft_office_catalog())
    for obj_id, asset_idx, location, yaw, scale in _LAYOUT:
        world.spawn_object(obj_id, _ASSETS[asset_idx][0], location=location,
                           rotation=(0.0, yaw, 0.0), scale=scale,
                           collision_handling="adjust_if_possible")
    world.set_camera(0, location=HERO_CAMERA_LOCATION,
                     rotation=HERO_CAMERA_ROTATION)
    return world


def loft_floor_rule() -> ProceduralRule:
    """The room's navigable floor as an area rule."""
    cx = (FLOOR_X[0] + FLOOR_X[1]) / 2.0
    cy = (FLOOR_Y[0] + FLOOR_Y[1]) / 2.0
    hx = (FLOOR_X[1] - FLOOR_X[0]) / 2.0
    hy = (FLOOR_Y[1] - FLOOR_Y[0]) / 2.0
    return ProceduralRule("loft_floor", "navigable_area", "area",
                          center=(cx, cy, FLOOR_Z), half_extents=(hx, hy))
