import pytest

from lychsim.assets import Catalog
from lychsim.geometry import Rotator
from lychsim.world import SceneWorld

BOX_PATH = "/Game/Test/SM_Box.SM_Box"
BOX_PARTS_PATH = "/Game/Test/SM_BoxParts.SM_BoxParts"
SPHERE_PATH = "/Game/Test/SM_Ball.SM_Ball"
TALL_PATH = "/Game/Test/SM_Pillar.SM_Pillar"
PLATE_PATH = "/Game/Test/SM_Plate.SM_Plate"


@pytest.fixture(scope="session")
def catalog():
    cat = Catalog()
    cat.add_primitive(BOX_PATH, "box", [100.0, 100.0, 100.0], category="box")
    cat.add_primitive(BOX_PARTS_PATH, "box", [100.0, 100.0, 100.0],
                      parts=True, category="box")
    cat.add_primitive(SPHERE_PATH, "sphere", [50.0, 2], category="ball")
    cat.add_primitive(TALL_PATH, "box", [40.0, 40.0, 200.0], category="pillar")
    # thin fronto-parallel plate: projects to a clean rectangle from +X views
    cat.add_primitive(PLATE_PATH, "box", [2.0, 100.0, 100.0], category="plate")
    return cat


@pytest.fixture
def world(catalog):
    return SceneWorld(catalog)


def random_world(catalog, rng, n_objects, span=800.0):
    """Scatter random boxes/spheres in front of the default camera."""
    w = SceneWorld(catalog)
    paths = [BOX_PATH, SPHERE_PATH, TALL_PATH]
    for i in range(n_objects):
        path = paths[int(rng.integers(len(paths)))]
        loc = rng.uniform([300.0, -span / 2, -150.0], [300.0 + span, span / 2, 150.0])
        rot = Rotator(*rng.uniform(-180.0, 180.0, 3))
        w.spawn_object(f"obj_{i}", path, location=loc, rotation=rot.as_tuple(),
                       scale=float(rng.uniform(0.4, 1.6)))
    return w


def entries_of(world):
    snap = world.snapshot()
    return [(snap.catalog.get(o.asset_path), o.pose) for o in snap.objects], snap
