import math

import numpy as np

from conftest import BOX_PATH, SPHERE_PATH

from lychsim.errors import SimError
from lychsim.world import SceneWorld


def _codes(callable_, *args, **kwargs):
    try:
        callable_(*args, **kwargs)
        return "ok"
    except SimError as exc:
        return exc.code


class TestSpawn:
    def test_default_spawn(self, world):
        world.spawn_object("a", BOX_PATH)
        assert world.list_objects() == ["a"]

    def test_duplicate_id(self, world):
        world.spawn_object("a", BOX_PATH)
        assert _codes(world.spawn_object, "a", BOX_PATH, location=(500, 0, 0)) \
            == "object_with_same_name_already_exists"
        # the failed spawn must not have mutated anything
        assert np.allclose(world.get_object_location("a"), [0, 0, 0])

    def test_missing_asset(self, world):
        assert _codes(world.spawn_object, "a", "/Game/Nope.Nope") \
            == "failed_to_spawn_actor"

    def test_bad_args(self, world):
        assert _codes(world.spawn_object, "a", BOX_PATH, scale=-1) \
            == "unknown_argument_format"
        assert _codes(world.spawn_object, "a", BOX_PATH,
                      collision_handling="maybe") == "unknown_argument_format"

    def test_default_mode_allows_overlap(self, world):
        world.spawn_object("a", BOX_PATH)
        world.spawn_object("b", BOX_PATH)  # exactly atop, mode default
        assert world.list_objects() == ["a", "b"]

    def test_skip_if_colliding(self, world):
        world.spawn_object("a", BOX_PATH)
        assert _codes(world.spawn_object, "b", BOX_PATH,
                      collision_handling="skip_if_colliding") \
            == "failed_to_spawn_actor"
        assert world.list_objects() == ["a"]
        world.spawn_object("c", BOX_PATH, location=(500, 0, 0),
                           collision_handling="skip_if_colliding")
        assert "c" in world.list_objects()

    def test_adjust_if_possible_nudges(self, world):
        world.spawn_object("a", BOX_PATH)
        world.spawn_object("b", BOX_PATH,
                           collision_handling="adjust_if_possible")
        a = world.get_object("a").world_aabb
        b = world.get_object("b").world_aabb
        assert not a.overlaps(b)
        loc = world.get_object_location("b")
        assert loc[2] == 0.0  # Z never altered
        # within the nudge bound: 16 rings of 0.25 * max extent
        assert np.linalg.norm(loc[:2]) <= 4 * 100 + 1e-9

    def test_adjust_exhaustion(self, world):
        # box the requested spot in with a wall of giant cubes
        world.spawn_object("wall", BOX_PATH, location=(0, 0, -500), scale=10)
        assert _codes(world.spawn_object, "b", BOX_PATH,
                      collision_handling="adjust_if_possible") \
            == "failed_to_spawn_actor"
        assert world.list_objects() == ["wall"]

    def test_adjust_free_spot_unchanged(self, world):
        world.spawn_object("a", BOX_PATH, location=(123, 45, 6),
                           collision_handling="adjust_if_possible")
        assert np.allclose(world.get_object_location("a"), [123, 45, 6])

    def test_skip_postcondition_randomized(self, catalog):
        rng = np.random.default_rng(21)
        w = SceneWorld(catalog)
        placed = 0
        for i in range(40):
            loc = rng.uniform([-300, -300, 0], [300, 300, 0])
            try:
                w.spawn_object(f"o{i}", BOX_PATH, location=loc,
                               collision_handling="skip_if_colliding")
                placed += 1
            except SimError:
                pass
        objs = [w.get_object(i).world_aabb for i in w.list_objects()]
        for i in range(len(objs)):
            for j in range(i + 1, len(objs)):
                assert not objs[i].overlaps(objs[j])
        assert placed == len(objs)


class TestEditing:
    def test_move_round_trip(self, world):
        world.spawn_object("a", BOX_PATH)
        world.set_object_location("a", (100, 0, -20))
        assert np.allclose(world.get_object_location("a"), [100, 0, -20])

    def test_fixture_location_echo(self, world):
        world.spawn_object("corner", BOX_PATH, location=(420, -410, -20))
        assert np.allclose(world.get_object_location("corner"),
                           [420, -410, -20])

    def test_delete(self, world):
        world.spawn_object("a", BOX_PATH)
        world.delete_object("a")
        assert _codes(world.get_object_location, "a") == "object_not_found"
        assert _codes(world.delete_object, "a") == "object_not_found"

    def test_rotation_lock(self, world):
        world.spawn_object("a", BOX_PATH, rotation=(0, 45, 0),
                           lock_rotation=True)
        assert _codes(world.set_object_rotation, "a", (0, 90, 0)) \
            == "rotation_locked"
        assert world.get_object_rotation("a").yaw == 45.0
        assert _codes(world.update_object, "a", rotation=(0, 90, 0)) \
            == "rotation_locked"
        world.update_object("a", location=(5, 5, 5))  # location still editable
        assert np.allclose(world.get_object_location("a"), [5, 5, 5])

    def test_update_partial_and_atomic(self, world):
        world.spawn_object("a", BOX_PATH)
        world.update_object("a", location=(1, 2, 3), scale=2.0)
        obj = world.get_object("a")
        assert obj.pose.scale == 2.0 and np.allclose(obj.pose.location, [1, 2, 3])
        assert _codes(world.update_object, "a", scale=-3) \
            == "unknown_argument_format"
        assert world.get_object("a").pose.scale == 2.0

    def test_list_in_spawn_order(self, world):
        for name in ("a", "b", "c"):
            world.spawn_object(name, BOX_PATH, location=(0, 0, 0))
        assert world.list_objects() == ["a", "b", "c"]


class TestCameras:
    def test_default_camera(self, world):
        cam = world.get_camera(0)
        assert cam.horizontal_fov == 90.0
        assert (cam.width, cam.height) == (640, 480)
        assert np.allclose(cam.pose.location, [0, 0, 0])

    def test_set_get_round_trip(self, world):
        world.set_camera(0, location=(260, -300, 165), rotation=(0, -13, 24))
        cam = world.get_camera(0)
        assert np.allclose(cam.pose.location, [260, -300, 165])
        assert cam.pose.rotation.as_tuple() == (0.0, -13.0, 24.0)

    def test_auto_create_and_missing(self, world):
        assert _codes(world.get_camera, 3) == "camera_not_found"
        world.set_camera(3, location=(1, 1, 1))
        assert np.allclose(world.get_camera(3).pose.location, [1, 1, 1])

    def test_fov_bound(self, world):
        assert _codes(world.set_camera, 0, fov=200) == "unknown_argument_format"
        assert _codes(world.set_camera, 0, fov=0.5) == "unknown_argument_format"


class TestSceneParams:
    def test_defaults(self, world):
        p = world.get_scene_params()
        assert abs(np.linalg.norm(p.sun_direction) - 1) < 1e-9
        assert p.ambient_intensity == 0.2
        assert math.isinf(p.fog_visibility)

    def test_sun_normalized_zero_rejected(self, world):
        world.set_scene_params(sun_direction=(0, 0, -5))
        assert np.allclose(world.get_scene_params().sun_direction, [0, 0, -1])
        assert _codes(world.set_scene_params, sun_direction=(0, 0, 0)) \
            == "unknown_argument_format"

    def test_fog_and_rain(self, world):
        world.set_scene_params(fog_visibility=1500.0)
        assert world.get_scene_params().fog_visibility == 1500.0
        world.set_scene_params(fog_visibility="inf")
        assert math.isinf(world.get_scene_params().fog_visibility)
        world.set_scene_params(rain_params={"intensity": "0.7"})
        assert world.get_scene_params().rain_params == {"intensity": "0.7"}


class TestSnapshot:
    def test_empty_world_snapshot(self, world):
        doc = world.export_snapshot()
        assert doc["format_version"] == 1
        assert doc["objects"] == []
        assert len(doc["cameras"]) == 1
        assert doc["scene_params"]["ambient_intensity"] == 0.2

    def test_round_trip_state(self, world, catalog):
        world.spawn_object("a", BOX_PATH, location=(420, -410, -20),
                           rotation=(0, -13, 24), scale=1.5,
                           lock_rotation=True)
        world.spawn_object("b", SPHERE_PATH, location=(100, 50, 0))
        world.set_camera(0, location=(260, -300, 165), rotation=(0, -13, 24))
        world.set_scene_params(fog_visibility=2345.0,
                               rain_params={"drops": "many"})
        doc = world.export_snapshot()
        other = SceneWorld(catalog)
        other.load_snapshot(doc)
        assert other.export_snapshot() == doc

    def test_load_requires_empty_or_clear(self, world):
        world.spawn_object("a", BOX_PATH)
        doc = world.export_snapshot()
        assert _codes(world.load_snapshot, doc) == "unknown_argument_format"
        world.load_snapshot(doc, clear=True)
        assert world.list_objects() == ["a"]

    def test_missing_asset_atomic(self, world, catalog):
        world.spawn_object("a", BOX_PATH)
        doc = world.export_snapshot()
        doc["objects"][0]["asset_path"] = "/Game/Gone.Gone"
        other = SceneWorld(catalog)
        other.spawn_object("keep", BOX_PATH)
        assert _codes(other.load_snapshot, doc, clear=True) == "asset_not_found"
        assert other.list_objects() == ["keep"]

    def test_version_mismatch(self, world):
        doc = world.export_snapshot()
        doc["format_version"] = 99
        assert _codes(world.load_snapshot, doc) == "version_mismatch"

    def test_file_round_trip(self, world, catalog, tmp_path):
        world.spawn_object("a", BOX_PATH, location=(1.25, -3.5, 0.125))
        path = tmp_path / "snap.json"
        world.save_snapshot_file(path)
        other = SceneWorld(catalog)
        other.load_snapshot_file(path)
        assert other.export_snapshot() == world.export_snapshot()
