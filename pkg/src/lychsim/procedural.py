"""Rule-driven procedural scene generation.

Spatial priors come in three geometries (directed lines, splines,
rectangular areas) tagged with one of four categories (road/navigable
areas, vehicle/pedestrian trajectories).  Samplers draw placements from
those geometries; generate_scene turns samples into collision-free spawns
at several visual-complexity modes.

Every random draw flows through a counter-based Philox generator keyed by
(seed, named stream), so per-rule and per-object streams are independent:
inserting an object cannot perturb any other sample.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SimError, BAD_ARGS, INFEASIBLE
from .geometry import look_at_rotator, vec3

RULE_CATEGORIES = ("road_area", "navigable_area",
                   "vehicle_trajectory", "pedestrian_trajectory")
RULE_FILE_VERSION = 1
MODES = ("standard", "high_density", "clustered", "occluded_view",
         "uncommon_viewpoint")

_AREA_CATEGORIES = {"road_area", "navigable_area"}
_TRAJECTORY_CATEGORIES = {"vehicle_trajectory", "pedestrian_trajectory"}

_CHORDS_PER_SPAN = 64
_REJECTION_FACTOR = 1000


def stream_rng(seed, *labels) -> np.random.Generator:
    """Independent, reproducible generator for a named stream.

    The Philox key is a digest of (seed, labels), so streams never overlap
    and draws in one stream cannot shift another.
    """
    text = "|".join([str(int(seed))] + [str(l) for l in labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class ProceduralRule:
    rule_id: str
    category: str
    kind: str                      # line | spline | area
    anchors: np.ndarray = None     # (N, 3) for line/spline
    center: np.ndarray = None      # area only
    half_extents: np.ndarray = None  # area only, (hx, hy)
    yaw: float = 0.0               # area only, degrees

    def __post_init__(self):
        if self.category not in RULE_CATEGORIES:
            raise SimError(BAD_ARGS, f"unknown rule category {self.category!r}")
        if self.kind in ("line", "spline"):
            if self.category not in _TRAJECTORY_CATEGORIES:
                raise SimError(BAD_ARGS,
                               f"{self.category} rules must use area geometry")
            self.anchors = np.asarray(self.anchors, dtype=np.float64).reshape(-1, 3)
            need = 2
            if len(self.anchors) < need:
                raise SimError(BAD_ARGS, "trajectory needs at least 2 anchors")
            if self.kind == "line" and len(self.anchors) != 2:
                raise SimError(BAD_ARGS, "line takes exactly 2 anchors")
            diffs = np.linalg.norm(np.diff(self.anchors, axis=0), axis=1)
            if np.any(diffs == 0.0):
                raise SimError(BAD_ARGS, "consecutive anchors must be distinct")
        elif self.kind == "area":
            if self.category not in _AREA_CATEGORIES:
                raise SimError(BAD_ARGS,
                               f"{self.category} rules must use line/spline geometry")
            self.center = vec3(self.center)
            self.half_extents = np.asarray(self.half_extents,
                                           dtype=np.float64).reshape(2)
            if np.any(self.half_extents <= 0):
                raise SimError(BAD_ARGS, "area half-extents must be positive")
            self.yaw = float(self.yaw)
        else:
            raise SimError(BAD_ARGS, f"unknown rule geometry {self.kind!r}")

    @property
    def is_trajectory(self):
        return self.kind in ("line", "spline")

    def area_m2(self) -> float:
        if self.kind != "area":
            raise SimError(BAD_ARGS, "not an area rule")
        return float(4.0 * self.half_extents[0] * self.half_extents[1] / 1e4)


class RuleParseError(ValueError):
    pass


def parse_rules_text(text, source="<rules>"):
    """Parse the line-oriented rule format.

    version 1
    rule <id> <category> line x1 y1 z1 x2 y2 z2
    rule <id> <category> spline x y z  x y z  ...
    rule <id> <category> area cx cy cz hx hy yaw
    """
    rules = []
    seen = set()
    version_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "version":
            if len(tokens) != 2 or int(tokens[1]) != RULE_FILE_VERSION:
                raise RuleParseError(f"{source}:{lineno}: unsupported version")
            version_seen = True
            continue
        if tokens[0] != "rule":
            raise RuleParseError(f"{source}:{lineno}: expected 'rule' or 'version'")
        if len(tokens) < 4:
            raise RuleParseError(f"{source}:{lineno}: truncated rule")
        _, rule_id, category, kind = tokens[:4]
        if rule_id in seen:
            raise RuleParseError(f"{source}:{lineno}: duplicate rule id {rule_id!r}")
        try:
            nums = [float(t) for t in tokens[4:]]
        except ValueError:
            raise RuleParseError(f"{source}:{lineno}: bad number") from None
        try:
            if kind == "area":
                if len(nums) != 6:
                    raise SimError(BAD_ARGS, "area takes cx cy cz hx hy yaw")
                rule = ProceduralRule(rule_id, category, "area",
                                      center=nums[0:3], half_extents=nums[3:5],
                                      yaw=nums[5])
            else:
                if len(nums) % 3 != 0 or not nums:
                    raise SimError(BAD_ARGS, "anchors need 3 coordinates each")
                anchors = np.array(nums).reshape(-1, 3)
                rule = ProceduralRule(rule_id, category, kind, anchors=anchors)
        except SimError as exc:
            raise RuleParseError(f"{source}:{lineno}: {exc.detail or exc.code}") from None
        seen.add(rule_id)
        rules.append(rule)
    if not version_seen:
        raise RuleParseError(f"{source}: missing version line")
    return rules


def parse_rules(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rules_text(fh.read(), source=str(path))


def rules_to_text(rules) -> str:
    lines = [f"version {RULE_FILE_VERSION}"]
    for r in rules:
        if r.kind == "area":
            nums = [*r.center, *r.half_extents, r.yaw]
        else:
            nums = list(r.anchors.ravel())
        lines.append(f"rule {r.rule_id} {r.category} {r.kind} "
                     + " ".join(repr(float(x)) for x in nums))
    return "\n".join(lines) + "\n"


# -- splines ----------------------------------------------------------------

def _centripetal_tangents(pts):
    """Per-anchor tangents for a centripetal Catmull-Rom chain.

    Endpoints use phantom duplication; a duplicated phantom collapses its
    knot interval, whose limit is the plain chord tangent.
    """
    n = len(pts)
    ext = np.vstack([pts[0], pts, pts[-1]])
    dt = np.sqrt(np.linalg.norm(np.diff(ext, axis=0), axis=1))  # alpha = 0.5
    tangents = np.empty_like(pts)
    for i in range(n):
        p0, p1, p2 = ext[i], ext[i + 1], ext[i + 2]
        t01, t12 = dt[i], dt[i + 1]
        if t01 == 0.0 and t12 == 0.0:
            tangents[i] = 0.0
        elif t01 == 0.0:
            tangents[i] = (p2 - p1) / t12
        elif t12 == 0.0:
            tangents[i] = (p1 - p0) / t01
        else:
            tangents[i] = ((p1 - p0) / t01 - (p2 - p0) / (t01 + t12)
                           + (p2 - p1) / t12)
    return tangents


class TrajectoryGeometry:
    """Arc-length parametrized curve through the anchors.

    Spans are cubic Hermite segments with centripetal Catmull-Rom tangents;
    a 64-chord-per-span table maps normalized arc length to (span, u) within
    1% of true arc length.
    """

    def __init__(self, anchors):
        self.anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 3)
        if len(self.anchors) < 2:
            raise SimError(BAD_ARGS, "trajectory needs at least 2 anchors")
        if np.allclose(self.anchors, self.anchors[0]):
            raise SimError(BAD_ARGS, "degenerate trajectory: anchors coincide")
        n_span = len(self.anchors) - 1
        tangents = _centripetal_tangents(self.anchors)
        knots = np.sqrt(np.linalg.norm(np.diff(self.anchors, axis=0), axis=1))
        self._p0 = self.anchors[:-1]
        self._p1 = self.anchors[1:]
        # Hermite tangents are in knot parametrization; scale per span.
        self._m0 = tangents[:-1] * knots[:, None]
        self._m1 = tangents[1:] * knots[:, None]
        self._n_span = n_span

        u = np.linspace(0.0, 1.0, _CHORDS_PER_SPAN + 1)
        pts = self._eval_spans(u)                       # (n_span, 65, 3)
        seg = np.linalg.norm(np.diff(pts, axis=1), axis=2)
        cum = np.concatenate([[0.0], np.cumsum(seg.ravel())])
        self._table = cum                               # len n_span*64 + 1
        self.length = float(cum[-1])

    def _hermite(self, span, u):
        u = np.asarray(u, dtype=np.float64)
        u2, u3 = u * u, u * u * u
        h00 = 2 * u3 - 3 * u2 + 1
        h10 = u3 - 2 * u2 + u
        h01 = -2 * u3 + 3 * u2
        h11 = u3 - u2
        shape = u.shape + (1,)
        return (h00.reshape(shape) * self._p0[span]
                + h10.reshape(shape) * self._m0[span]
                + h01.reshape(shape) * self._p1[span]
                + h11.reshape(shape) * self._m1[span])

    def _hermite_deriv(self, span, u):
        u = np.asarray(u, dtype=np.float64)
        u2 = u * u
        d00 = 6 * u2 - 6 * u
        d10 = 3 * u2 - 4 * u + 1
        d01 = -6 * u2 + 6 * u
        d11 = 3 * u2 - 2 * u
        shape = u.shape + (1,)
        return (d00.reshape(shape) * self._p0[span]
                + d10.reshape(shape) * self._m0[span]
                + d01.reshape(shape) * self._p1[span]
                + d11.reshape(shape) * self._m1[span])

    def _eval_spans(self, u):
        out = np.empty((self._n_span, len(u), 3))
        for s in range(self._n_span):
            out[s] = self._hermite(s, u)
        return out

    def _locate(self, s):
        target = float(np.clip(s, 0.0, 1.0)) * self.length
        k = int(np.searchsorted(self._table, target, side="right")) - 1
        k = min(k, len(self._table) - 2)
        seg_len = self._table[k + 1] - self._table[k]
        frac = 0.0 if seg_len == 0.0 else (target - self._table[k]) / seg_len
        span, chord = divmod(k, _CHORDS_PER_SPAN)
        u = (chord + frac) / _CHORDS_PER_SPAN
        return span, u

    def point(self, s):
        """(position, unit tangent) at normalized arc length s in [0, 1]."""
        span, u = self._locate(s)
        pos = self._hermite(span, np.array([u]))[0]
        d = self._hermite_deriv(span, np.array([u]))[0]
        norm = np.linalg.norm(d)
        if norm == 0.0:
            d = self._p1[span] - self._p0[span]
            norm = np.linalg.norm(d)
        return pos, d / norm


def spline_point(anchors, s):
    """One-shot (position, tangent) evaluation; see TrajectoryGeometry."""
    return TrajectoryGeometry(anchors).point(s)


# -- samplers ----------------------------------------------------------------

def _area_basis(rule):
    yaw = math.radians(rule.yaw)
    ux = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    uy = np.array([-math.sin(yaw), math.cos(yaw), 0.0])
    return ux, uy


def point_in_area(rule, point, slack=1e-9) -> bool:
    ux, uy = _area_basis(rule)
    rel = vec3(point) - rule.center
    return (abs(float(rel @ ux)) <= rule.half_extents[0] + slack
            and abs(float(rel @ uy)) <= rule.half_extents[1] + slack)


def sample_on_trajectory(rule, count, min_spacing, seed):
    """Poses along a trajectory rule: sorted arc positions, yaw along tangent.

    Consecutive samples sit at least min_spacing apart in arc length;
    rejection-drawn, deterministic in the seed.
    """
    if not rule.is_trajectory:
        raise SimError(BAD_ARGS, "rule is not a trajectory")
    count = int(count)
    if count == 0:
        return []
    geom = TrajectoryGeometry(rule.anchors)
    if count * min_spacing > geom.length:
        raise SimError(INFEASIBLE,
                       f"{count} samples at {min_spacing} cm exceed "
                       f"{geom.length:.1f} cm of trajectory")
    rng = stream_rng(seed, "trajectory", rule.rule_id)
    for _ in range(_REJECTION_FACTOR):
        params = np.sort(rng.uniform(0.0, 1.0, count))
        if count == 1 or np.all(np.diff(params) * geom.length >= min_spacing):
            break
    else:
        raise SimError(INFEASIBLE, "spacing rejection budget exhausted")
    out = []
    for s in params:
        pos, tangent = geom.point(float(s))
        yaw = math.degrees(math.atan2(tangent[1], tangent[0]))
        out.append((pos, yaw))
    return out


def sample_in_area(rule, count, min_spacing, seed):
    """(position, uniform yaw) samples inside an area rule.

    Uniform over the rect respecting its yaw; Poisson-disk-style rejection
    enforces pairwise XY spacing; Z is the area's Z.
    """
    if rule.kind != "area":
        raise SimError(BAD_ARGS, "rule is not an area")
    count = int(count)
    if count == 0:
        return []
    rng = stream_rng(seed, "area", rule.rule_id)
    ux, uy = _area_basis(rule)
    accepted = []
    accepted_xy = np.empty((count, 2))
    yaws = []
    budget = _REJECTION_FACTOR * count
    while len(accepted) < count and budget > 0:
        budget -= 1
        u = rng.uniform(-rule.half_extents[0], rule.half_extents[0])
        v = rng.uniform(-rule.half_extents[1], rule.half_extents[1])
        pos = rule.center + u * ux + v * uy
        if min_spacing > 0 and accepted:
            d2 = np.sum((accepted_xy[:len(accepted)] - pos[:2]) ** 2, axis=1)
            if (d2 < min_spacing * min_spacing).any():
                continue
        accepted_xy[len(accepted)] = pos[:2]
        accepted.append(pos)
        yaws.append(float(rng.uniform(-180.0, 180.0)))
    if len(accepted) < count:
        raise SimError(INFEASIBLE, "area rejection budget exhausted")
    return list(zip(accepted, yaws))


# -- generation ---------------------------------------------------------------

@dataclass
class CategorySpec:
    category: str
    min_count: int = 0
    max_count: int = 1_000_000


@dataclass
class GenerationConfig:
    seed: int = 0
    mode: str = "standard"
    categories: list = field(default_factory=list)   # CategorySpec list
    density: float = 0.05          # objects per m^2 of area rules
    min_spacing: float = 0.0       # cm between same-rule samples
    scale: float = 1.0
    camera: dict | None = None     # {cam_id, location, rotation} override
    camera_variant: str = "auto"   # uncommon_viewpoint: overhead | ground | auto
    occlusion_target: str | None = None
    occlusion_threshold: float = 0.4
    max_attempts: int = 24
    eval_width: int = 320
    eval_height: int = 240
    cluster_sigma_factor: float = 1.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise SimError(BAD_ARGS, f"unknown mode {self.mode!r}")
        if self.density <= 0:
            raise SimError(BAD_ARGS, "density must be positive")
        self.categories = [c if isinstance(c, CategorySpec)
                           else CategorySpec(**c) for c in self.categories]


GENERATION_CONFIG_VERSION = 1


def load_generation_config(path) -> GenerationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != GENERATION_CONFIG_VERSION:
        raise SimError(BAD_ARGS, "unsupported generation config version")
    doc = {k: v for k, v in doc.items() if k != "format_version"}
    return GenerationConfig(**doc)


@dataclass
class SpawnRecord:
    obj_id: str
    asset_path: str
    category: str
    status: str
    requested_location: list
    final_location: list | None = None


@dataclass
class GenerationReport:
    mode: str
    seed: int
    spawns: list = field(default_factory=list)
    camera: dict | None = None
    achieved_occlusion: float | None = None
    budget_exhausted: bool = False

    def spawned_ids(self):
        return [s.obj_id for s in self.spawns if s.status == "ok"]


def _pick_asset(catalog, category, rng):
    paths = catalog.paths_in_category(category)
    if not paths:
        raise SimError(BAD_ARGS, f"no catalog assets in category {category!r}")
    return paths[int(rng.integers(len(paths)))]


def _spawn(world, report, obj_id, asset_path, category, location, yaw, scale):
    rec = SpawnRecord(obj_id=obj_id, asset_path=asset_path, category=category,
                      status="ok", requested_location=[float(c) for c in location])
    try:
        world.spawn_object(obj_id, asset_path, location=location,
                           rotation=(0.0, yaw, 0.0), scale=scale,
                           collision_handling="adjust_if_possible")
        rec.final_location = [float(c) for c in world.get_object_location(obj_id)]
    except SimError as exc:
        rec.status = exc.code
    report.spawns.append(rec)
    return rec


def _category_targets(spec: CategorySpec, budget: float) -> int:
    return int(np.clip(round(budget), spec.min_count, spec.max_count))


def _populate(world, rules, cfg, report, density):
    catalog = world.catalog
    areas = [r for r in rules if r.kind == "area"]
    trajectories = [r for r in rules if r.is_trajectory]
    total_area = sum(r.area_m2() for r in areas)
    total_length_m = sum(TrajectoryGeometry(r.anchors).length / 100.0
                         for r in trajectories)
    n_cat = max(1, len(cfg.categories))

    for spec in cfg.categories:
        rng = stream_rng(cfg.seed, "assets", spec.category)
        n_area = _category_targets(spec, density * total_area / n_cat) \
            if areas else 0
        n_traj = _category_targets(spec, density * total_length_m / n_cat) \
            if trajectories else 0

        k = 0
        if areas and n_area:
            per_rule = [n_area // len(areas)] * len(areas)
            for i in range(n_area % len(areas)):
                per_rule[i] += 1
            for rule, n in zip(areas, per_rule):
                samples = sample_in_area(rule, n, cfg.min_spacing,
                                         seed=hash_stream(cfg.seed, spec.category))
                for pos, yaw in samples:
                    _spawn(world, report, f"gen_{spec.category}_{k}",
                           _pick_asset(catalog, spec.category, rng),
                           spec.category, pos, yaw, cfg.scale)
                    k += 1
        if trajectories and n_traj:
            per_rule = [n_traj // len(trajectories)] * len(trajectories)
            for i in range(n_traj % len(trajectories)):
                per_rule[i] += 1
            for rule, n in zip(trajectories, per_rule):
                samples = sample_on_trajectory(
                    rule, n, cfg.min_spacing,
                    seed=hash_stream(cfg.seed, spec.category))
                for pos, yaw in samples:
                    _spawn(world, report, f"gen_{spec.category}_{k}",
                           _pick_asset(catalog, spec.category, rng),
                           spec.category, pos, yaw, cfg.scale)
                    k += 1


def _clustered(world, rules, cfg, report):
    catalog = world.catalog
    areas = [r for r in rules if r.kind == "area"]
    if not areas:
        raise SimError(BAD_ARGS, "clustered mode needs at least one area rule")
    total_area = sum(r.area_m2() for r in areas)
    n_cat = max(1, len(cfg.categories))
    for ci, spec in enumerate(cfg.categories):
        rng = stream_rng(cfg.seed, "cluster", spec.category)
        n = max(2, _category_targets(spec, cfg.density * total_area / n_cat))
        rule = areas[ci % len(areas)]
        (center, _yaw), = sample_in_area(rule, 1, 0.0,
                                         seed=hash_stream(cfg.seed, spec.category))
        asset = _pick_asset(catalog, spec.category, rng)
        extent = catalog.get(asset).extents()
        sigma = cfg.cluster_sigma_factor * cfg.scale * max(extent[0], extent[1])
        placed = []
        k = 0
        budget = _REJECTION_FACTOR * n
        while k < n and budget > 0:
            budget -= 1
            offset = rng.normal(0.0, sigma, 2)
            pos = center + np.array([offset[0], offset[1], 0.0])
            if not point_in_area(rule, pos):
                continue
            if any(np.linalg.norm((pos - q)[:2]) < cfg.min_spacing
                   for q in placed):
                continue
            yaw = float(rng.uniform(-180.0, 180.0))
            _spawn(world, report, f"gen_{spec.category}_{k}", asset,
                   spec.category, pos, yaw, cfg.scale)
            placed.append(pos)
            k += 1
        if k < n:
            raise SimError(INFEASIBLE,
                           f"cluster for {spec.category} exhausted its budget")


def hash_stream(seed, *labels) -> int:
    """Derived 63-bit seed for handing to nested samplers."""
    text = "|".join([str(int(seed))] + [str(l) for l in labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def _apply_camera(world, cfg, location, target):
    cam_id = 0
    if cfg.camera:
        cam_id = int(cfg.camera.get("cam_id", 0))
        if "location" in cfg.camera:
            location = vec3(cfg.camera["location"])
        if "rotation" in cfg.camera:
            world.set_camera(cam_id, location=location,
                             rotation=cfg.camera["rotation"])
            return cam_id, location
    world.set_camera(cam_id, location=location,
                     rotation=look_at_rotator(location, target).as_tuple())
    return cam_id, location


def _scene_anchor(world, rules):
    """A reference point for camera placement: area centroid or origin."""
    areas = [r for r in rules if r.kind == "area"]
    if areas:
        return np.mean([r.center for r in areas], axis=0)
    ids = world.list_objects()
    if ids:
        return np.mean([world.get_object_location(i) for i in ids], axis=0)
    return np.zeros(3)


def _occluded_view(world, rules, cfg, report):
    from .groundtruth import occlusion_ratio
    from .renderer import render, render_instance_alone

    catalog = world.catalog
    rng = stream_rng(cfg.seed, "occluders")
    target_id = cfg.occlusion_target
    if target_id is None or target_id not in world.list_objects():
        if not cfg.categories:
            raise SimError(BAD_ARGS, "occluded_view needs categories or a target")
        spec = cfg.categories[0]
        anchor = _scene_anchor(world, rules)
        target_id = "gen_target"
        _spawn(world, report, target_id,
               _pick_asset(catalog, spec.category, rng), spec.category,
               anchor, 0.0, cfg.scale)
        if report.spawns[-1].status != "ok":
            raise SimError(INFEASIBLE, "could not place occlusion target")

    target_obj = world.get_object(target_id)
    record = catalog.get(target_obj.asset_path)
    extent = record.extents() * target_obj.pose.scale
    target_center = target_obj.pose.location + np.array([0, 0, extent[2] / 2.0])

    cam_loc = target_center + np.array([4.0, 1.5, 1.0]) * max(extent) \
        if cfg.camera is None or "location" not in cfg.camera else None
    cam_id, cam_loc = _apply_camera(
        world, cfg,
        cam_loc if cam_loc is not None else vec3(cfg.camera["location"]),
        target_center)
    world.set_camera(cam_id, width=cfg.eval_width, height=cfg.eval_height)

    occ_spec = cfg.categories[0] if cfg.categories else None

    def measure():
        snap = world.snapshot()
        cam = snap.camera(cam_id)
        full = render(snap, cam, channels=("depth", "instance"))
        alone = render_instance_alone(snap, cam, target_id, expand=1,
                                      with_parts=False)
        return occlusion_ratio(full, alone)

    achieved = measure()
    attempts = 0
    while achieved < cfg.occlusion_threshold and attempts < cfg.max_attempts:
        attempts += 1
        u = float(rng.uniform(0.4, 0.8))
        point = cam_loc + u * (target_center - cam_loc)
        category = occ_spec.category if occ_spec else record.category
        asset = _pick_asset(catalog, category, rng)
        occ_extent = catalog.get(asset).extents() * cfg.scale
        base = point - np.array([0.0, 0.0, occ_extent[2] / 2.0])
        rec = _spawn(world, report, f"gen_occluder_{attempts}", asset, category,
                     base, float(rng.uniform(-180.0, 180.0)), cfg.scale)
        if rec.status == "ok":
            achieved = measure()
    report.achieved_occlusion = achieved
    report.budget_exhausted = achieved < cfg.occlusion_threshold
    report.camera = {"cam_id": cam_id, "location": [float(c) for c in cam_loc]}


def _uncommon_viewpoint(world, rules, cfg, report):
    _populate(world, rules, cfg, report, cfg.density)
    rng = stream_rng(cfg.seed, "viewpoint")
    anchor = _scene_anchor(world, rules)
    variant = cfg.camera_variant
    if variant == "auto":
        variant = "overhead" if rng.uniform() < 0.5 else "ground"
    areas = [r for r in rules if r.kind == "area"]
    span = max((2.0 * max(r.half_extents) for r in areas), default=500.0)
    if variant == "overhead":
        elev = float(rng.uniform(60.0, 89.0))
        radius = float(rng.uniform(0.6, 1.2)) * span
        az = math.radians(float(rng.uniform(0.0, 360.0)))
        e = math.radians(elev)
        loc = anchor + radius * np.array([math.cos(e) * math.cos(az),
                                          math.cos(e) * math.sin(az),
                                          math.sin(e)])
    elif variant == "ground":
        az = math.radians(float(rng.uniform(0.0, 360.0)))
        radius = float(rng.uniform(0.4, 0.9)) * span
        height = float(rng.uniform(5.0, 30.0))
        loc = anchor + np.array([radius * math.cos(az), radius * math.sin(az),
                                 height])
    else:
        raise SimError(BAD_ARGS, f"unknown camera variant {variant!r}")
    cam_id, loc = _apply_camera(world, cfg, loc, anchor)
    report.camera = {"cam_id": cam_id, "variant": variant,
                     "location": [float(c) for c in loc]}


def generate_scene(world, rules, config: GenerationConfig,
                   catalog=None) -> GenerationReport:
    """Populate the world per the config's mode; deterministic in the seed.

    All spawns go through adjust_if_possible, so whatever the report lists
    as "ok" is collision-free in the final registry.
    """
    del catalog  # assets always come from the world's own catalog
    if not rules and config.mode != "occluded_view":
        raise SimError(BAD_ARGS, "generation needs at least one rule")
    report = GenerationReport(mode=config.mode, seed=config.seed)
    if config.mode == "standard":
        _populate(world, rules, config, report, config.density)
    elif config.mode == "high_density":
        _populate(world, rules, config, report, 4.0 * config.density)
    elif config.mode == "clustered":
        _clustered(world, rules, config, report)
    elif config.mode == "occluded_view":
        _occluded_view(world, rules, config, report)
    elif config.mode == "uncommon_viewpoint":
        _uncommon_viewpoint(world, rules, config, report)
    return report


def report_to_dict(report: GenerationReport) -> dict:
    return {
        "mode": report.mode,
        "seed": report.seed,
        "camera": report.camera,
        "achieved_occlusion": report.achieved_occlusion,
        "budget_exhausted": report.budget_exhausted,
        "spawns": [
            {
                "obj_id": s.obj_id,
                "asset_path": s.asset_path,
                "category": s.category,
                "status": s.status,
                "requested_location": s.requested_location,
                "final_location": s.final_location,
            }
            for s in report.spawns
        ],
    }
