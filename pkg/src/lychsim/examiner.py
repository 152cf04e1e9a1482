"""RL adversarial examiner: a Gaussian search over camera viewpoints.

A cross-entropy method drives a per-dimension Gaussian over (azimuth,
elevation, radius) on a sphere around the target object, scoring each
viewpoint by reward = -IoU(segmenter prediction, ground-truth mask) and
refitting the distribution to the elite fraction each iteration.  The
examiner hunts *failures*: it prefers the least negative rewards (lowest
IoU), so the elites are the most adversarial samples.  Views where the
target is invisible score as vacuous and rank below every genuine
mis-segmentation, so disappearance earns no credit.

Fully deterministic given (seed, deterministic segmenter).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import SimError, BAD_ARGS, OBJECT_NOT_FOUND
from .geometry import Pose, look_at_rotator, vec3
from .renderer import render
from .world import CameraState

STDDEV_FLOOR = 1e-3

# flawed oracle: grazing-view weakness band and its corruption parameters
WEAK_ELEVATION_DEG = 15.0
WEAK_SHIFT_FRACTION = 0.35


@dataclass(frozen=True)
class ViewpointParams:
    azimuth: float        # degrees in [0, 360)
    elevation: float      # degrees
    radius: float         # cm

    def as_tuple(self):
        return (self.azimuth, self.elevation, self.radius)


@dataclass(frozen=True)
class ViewpointBounds:
    elevation: tuple = (-89.0, 89.0)
    radius: tuple = (100.0, 1000.0)

    def __post_init__(self):
        if not (-89.0 <= self.elevation[0] < self.elevation[1] <= 89.0):
            raise SimError(BAD_ARGS, "bad elevation bounds")
        if not (0.0 < self.radius[0] < self.radius[1]):
            raise SimError(BAD_ARGS, "bad radius bounds")


def _fold(x, lo, hi):
    """Reflect x into [lo, hi] (triangle-wave fold, no boundary pile-up)."""
    w = hi - lo
    y = (x - lo) % (2.0 * w)
    return lo + (y if y <= w else 2.0 * w - y)


def _wrap_angle(deg):
    return (deg + 180.0) % 360.0 - 180.0


@dataclass
class GaussianPolicy:
    mean: ViewpointParams
    stddev: np.ndarray                      # (3,): azimuth, elevation, radius
    bounds: ViewpointBounds
    iteration: int = 0

    def __post_init__(self):
        self.stddev = np.maximum(np.asarray(self.stddev, dtype=np.float64),
                                 STDDEV_FLOOR)

    def sample(self, rng: np.random.Generator) -> ViewpointParams:
        az = (self.mean.azimuth + rng.normal(0.0, self.stddev[0])) % 360.0
        el = _fold(self.mean.elevation + rng.normal(0.0, self.stddev[1]),
                   *self.bounds.elevation)
        ra = _fold(self.mean.radius + rng.normal(0.0, self.stddev[2]),
                   *self.bounds.radius)
        return ViewpointParams(az, el, ra)


def sphere_pose(center, v: ViewpointParams) -> Pose:
    """Camera pose on the sphere around center, looking at it, roll 0."""
    a = math.radians(v.azimuth)
    e = math.radians(v.elevation)
    offset = v.radius * np.array([math.cos(e) * math.cos(a),
                                  math.cos(e) * math.sin(a),
                                  math.sin(e)])
    location = vec3(center) + offset
    return Pose(location=location, rotation=look_at_rotator(location, center))


def reward(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    """-IoU of two binary masks; both-empty is vacuous and scores 0."""
    if pred_mask.shape != gt_mask.shape:
        raise SimError(BAD_ARGS, "mask resolution mismatch")
    union = int(np.logical_or(pred_mask, gt_mask).sum())
    if union == 0:
        return 0.0
    inter = int(np.logical_and(pred_mask, gt_mask).sum())
    return -inter / union


def policy_step(policy: GaussianPolicy, population, elite_frac=0.25,
                alpha=0.7) -> GaussianPolicy:
    """Refit mean/stddev toward the elite (most adversarial) samples.

    population: list of (ViewpointParams, fitness); higher fitness = more
    adversarial (fitness is reward except that vacuous views carry -1).
    Azimuth statistics are circular; the smoothing blend is
    new = alpha * elite + (1 - alpha) * old, with the stddev floored.
    """
    if len(population) < 4:
        raise SimError(BAD_ARGS, "population must be >= 4")
    n_elite = max(1, math.ceil(elite_frac * len(population)))
    ranked = sorted(range(len(population)),
                    key=lambda i: (-population[i][1], i))
    elites = [population[i][0] for i in ranked[:n_elite]]

    az = np.array([e.azimuth for e in elites])
    el = np.array([e.elevation for e in elites])
    ra = np.array([e.radius for e in elites])

    ang = np.radians(az)
    az_mean = math.degrees(math.atan2(np.sin(ang).mean(),
                                      np.cos(ang).mean())) % 360.0
    az_dev = _wrap_angle(az - az_mean)
    elite_std = np.array([az_dev.std(), el.std(), ra.std()])

    new_az = (policy.mean.azimuth
              + alpha * _wrap_angle(az_mean - policy.mean.azimuth)) % 360.0
    new_el = alpha * el.mean() + (1.0 - alpha) * policy.mean.elevation
    new_ra = alpha * ra.mean() + (1.0 - alpha) * policy.mean.radius
    new_std = np.maximum(alpha * elite_std + (1.0 - alpha) * policy.stddev,
                         STDDEV_FLOOR)
    return GaussianPolicy(
        mean=ViewpointParams(new_az, float(new_el), float(new_ra)),
        stddev=new_std, bounds=policy.bounds, iteration=policy.iteration + 1)


# -- built-in segmenters (test doubles for an external model) -----------------

def perfect_oracle_segmenter(lit, gt_mask, viewpoint):
    """Returns the ground truth unchanged; IoU is 1 wherever gt is nonempty."""
    del lit, viewpoint
    return gt_mask.copy()


def flawed_oracle_segmenter(lit, gt_mask, viewpoint):
    """Accurate except at grazing views, where its mask slides off target.

    Below WEAK_ELEVATION_DEG the ground-truth mask is translated by 35% of
    its bounding-box width and height (both axes; a single-axis 35% shift
    of a solid silhouette only drops IoU to ~0.48, which is not a usable
    failure band).  Elsewhere the mask is eroded by one pixel.
    """
    del lit
    if not gt_mask.any():
        return np.zeros_like(gt_mask)
    if viewpoint.elevation < WEAK_ELEVATION_DEG:
        ys, xs = np.nonzero(gt_mask)
        dx = max(1, int(round(WEAK_SHIFT_FRACTION * (xs.max() - xs.min() + 1))))
        dy = max(1, int(round(WEAK_SHIFT_FRACTION * (ys.max() - ys.min() + 1))))
        out = np.zeros_like(gt_mask)
        h, w = gt_mask.shape
        out[min(dy, h):, min(dx, w):] = gt_mask[:h - min(dy, h), :w - min(dx, w)]
        return out
    return ndimage.binary_erosion(gt_mask, structure=np.ones((3, 3), bool))


BUILTIN_SEGMENTERS = {
    "perfect": perfect_oracle_segmenter,
    "flawed": flawed_oracle_segmenter,
}


# -- examiner loop -------------------------------------------------------------

@dataclass
class ExaminerConfig:
    population: int = 16
    elite_frac: float = 0.25
    alpha: float = 0.7
    iterations: int = 50
    seed: int = 0
    bounds: ViewpointBounds = field(default_factory=ViewpointBounds)
    init_mean: ViewpointParams | None = None    # default: mid-bounds, azimuth 0
    init_std: tuple | None = None               # default from bounds spans
    width: int = 320
    height: int = 240
    fov: float = 90.0
    gallery_size: int = 5

    def __post_init__(self):
        if self.population < 4:
            raise SimError(BAD_ARGS, "population must be >= 4")
        if not (0.0 < self.elite_frac <= 1.0):
            raise SimError(BAD_ARGS, "elite_frac must be in (0, 1]")
        if not (0.0 < self.alpha <= 1.0):
            raise SimError(BAD_ARGS, "alpha must be in (0, 1]")


@dataclass
class StepSample:
    iteration: int
    viewpoint: ViewpointParams
    reward: float
    iou: float
    vacuous: bool


@dataclass
class ExaminerReport:
    target: str
    best_viewpoint: ViewpointParams | None
    best_reward: float            # reward of the most adversarial sample
    best_iou: float
    trace: list                   # StepSample per render, in order
    total_renders: int
    final_policy: GaussianPolicy
    gallery: list                 # K worst-IoU (viewpoint, iou) pairs


def _default_policy(cfg: ExaminerConfig) -> GaussianPolicy:
    b = cfg.bounds
    mean = cfg.init_mean or ViewpointParams(
        azimuth=0.0,
        elevation=0.5 * (b.elevation[0] + b.elevation[1]),
        radius=0.5 * (b.radius[0] + b.radius[1]))
    std = cfg.init_std or (120.0,
                           0.3 * (b.elevation[1] - b.elevation[0]),
                           0.25 * (b.radius[1] - b.radius[0]))
    return GaussianPolicy(mean=mean, stddev=np.asarray(std, dtype=np.float64),
                          bounds=b)


def run_examiner(world, target_obj_id: str, segmenter, config=None,
                 threads=None) -> ExaminerReport:
    """Run the CEM viewpoint search against one target object.

    segmenter: callable(lit_u8, gt_mask_bool, viewpoint) -> bool mask, or
    the name of a built-in oracle.  Renders population x iterations frames.
    """
    cfg = config or ExaminerConfig()
    if isinstance(segmenter, str):
        if segmenter not in BUILTIN_SEGMENTERS:
            raise SimError(BAD_ARGS, f"unknown segmenter {segmenter!r}")
        segmenter = BUILTIN_SEGMENTERS[segmenter]

    snapshot = world.snapshot()
    if target_obj_id not in snapshot.object_ids:
        raise SimError(OBJECT_NOT_FOUND, target_obj_id)
    target_value = snapshot.object_ids.index(target_obj_id) + 1
    center = snapshot.world_aabb(target_obj_id).center

    rng = np.random.default_rng(cfg.seed)
    policy = _default_policy(cfg)
    trace = []
    for it in range(cfg.iterations):
        population = []
        for _ in range(cfg.population):
            v = policy.sample(rng)
            cam = CameraState(cam_id=-1, pose=sphere_pose(center, v),
                              horizontal_fov=cfg.fov, width=cfg.width,
                              height=cfg.height)
            fs = render(snapshot, cam, channels=("lit", "instance"),
                        threads=threads)
            gt_mask = fs.instance == target_value
            pred = np.asarray(segmenter(fs.lit, gt_mask, v), dtype=bool)
            r = reward(pred, gt_mask)
            vacuous = not gt_mask.any()
            fitness = -1.0 if vacuous else r
            population.append((v, fitness))
            trace.append(StepSample(iteration=it, viewpoint=v, reward=r,
                                    iou=-r, vacuous=vacuous))
        policy = policy_step(policy, population, cfg.elite_frac, cfg.alpha)

    genuine = [s for s in trace if not s.vacuous]
    ranked = sorted(genuine, key=lambda s: s.iou)
    best = ranked[0] if ranked else None
    return ExaminerReport(
        target=target_obj_id,
        best_viewpoint=best.viewpoint if best else None,
        best_reward=best.reward if best else 0.0,
        best_iou=best.iou if best else 1.0,
        trace=trace,
        total_renders=cfg.population * cfg.iterations,
        final_policy=policy,
        gallery=[(s.viewpoint, s.iou) for s in ranked[:cfg.gallery_size]],
    )


def report_to_dict(report: ExaminerReport) -> dict:
    def vp(v):
        return None if v is None else {"azimuth": v.azimuth,
                                       "elevation": v.elevation,
                                       "radius": v.radius}
    return {
        "target": report.target,
        "best_viewpoint": vp(report.best_viewpoint),
        "best_reward": report.best_reward,
        "best_iou": report.best_iou,
        "total_renders": report.total_renders,
        "final_policy": {
            "mean": vp(report.final_policy.mean),
            "stddev": [float(s) for s in report.final_policy.stddev],
            "iteration": report.final_policy.iteration,
        },
        "gallery": [{"viewpoint": vp(v), "iou": iou}
                    for v, iou in report.gallery],
        "trace": [
            {"iteration": s.iteration, "viewpoint": vp(s.viewpoint),
             "reward": s.reward, "iou": s.iou, "vacuous": s.vacuous}
            for s in report.trace
        ],
    }
