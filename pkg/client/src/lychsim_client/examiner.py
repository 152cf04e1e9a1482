"""Client-side adversarial examiner driver for external segmenters.

Reproduces the server's CEM viewpoint-search loop through the wire
protocol only: set camera, fetch lit + segmentation, score the segmenter
locally, update a local Gaussian policy.  The update math mirrors the
server exactly, so for the same seed and the built-in oracles the report
matches the server-side run bit for bit.
"""

import math
from dataclasses import dataclass

import numpy as np

STDDEV_FLOOR = 1e-3
WEAK_ELEVATION_DEG = 15.0
WEAK_SHIFT_FRACTION = 0.35

EXAMINER_CAM_ID = 990  # dedicated camera so user cameras stay untouched


@dataclass(frozen=True)
class Viewpoint:
    azimuth: float
    elevation: float
    radius: float


@dataclass
class ClientExaminerConfig:
    population: int = 16
    elite_frac: float = 0.25
    alpha: float = 0.7
    iterations: int = 50
    seed: int = 0
    elevation_bounds: tuple = (-89.0, 89.0)
    radius_bounds: tuple = (100.0, 1000.0)
    width: int = 320
    height: int = 240
    fov: float = 90.0
    gallery_size: int = 5


def _fold(x, lo, hi):
    w = hi - lo
    y = (x - lo) % (2.0 * w)
    return lo + (y if y <= w else 2.0 * w - y)


def _wrap(deg):
    return (deg + 180.0) % 360.0 - 180.0


def _look_at(eye, target):
    f = np.asarray(target, dtype=np.float64) - np.asarray(eye, dtype=np.float64)
    f = f / np.linalg.norm(f)
    pitch = np.degrees(np.arcsin(np.clip(f[2], -1.0, 1.0)))
    yaw = np.degrees(np.arctan2(f[1], f[0]))
    return [float(pitch), float(yaw), 0.0]


def _sphere_location(center, v):
    a = math.radians(v.azimuth)
    e = math.radians(v.elevation)
    offset = v.radius * np.array([math.cos(e) * math.cos(a),
                                  math.cos(e) * math.sin(a),
                                  math.sin(e)])
    return np.asarray(center, dtype=np.float64) + offset


def iou_reward(pred_mask, gt_mask):
    """-IoU of two binary masks; 0 when both are empty."""
    union = int(np.logical_or(pred_mask, gt_mask).sum())
    if union == 0:
        return 0.0
    return -int(np.logical_and(pred_mask, gt_mask).sum()) / union


def _erode_1px(mask):
    """3x3 binary erosion with zero border (matches the server oracle)."""
    p = np.pad(mask, 1, constant_values=False)
    out = mask.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            out &= p[1 + dy:1 + dy + mask.shape[0],
                     1 + dx:1 + dx + mask.shape[1]]
    return out


def perfect_oracle(lit, gt_mask, viewpoint):
    del lit, viewpoint
    return gt_mask.copy()


def flawed_oracle(lit, gt_mask, viewpoint):
    """Slides its mask off target at grazing elevations, else near-perfect."""
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
    return _erode_1px(gt_mask)


BUILTIN_SEGMENTERS = {"perfect": perfect_oracle, "flawed": flawed_oracle}


class ExaminerAborted(RuntimeError):
    """Transport/server failure mid-loop; carries the partial trace."""

    def __init__(self, cause, trace):
        self.cause = cause
        self.trace = trace
        super().__init__(f"examiner aborted after {len(trace)} renders: {cause}")


@dataclass
class _Policy:
    mean: Viewpoint
    stddev: np.ndarray
    elevation_bounds: tuple
    radius_bounds: tuple
    iteration: int = 0

    def sample(self, rng):
        az = (self.mean.azimuth + rng.normal(0.0, self.stddev[0])) % 360.0
        el = _fold(self.mean.elevation + rng.normal(0.0, self.stddev[1]),
                   *self.elevation_bounds)
        ra = _fold(self.mean.radius + rng.normal(0.0, self.stddev[2]),
                   *self.radius_bounds)
        return Viewpoint(az, el, ra)


def _policy_step(policy, population, elite_frac, alpha):
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
    az_dev = _wrap(az - az_mean)
    elite_std = np.array([az_dev.std(), el.std(), ra.std()])
    new_az = (policy.mean.azimuth
              + alpha * _wrap(az_mean - policy.mean.azimuth)) % 360.0
    new_el = alpha * el.mean() + (1.0 - alpha) * policy.mean.elevation
    new_ra = alpha * ra.mean() + (1.0 - alpha) * policy.mean.radius
    new_std = np.maximum(alpha * elite_std + (1.0 - alpha) * policy.stddev,
                         STDDEV_FLOOR)
    return _Policy(mean=Viewpoint(new_az, float(new_el), float(new_ra)),
                   stddev=new_std, elevation_bounds=policy.elevation_bounds,
                   radius_bounds=policy.radius_bounds,
                   iteration=policy.iteration + 1)


def run_external_examiner(client, target, segment_fn, config=None):
    """Drive the examiner loop over the wire; returns the report dict.

    segment_fn: callable(lit_u8_array, gt_mask_bool, viewpoint) -> bool mask,
    or the name of a built-in oracle ("perfect" / "flawed").
    """
    cfg = config or ClientExaminerConfig()
    if isinstance(segment_fn, str):
        segment_fn = BUILTIN_SEGMENTERS[segment_fn]

    lo, hi = client.get_object_aabb(target)
    center = 0.5 * (np.asarray(lo) + np.asarray(hi))
    index = client.list_objects().index(target)

    b_el = tuple(cfg.elevation_bounds)
    b_ra = tuple(cfg.radius_bounds)
    policy = _Policy(
        mean=Viewpoint(0.0, 0.5 * (b_el[0] + b_el[1]),
                       0.5 * (b_ra[0] + b_ra[1])),
        stddev=np.maximum(np.array([120.0, 0.3 * (b_el[1] - b_el[0]),
                                    0.25 * (b_ra[1] - b_ra[0])]),
                          STDDEV_FLOOR),
        elevation_bounds=b_el, radius_bounds=b_ra)

    client.set_camera(EXAMINER_CAM_ID, location=[0.0, 0.0, 0.0],
                      rotation=[0.0, 0.0, 0.0], fov=cfg.fov,
                      width=cfg.width, height=cfg.height)

    rng = np.random.default_rng(cfg.seed)
    trace = []
    try:
        for it in range(cfg.iterations):
            population = []
            for _ in range(cfg.population):
                v = policy.sample(rng)
                loc = _sphere_location(center, v)
                client.set_camera(EXAMINER_CAM_ID,
                                  location=[float(c) for c in loc],
                                  rotation=_look_at(loc, center))
                lit = client.get_cam_lit_array(cam_id=EXAMINER_CAM_ID)
                seg, instances = client.get_cam_seg_with_instances(
                    cam_id=EXAMINER_CAM_ID)
                color = np.array(instances[index]["color"], dtype=np.uint8)
                gt_mask = (seg == color).all(axis=2)
                pred = np.asarray(segment_fn(lit, gt_mask, v), dtype=bool)
                r = iou_reward(pred, gt_mask)
                vacuous = not gt_mask.any()
                population.append((v, -1.0 if vacuous else r))
                trace.append({"iteration": it, "viewpoint": v, "reward": r,
                              "iou": -r, "vacuous": vacuous})
            policy = _policy_step(policy, population, cfg.elite_frac, cfg.alpha)
    except (ConnectionError, RuntimeError, OSError) as exc:
        raise ExaminerAborted(exc, trace) from exc

    genuine = [s for s in trace if not s["vacuous"]]
    ranked = sorted(genuine, key=lambda s: s["iou"])
    best = ranked[0] if ranked else None

    def vp(v):
        return None if v is None else {"azimuth": v.azimuth,
                                       "elevation": v.elevation,
                                       "radius": v.radius}

    return {
        "target": target,
        "best_viewpoint": vp(best["viewpoint"]) if best else None,
        "best_reward": best["reward"] if best else 0.0,
        "best_iou": best["iou"] if best else 1.0,
        "total_renders": cfg.population * cfg.iterations,
        "final_policy": {
            "mean": vp(policy.mean),
            "stddev": [float(s) for s in policy.stddev],
            "iteration": policy.iteration,
        },
        "gallery": [{"viewpoint": vp(s["viewpoint"]), "iou": s["iou"]}
                    for s in ranked[:cfg.gallery_size]],
        "trace": [{"iteration": s["iteration"],
                   "viewpoint": vp(s["viewpoint"]),
                   "reward": s["reward"], "iou": s["iou"],
                   "vacuous": s["vacuous"]} for s in trace],
    }
