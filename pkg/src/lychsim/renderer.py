"""Deterministic CPU raycaster producing the aligned ground-truth buffers.

One primary ray per pixel center through a pinhole camera; every channel of
a FrameSet is derived from the same per-pixel hit, so instance, depth,
normal, point map and lit stay mutually consistent by construction.  Depth
is planar (distance along the camera forward axis), the convention point-map
consistency checks rely on.

Renders are pure functions of (scene snapshot, camera): internally they may
fan out over row blocks and cameras with threads, but each pixel depends
only on itself, so buffers are bit-identical for any thread count.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SimError, BAD_ARGS, OBJECT_NOT_FOUND

ALL_CHANNELS = ("lit", "depth", "instance", "part", "normal", "pointmap")

_MIN_ROWS_PER_TASK = 16
_GRID_CACHE_MAX_PIXELS = 1_100_000


@lru_cache(maxsize=6)
def _local_ray_grid(width, height, tan_h, tan_v, expand):
    """Unit ray directions in the camera-local frame (forward = +X).

    Pose independent, so one grid per (resolution, fov, expand) serves every
    camera pose via a single rotation.
    """
    a, b = _pixel_tangents(width, height, tan_h, tan_v, expand)
    grid = np.empty((height * expand, width * expand, 3))
    grid[:, :, 0] = 1.0
    grid[:, :, 1] = a[None, :]
    grid[:, :, 2] = b[:, None]
    grid /= np.sqrt(1.0 + np.square(a)[None, :] + np.square(b)[:, None])[:, :, None]
    return grid


def _pixel_tangents(width, height, tan_h, tan_v, expand):
    px = np.arange(width * expand, dtype=np.float64)
    py = np.arange(height * expand, dtype=np.float64)
    a = tan_h * (2.0 * (px + 0.5) / width - expand)
    b = tan_v * (expand - 2.0 * (py + 0.5) / height)
    return a, b


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


@dataclass
class FrameSet:
    """Aligned per-camera buffer stack.

    Miss sentinels: depth +inf, instance 0, part 0, normal (0,0,0),
    pointmap NaN.  Instance value v > 0 maps to instance_ids[v - 1].
    """

    width: int
    height: int
    cam_id: int
    camera: object                       # CameraState echo
    instance_ids: tuple
    lit: np.ndarray | None = None        # (H, W, 3) uint8
    depth: np.ndarray | None = None      # (H, W) float32, planar cm
    instance: np.ndarray | None = None   # (H, W) uint32
    part: np.ndarray | None = None       # (H, W) uint16, part_id + 1
    normal: np.ndarray | None = None     # (H, W, 3) float32, world, unit
    pointmap: np.ndarray | None = None   # (H, W, 3) float32, world cm


@dataclass
class InstanceDepthBuffer:
    """Depth of one object rendered alone through a possibly expanded viewport.

    The expanded viewport keeps the focal length and principal point of the
    original camera; the original window is the centered width x height
    sub-rectangle starting at (window_x, window_y).
    """

    obj_id: str
    depth: np.ndarray                    # (E*H, E*W) float32
    expand_factor: int
    window_x: int
    window_y: int
    width: int                           # original window size
    height: int
    part: np.ndarray | None = None       # (E*H, E*W) uint16, part_id + 1

    def window_view(self, buf=None):
        """The central original-window slice of a buffer (default: depth)."""
        buf = self.depth if buf is None else buf
        return buf[self.window_y:self.window_y + self.height,
                   self.window_x:self.window_x + self.width]


class CameraFrame:
    """Pinhole geometry of one camera, optionally with an expanded viewport."""

    def __init__(self, cam, expand: int = 1):
        if float(expand) != int(expand):
            raise SimError(BAD_ARGS, "expand factor must be an integer")
        expand = int(expand)
        if expand < 1:
            raise SimError(BAD_ARGS, "expand factor must be >= 1")
        self.cam = cam
        self.expand = expand
        self.width = int(cam.width)
        self.height = int(cam.height)
        self.vw = self.width * expand
        self.vh = self.height * expand
        self.origin = np.asarray(cam.pose.location, dtype=np.float64)
        m = cam.pose.matrix()
        self.forward = m[:, 0].copy()
        self.right = m[:, 1].copy()
        self.up = m[:, 2].copy()
        self.tan_h = math.tan(math.radians(float(cam.horizontal_fov)) / 2.0)
        self.tan_v = self.tan_h * self.height / self.width

    def ray_dirs(self, rect=None) -> np.ndarray:
        """Unit ray directions through pixel centers, (VH, VW, 3).

        With a rect, only [y0:y1, x0:x1] is filled (the rest stays zero and
        must not be traced).  Directions come from one cached local grid
        rotated by the camera matrix, so repeated poses share the work.
        """
        m = self.cam.pose.matrix()  # columns: forward, right, up
        x0, x1, y0, y1 = rect if rect is not None else (0, self.vw, 0, self.vh)
        if self.vw * self.vh <= _GRID_CACHE_MAX_PIXELS:
            grid = _local_ray_grid(self.width, self.height,
                                   self.tan_h, self.tan_v, self.expand)
            if rect is None:
                return np.ascontiguousarray(grid @ m.T)
            dirs = np.zeros((self.vh, self.vw, 3))
            dirs[y0:y1, x0:x1] = grid[y0:y1, x0:x1] @ m.T
            return dirs
        a, b = _pixel_tangents(self.width, self.height,
                               self.tan_h, self.tan_v, self.expand)
        a, b = a[x0:x1], b[y0:y1]
        local = np.empty((y1 - y0, x1 - x0, 3))
        local[:, :, 0] = 1.0
        local[:, :, 1] = a[None, :]
        local[:, :, 2] = b[:, None]
        local /= np.sqrt(1.0 + np.square(a)[None, :]
                         + np.square(b)[:, None])[:, :, None]
        dirs = np.zeros((self.vh, self.vw, 3))
        dirs[y0:y1, x0:x1] = local @ m.T
        return dirs

    def project(self, points: np.ndarray):
        """Project world points to (px, py, forward-depth) in viewport pixels."""
        rel = np.asarray(points, dtype=np.float64) - self.origin
        z = rel @ self.forward
        x = rel @ self.right
        y = rel @ self.up
        with np.errstate(divide="ignore", invalid="ignore"):
            px = ((x / z) / self.tan_h + self.expand) * self.width / 2.0 - 0.5
            py = (self.expand - (y / z) / self.tan_v) * self.height / 2.0 - 0.5
        return px, py, z

    def screen_rect(self, aabb, pad: int = 2):
        """Conservative pixel rect covering an AABB, or the full viewport.

        Valid only when every corner is strictly in front of the camera;
        otherwise the full viewport is returned.
        """
        px, py, z = self.project(aabb.corners())
        if np.any(z < 1e-6):
            return 0, self.vw, 0, self.vh
        x0 = max(0, int(math.floor(px.min())) - pad)
        x1 = min(self.vw, int(math.ceil(px.max())) + pad + 1)
        y0 = max(0, int(math.floor(py.min())) - pad)
        y1 = min(self.vh, int(math.ceil(py.max())) + pad + 1)
        if x0 >= x1 or y0 >= y1:
            return 0, 0, 0, 0
        return x0, x1, y0, y1


def _plan_trace(accel, frame: CameraFrame, threads, rect=None):
    """Allocate buffers and split the viewport into row-block trace tasks."""
    h, w = frame.vh, frame.vw
    dirs = frame.ray_dirs(rect)
    out_t = np.full((h, w), np.inf)
    out_inst = np.full((h, w), -1, dtype=np.int32)
    out_gtri = np.full((h, w), -1, dtype=np.int32)
    buffers = (out_t, out_inst, out_gtri, dirs)
    x0, x1, y0, y1 = rect if rect is not None else (0, w, 0, h)
    rows = y1 - y0
    if rows <= 0 or x1 <= x0:
        return buffers, []

    n_tasks = min(threads * 4, max(1, rows // _MIN_ROWS_PER_TASK))
    bounds = np.linspace(y0, y1, n_tasks + 1).astype(int)

    def make_task(b0, b1):
        def run():
            accel.trace(frame.origin, dirs, out_t, out_inst, out_gtri,
                        px0=x0, px1=x1, py0=int(b0), py1=int(b1))
        return run

    return buffers, [make_task(bounds[i], bounds[i + 1]) for i in range(n_tasks)]


def _trace(accel, frame: CameraFrame, threads, rect=None):
    """Trace the (sub)viewport, returning (t, inst_slot, gtri, dirs)."""
    threads = default_threads() if threads is None else max(1, int(threads))
    buffers, tasks = _plan_trace(accel, frame, threads, rect=rect)
    if threads == 1 or len(tasks) <= 1:
        for task in tasks:
            task()
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(lambda task: task(), tasks))
    return buffers


def _quantize(rgb):
    return (np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _assemble(snapshot, cam, frame, channels, t, inst, gtri, dirs):
    """Fill the requested channels from per-pixel hit records.

    All per-hit arithmetic runs on the flat list of hit pixels and is
    scattered back, so sparse scenes only pay for covered pixels.
    """
    accel = snapshot.accel()
    params = snapshot.params
    h, w = t.shape
    idx = np.nonzero(inst.ravel() >= 0)[0]
    g = gtri.ravel()[idx]
    slots = inst.ravel()[idx]
    dirs_hit = dirs.reshape(-1, 3)[idx]
    t_hit = t.ravel()[idx]
    depth_hit = t_hit * (dirs_hit @ frame.forward)

    fs = FrameSet(width=w, height=h, cam_id=getattr(cam, "cam_id", 0),
                  camera=cam, instance_ids=tuple(snapshot.object_ids))

    if "depth" in channels:
        buf = np.full(h * w, np.inf, dtype=np.float32)
        buf[idx] = depth_hit
        fs.depth = buf.reshape(h, w)
    if "instance" in channels:
        buf = np.zeros(h * w, dtype=np.uint32)
        buf[idx] = slots.astype(np.uint32) + 1
        fs.instance = buf.reshape(h, w)
    if "part" in channels:
        buf = np.zeros(h * w, dtype=np.uint16)
        buf[idx] = accel.tri_part[g] + 1
        fs.part = buf.reshape(h, w)

    normal_hit = None
    if "normal" in channels or "lit" in channels:
        normal_hit = np.einsum("kij,kj->ki", accel.inst_rot[slots],
                               accel.tri_normal[g])
        flip = np.sum(normal_hit * dirs_hit, axis=1) > 0.0
        normal_hit[flip] = -normal_hit[flip]
        if "normal" in channels:
            buf = np.zeros((h * w, 3), dtype=np.float32)
            buf[idx] = normal_hit
            fs.normal = buf.reshape(h, w, 3)

    if "pointmap" in channels:
        buf = np.full((h * w, 3), np.nan, dtype=np.float32)
        buf[idx] = frame.origin[None, :] + t_hit[:, None] * dirs_hit
        fs.pointmap = buf.reshape(h, w, 3)

    if "lit" in channels:
        albedo = accel.tri_albedo[g].astype(np.float64)
        lam = params.ambient_intensity + params.sun_intensity * np.maximum(
            0.0, -(normal_hit @ np.asarray(params.sun_direction, dtype=np.float64)))
        rgb = albedo * lam[:, None] * np.asarray(params.sun_color)[None, :]
        vis = float(params.fog_visibility)
        if math.isinf(vis):
            background = np.zeros(3, dtype=np.uint8)
        else:
            f = np.exp(-depth_hit / vis)[:, None]
            rgb = rgb * f + np.asarray(params.fog_color)[None, :] * (1.0 - f)
            background = _quantize(np.asarray(params.fog_color))
        buf = np.empty((h * w, 3), dtype=np.uint8)
        buf[:] = background
        buf[idx] = _quantize(rgb)
        fs.lit = buf.reshape(h, w, 3)

    return fs


def render(snapshot, cam, channels=ALL_CHANNELS, threads=None) -> FrameSet:
    """Render a full FrameSet (or the requested subset of channels)."""
    bad = set(channels) - set(ALL_CHANNELS)
    if bad:
        raise SimError(BAD_ARGS, f"unknown channels {sorted(bad)}")
    frame = CameraFrame(cam)
    t, inst, gtri, dirs = _trace(snapshot.accel(), frame, threads)
    return _assemble(snapshot, cam, frame, set(channels), t, inst, gtri, dirs)


def render_cameras(snapshot, cams, channels=ALL_CHANNELS, threads=None):
    """Render several cameras; results equal sequential render() calls.

    Row blocks from every camera are scheduled on one shared thread pool,
    so batches parallelize across cameras as well as rows.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(cams) <= 1:
        return [render(snapshot, cam, channels, threads=threads) for cam in cams]
    accel = snapshot.accel()
    plans = []
    tasks = []
    for cam in cams:
        frame = CameraFrame(cam)
        buffers, cam_tasks = _plan_trace(accel, frame, threads)
        plans.append((cam, frame, buffers))
        tasks.extend(cam_tasks)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(lambda task: task(), tasks))
    return [_assemble(snapshot, cam, frame, set(channels), *buffers)
            for cam, frame, buffers in plans]


def render_instance_alone(snapshot, cam, obj_id, expand=1, threads=None,
                          with_parts=True) -> InstanceDepthBuffer:
    """Depth of one object in isolation through the scene camera.

    The viewport is enlarged by the integer expand factor around the same
    principal point; only the conservative screen rectangle of the object's
    world AABB is traced, the rest stays at the miss sentinel.
    """
    if obj_id not in snapshot.object_ids:
        raise SimError(OBJECT_NOT_FOUND, obj_id)
    frame = CameraFrame(cam, expand=expand)
    accel = snapshot.single_accel(obj_id)
    rect = frame.screen_rect(snapshot.world_aabb(obj_id))
    t, inst, gtri, dirs = _trace(accel, frame, threads, rect=rect)
    h, w = t.shape
    idx = np.nonzero(inst.ravel() >= 0)[0]
    dirs_hit = dirs.reshape(-1, 3)[idx]
    depth = np.full(h * w, np.inf, dtype=np.float32)
    depth[idx] = t.ravel()[idx] * (dirs_hit @ frame.forward)
    depth = depth.reshape(h, w)
    part = None
    if with_parts:
        buf = np.zeros(h * w, dtype=np.uint16)
        buf[idx] = accel.tri_part[gtri.ravel()[idx]] + 1
        part = buf.reshape(h, w)
    e = int(expand)
    return InstanceDepthBuffer(
        obj_id=obj_id, depth=depth, expand_factor=e,
        window_x=(e - 1) * frame.width // 2, window_y=(e - 1) * frame.height // 2,
        width=frame.width, height=frame.height, part=part)


def pointmap_in_space(fs: FrameSet, space: str = "world") -> np.ndarray:
    """Point map in the requested frame.

    "world" returns the stored buffer; "opencv" re-expresses each point in a
    right-handed camera frame (x right, y down, z forward), whose z channel
    equals planar depth.
    """
    if fs.pointmap is None:
        raise SimError(BAD_ARGS, "frame has no pointmap channel")
    if space == "world":
        return fs.pointmap
    if space != "opencv":
        raise SimError(BAD_ARGS, f"unknown space {space!r}")
    frame = CameraFrame(fs.camera)
    rel = fs.pointmap.astype(np.float64) - frame.origin[None, None, :]
    out = np.stack([rel @ frame.right, rel @ (-frame.up), rel @ frame.forward],
                   axis=2)
    return out.astype(np.float32)
