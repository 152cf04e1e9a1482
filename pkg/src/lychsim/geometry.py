"""Coordinate conventions and rigid transforms.

The world frame is left-handed, Z-up, measured in centimeters.  Orientations
are rotators (pitch, yaw, roll in degrees) applied intrinsically in the order
yaw -> pitch -> roll, with zero yaw facing +X, yaw=+90 facing +Y, and positive
pitch tilting the forward axis toward +Z (so pitch=-89 looks nearly straight
down).
"""

from dataclasses import dataclass, field

import numpy as np


def vec3(x, y=None, z=None):
    """Build a float64 3-vector from components or any length-3 sequence."""
    if y is None:
        a = np.asarray(x, dtype=np.float64)
        if a.shape != (3,):
            raise ValueError(f"expected 3 components, got shape {a.shape}")
        return a.copy()
    return np.array([x, y, z], dtype=np.float64)


def normalize(v):
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def normalize_angle(deg):
    """Map an angle in degrees into the canonical (-180, 180] range.

    Values already in range pass through untouched, so normalization is
    bitwise idempotent (snapshot round-trips rely on this).
    """
    a = float(deg)
    if -180.0 < a <= 180.0:
        return a
    a = a % 360.0
    if a > 180.0:
        a -= 360.0
    return a


@dataclass(frozen=True)
class Rotator:
    """Orientation as pitch/yaw/roll degrees, stored canonically in (-180, 180]."""

    pitch: float = 0.0
    yaw: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pitch", normalize_angle(self.pitch))
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))
        object.__setattr__(self, "roll", normalize_angle(self.roll))

    def as_tuple(self):
        return (self.pitch, self.yaw, self.roll)


@dataclass(frozen=True)
class Pose:
    """Placement datum: location (cm) + rotator + uniform positive scale."""

    location: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: Rotator = field(default_factory=Rotator)
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "location", vec3(self.location))
        object.__setattr__(self, "scale", float(self.scale))
        if not np.all(np.isfinite(self.location)):
            raise ValueError("pose location must be finite")
        if not (self.scale > 0.0):
            raise ValueError("pose scale must be positive")

    def matrix(self):
        return rotator_to_matrix(self.rotation)


def rotator_to_matrix(r: Rotator) -> np.ndarray:
    """Rotation matrix (columns = forward, right, up) for a rotator.

    Intrinsic composition yaw -> pitch -> roll.  Yaw rotates about world +Z
    taking +X toward +Y at yaw=+90; positive pitch lifts the forward axis
    toward +Z; roll spins about the resulting forward axis (up tilts toward
    right for positive roll).
    """
    p, y, ro = np.radians([r.pitch, r.yaw, r.roll])
    cy, sy = np.cos(y), np.sin(y)
    cp, sp = np.cos(p), np.sin(p)
    cr, sr = np.cos(ro), np.sin(ro)
    yaw_m = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    pitch_m = np.array([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]])
    roll_m = np.array([[1.0, 0.0, 0.0], [0.0, cr, sr], [0.0, -sr, cr]])
    return yaw_m @ pitch_m @ roll_m


def matrix_to_rotator(m: np.ndarray) -> Rotator:
    """Recover the (pitch, yaw, roll) rotator from a rotation matrix."""
    fwd = m[:, 0]
    pitch = np.degrees(np.arcsin(np.clip(fwd[2], -1.0, 1.0)))
    yaw = np.degrees(np.arctan2(fwd[1], fwd[0]))
    # Roll from where the un-rolled right axis landed.
    no_roll = rotator_to_matrix(Rotator(pitch, yaw, 0.0))
    right = m[:, 1]
    roll = np.degrees(np.arctan2(-float(no_roll[:, 2] @ right), float(no_roll[:, 1] @ right)))
    return Rotator(pitch, yaw, roll)


def forward_vector(r: Rotator) -> np.ndarray:
    return rotator_to_matrix(r)[:, 0]


def look_at_rotator(eye, target) -> Rotator:
    """Rotator whose forward axis points from eye at target, roll fixed to 0."""
    f = normalize(vec3(target) - vec3(eye))
    pitch = np.degrees(np.arcsin(np.clip(f[2], -1.0, 1.0)))
    yaw = np.degrees(np.arctan2(f[1], f[0]))
    return Rotator(pitch, yaw, 0.0)


def transform_point(pose: Pose, v) -> np.ndarray:
    """Map a local point into world space: R @ (s * v) + location."""
    return pose.matrix() @ (pose.scale * vec3(v)) + pose.location


def transform_points(pose: Pose, pts: np.ndarray) -> np.ndarray:
    """Vectorized transform_point for an (N, 3) array."""
    m = pose.matrix()
    return (pose.scale * np.asarray(pts, dtype=np.float64)) @ m.T + pose.location


def inverse_transform_point(pose: Pose, v) -> np.ndarray:
    """Map a world point back into the pose's local frame."""
    return pose.matrix().T @ (vec3(v) - pose.location) / pose.scale


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box, min <= max componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", vec3(self.min))
        object.__setattr__(self, "max", vec3(self.max))
        if np.any(self.min > self.max):
            raise ValueError("aabb min must not exceed max")

    @classmethod
    def of_points(cls, pts: np.ndarray) -> "Aabb":
        pts = np.asarray(pts, dtype=np.float64)
        if pts.size == 0:
            raise ValueError("aabb of empty point set")
        return cls(pts.min(axis=0), pts.max(axis=0))

    @property
    def extents(self) -> np.ndarray:
        return self.max - self.min

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    def overlaps(self, other: "Aabb") -> bool:
        """Open-interval overlap: boxes sharing only a face do not collide."""
        return bool(np.all(self.min < other.max) and np.all(other.min < self.max))

    def corners(self) -> np.ndarray:
        lo, hi = self.min, self.max
        return np.array([[x, y, z] for x in (lo[0], hi[0])
                         for y in (lo[1], hi[1])
                         for z in (lo[2], hi[2])])


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    t_min: float = 0.0
    t_max: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "origin", vec3(self.origin))
        object.__setattr__(self, "direction", vec3(self.direction))
        if not (0.0 <= self.t_min < self.t_max):
            raise ValueError("ray bounds must satisfy 0 <= t_min < t_max")
        n = np.linalg.norm(self.direction)
        if abs(n - 1.0) > 1e-6:
            raise ValueError("ray direction must be unit length")


@dataclass(frozen=True)
class Hit:
    t: float
    point: np.ndarray
    geometric_normal: np.ndarray
    instance_id: int
    part_id: int
    triangle_index: int


def world_aabb_of_vertices(vertices: np.ndarray, pose: Pose) -> Aabb:
    """Tight world AABB obtained by sweeping every transformed vertex."""
    return Aabb.of_points(transform_points(pose, vertices))


def world_aabb(mesh, pose: Pose) -> Aabb:
    """Tight world AABB of a mesh (anything with .vertices) under a pose."""
    return world_aabb_of_vertices(getattr(mesh, "vertices", mesh), pose)
