"""Brute-force reference intersector: the oracle the BVH path is checked against.

Visits every triangle of every instance in ascending (instance, triangle)
order, testing all rays at once per triangle in world space.  Shares only
the contractual constants with the production path (tie window, barycentric
slack); the traversal, the coordinate handling (world-space vertices instead
of per-instance ray transforms), and the update rule are independent.
Because visiting order is ascending, the tie rule reduces to "replace only
when strictly nearer than best - TIE_EPS".
"""

import numpy as np

from lychsim.geometry import transform_points
from lychsim.kernels import BARY_EPS, DET_EPS, TIE_EPS


def brute_trace(entries, origin, dirs):
    """Nearest hits for rays sharing one origin.

    entries: (AssetRecord, Pose) list in instance order; dirs: (R, 3) unit.
    Returns (t, inst_slot, tri_index) with miss = (inf, -1, -1).
    """
    origin = np.asarray(origin, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    n = len(dirs)
    best_t = np.full(n, np.inf)
    best_inst = np.full(n, -1, dtype=np.int64)
    best_tri = np.full(n, -1, dtype=np.int64)

    for slot, (record, pose) in enumerate(entries):
        verts = transform_points(pose, record.mesh.vertices)
        faces = record.mesh.faces
        for tri in range(len(faces)):
            v0, v1, v2 = verts[faces[tri]]
            e1 = v1 - v0
            e2 = v2 - v0
            p = np.cross(dirs, e2)
            det = p @ e1
            valid = np.abs(det) > DET_EPS
            if not valid.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                f = 1.0 / det
                s = origin - v0
                u = f * (p @ s)
                q = np.cross(s, e1)
                v = f * (dirs @ q)
                t = f * float(e2 @ q)
            valid &= (u >= -BARY_EPS) & (u <= 1.0 + BARY_EPS)
            valid &= (v >= -BARY_EPS) & (u + v <= 1.0 + BARY_EPS)
            valid &= t > 0.0
            # ascending visit order: only a strictly nearer hit may replace
            take = valid & (t < best_t - TIE_EPS)
            if take.any():
                best_t[take] = t[take]
                best_inst[take] = slot
                best_tri[take] = tri
    return best_t, best_inst, best_tri


def brute_instance_buffer(entries, cam_frame):
    """Instance values (slot + 1, 0 = miss) on the camera's pixel grid."""
    dirs = cam_frame.ray_dirs().reshape(-1, 3)
    _, inst, _ = brute_trace(entries, cam_frame.origin, dirs)
    values = (inst + 1).astype(np.uint32)
    return values.reshape(cam_frame.vh, cam_frame.vw)
