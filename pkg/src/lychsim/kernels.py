"""Numba ray-trace kernels over a two-level BVH.

The scene is a TLAS over instance world AABBs whose leaves point at
per-asset BLAS trees in canonical local space; rays are transformed into
each instance's frame (uniform scale, so local hit parameters convert to
world by multiplying with the instance scale).

Equal-depth hits inside a +-TIE_EPS window tie-break on the lower
(instance index, original triangle index), matching the brute-force
reference; nodes are only pruned when their entry distance exceeds the
current best by more than the tie window so tie candidates are never lost.

Kernels are compiled with nogil so callers can parallelize over disjoint
row blocks with ordinary threads; every output element depends only on its
own pixel, which keeps renders bit-identical for any thread count.
"""

import numpy as np
from numba import njit

TIE_EPS = 1e-6    # cm
BARY_EPS = 1e-9   # barycentric slack: shared-edge hits must not leak
DET_EPS = 1e-12

_STACK = 64       # median splits are balanced; depth < 40 even at 2^31 prims


@njit(cache=True, nogil=True, fastmath=False)
def _slab(nx0, ny0, nz0, nx1, ny1, nz1, ox, oy, oz, dx, dy, dz, t_far):
    """Ray/AABB entry distance, or inf when the slab test fails."""
    t_near = 0.0
    if dx != 0.0:
        inv = 1.0 / dx
        ta = (nx0 - ox) * inv
        tb = (nx1 - ox) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > t_near:
            t_near = ta
        if tb < t_far:
            t_far = tb
    elif ox < nx0 or ox > nx1:
        return np.inf
    if dy != 0.0:
        inv = 1.0 / dy
        ta = (ny0 - oy) * inv
        tb = (ny1 - oy) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > t_near:
            t_near = ta
        if tb < t_far:
            t_far = tb
    elif oy < ny0 or oy > ny1:
        return np.inf
    if dz != 0.0:
        inv = 1.0 / dz
        ta = (nz0 - oz) * inv
        tb = (nz1 - oz) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > t_near:
            t_near = ta
        if tb < t_far:
            t_far = tb
    elif oz < nz0 or oz > nz1:
        return np.inf
    if t_near > t_far:
        return np.inf
    return t_near


@njit(cache=True, nogil=True, fastmath=False)
def trace_region(
    t_nmin, t_nmax, t_na, t_nb, t_nleaf, t_order,
    inst_amin, inst_amax, inst_rot, inst_loc, inst_scale, inst_asset,
    b_nmin, b_nmax, b_na, b_nb, b_nleaf, b_node_ofs,
    tri_v0, tri_v1, tri_v2, tri_orig, b_tri_ofs,
    origin, dirs, ray_tmin, ray_tmax,
    px0, px1, py0, py1,
    out_t, out_inst, out_gtri,
):
    """Trace one primary ray per pixel of the region [py0:py1, px0:px1].

    dirs is the full (H, W, 3) grid of unit ray directions; hits are
    accepted in (ray_tmin, ray_tmax]; outputs are the full-resolution
    t / instance-slot / global-triangle buffers (miss = inf / -1 / -1).
    """
    ox, oy, oz = origin[0], origin[1], origin[2]

    t_stack = np.empty(_STACK, dtype=np.int32)
    t_dist = np.empty(_STACK, dtype=np.float64)
    b_stack = np.empty(_STACK, dtype=np.int32)
    b_dist = np.empty(_STACK, dtype=np.float64)

    for py in range(py0, py1):
        for px in range(px0, px1):
            dx = dirs[py, px, 0]
            dy = dirs[py, px, 1]
            dz = dirs[py, px, 2]

            best_t = np.inf
            best_inst = -1
            best_orig = -1
            best_gtri = -1

            t_top = 0
            d0 = _slab(t_nmin[0, 0], t_nmin[0, 1], t_nmin[0, 2],
                       t_nmax[0, 0], t_nmax[0, 1], t_nmax[0, 2],
                       ox, oy, oz, dx, dy, dz, np.inf)
            if d0 != np.inf:
                t_stack[0] = 0
                t_dist[0] = d0
                t_top = 1

            while t_top > 0:
                t_top -= 1
                node = t_stack[t_top]
                if t_dist[t_top] > best_t + TIE_EPS:
                    continue
                if t_nleaf[node]:
                    start = t_na[node]
                    for k in range(start, start + t_nb[node]):
                        inst = t_order[k]
                        d_inst = _slab(
                            inst_amin[inst, 0], inst_amin[inst, 1], inst_amin[inst, 2],
                            inst_amax[inst, 0], inst_amax[inst, 1], inst_amax[inst, 2],
                            ox, oy, oz, dx, dy, dz, np.inf)
                        if d_inst == np.inf or d_inst > best_t + TIE_EPS:
                            continue

                        scale = inst_scale[inst]
                        lx = ox - inst_loc[inst, 0]
                        ly = oy - inst_loc[inst, 1]
                        lz = oz - inst_loc[inst, 2]
                        # R^T transforms world -> local (columns of R are axes).
                        lox = (inst_rot[inst, 0, 0] * lx + inst_rot[inst, 1, 0] * ly
                               + inst_rot[inst, 2, 0] * lz) / scale
                        loy = (inst_rot[inst, 0, 1] * lx + inst_rot[inst, 1, 1] * ly
                               + inst_rot[inst, 2, 1] * lz) / scale
                        loz = (inst_rot[inst, 0, 2] * lx + inst_rot[inst, 1, 2] * ly
                               + inst_rot[inst, 2, 2] * lz) / scale
                        ldx = (inst_rot[inst, 0, 0] * dx + inst_rot[inst, 1, 0] * dy
                               + inst_rot[inst, 2, 0] * dz)
                        ldy = (inst_rot[inst, 0, 1] * dx + inst_rot[inst, 1, 1] * dy
                               + inst_rot[inst, 2, 1] * dz)
                        ldz = (inst_rot[inst, 0, 2] * dx + inst_rot[inst, 1, 2] * dy
                               + inst_rot[inst, 2, 2] * dz)

                        asset = inst_asset[inst]
                        n_ofs = b_node_ofs[asset]
                        tr_ofs = b_tri_ofs[asset]

                        b_top = 0
                        db = _slab(b_nmin[n_ofs, 0], b_nmin[n_ofs, 1], b_nmin[n_ofs, 2],
                                   b_nmax[n_ofs, 0], b_nmax[n_ofs, 1], b_nmax[n_ofs, 2],
                                   lox, loy, loz, ldx, ldy, ldz, np.inf)
                        if db != np.inf:
                            b_stack[0] = 0
                            b_dist[0] = db
                            b_top = 1

                        while b_top > 0:
                            b_top -= 1
                            bn = b_stack[b_top]
                            if b_dist[b_top] * scale > best_t + TIE_EPS:
                                continue
                            gn = n_ofs + bn
                            if b_nleaf[gn]:
                                tstart = b_na[gn]
                                for s in range(tstart, tstart + b_nb[gn]):
                                    gt = tr_ofs + s
                                    v0x = tri_v0[gt, 0]
                                    v0y = tri_v0[gt, 1]
                                    v0z = tri_v0[gt, 2]
                                    e1x = tri_v1[gt, 0] - v0x
                                    e1y = tri_v1[gt, 1] - v0y
                                    e1z = tri_v1[gt, 2] - v0z
                                    e2x = tri_v2[gt, 0] - v0x
                                    e2y = tri_v2[gt, 1] - v0y
                                    e2z = tri_v2[gt, 2] - v0z
                                    # Moller-Trumbore
                                    px_ = ldy * e2z - ldz * e2y
                                    py_ = ldz * e2x - ldx * e2z
                                    pz_ = ldx * e2y - ldy * e2x
                                    det = e1x * px_ + e1y * py_ + e1z * pz_
                                    if det > -DET_EPS and det < DET_EPS:
                                        continue
                                    f = 1.0 / det
                                    sx = lox - v0x
                                    sy = loy - v0y
                                    sz = loz - v0z
                                    u = f * (sx * px_ + sy * py_ + sz * pz_)
                                    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
                                        continue
                                    qx = sy * e1z - sz * e1y
                                    qy = sz * e1x - sx * e1z
                                    qz = sx * e1y - sy * e1x
                                    v = f * (ldx * qx + ldy * qy + ldz * qz)
                                    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
                                        continue
                                    tl = f * (e2x * qx + e2y * qy + e2z * qz)
                                    tw = tl * scale
                                    if tw <= ray_tmin or tw > ray_tmax:
                                        continue
                                    if tw > best_t + TIE_EPS:
                                        continue
                                    if tw < best_t - TIE_EPS:
                                        take = True
                                    else:
                                        orig = tri_orig[gt]
                                        take = (inst < best_inst
                                                or (inst == best_inst
                                                    and orig < best_orig))
                                    if take:
                                        best_t = tw
                                        best_inst = inst
                                        best_orig = tri_orig[gt]
                                        best_gtri = gt
                            else:
                                left = b_na[gn]
                                right = b_nb[gn]
                                gl = n_ofs + left
                                gr = n_ofs + right
                                dl = _slab(b_nmin[gl, 0], b_nmin[gl, 1], b_nmin[gl, 2],
                                           b_nmax[gl, 0], b_nmax[gl, 1], b_nmax[gl, 2],
                                           lox, loy, loz, ldx, ldy, ldz, np.inf)
                                dr = _slab(b_nmin[gr, 0], b_nmin[gr, 1], b_nmin[gr, 2],
                                           b_nmax[gr, 0], b_nmax[gr, 1], b_nmax[gr, 2],
                                           lox, loy, loz, ldx, ldy, ldz, np.inf)
                                lim = (best_t + TIE_EPS) / scale
                                if dl <= dr:
                                    if dr != np.inf and dr <= lim:
                                        b_stack[b_top] = right
                                        b_dist[b_top] = dr
                                        b_top += 1
                                    if dl != np.inf and dl <= lim:
                                        b_stack[b_top] = left
                                        b_dist[b_top] = dl
                                        b_top += 1
                                else:
                                    if dl != np.inf and dl <= lim:
                                        b_stack[b_top] = left
                                        b_dist[b_top] = dl
                                        b_top += 1
                                    if dr != np.inf and dr <= lim:
                                        b_stack[b_top] = right
                                        b_dist[b_top] = dr
                                        b_top += 1
                else:
                    left = t_na[node]
                    right = t_nb[node]
                    dl = _slab(t_nmin[left, 0], t_nmin[left, 1], t_nmin[left, 2],
                               t_nmax[left, 0], t_nmax[left, 1], t_nmax[left, 2],
                               ox, oy, oz, dx, dy, dz, np.inf)
                    dr = _slab(t_nmin[right, 0], t_nmin[right, 1], t_nmin[right, 2],
                               t_nmax[right, 0], t_nmax[right, 1], t_nmax[right, 2],
                               ox, oy, oz, dx, dy, dz, np.inf)
                    lim = best_t + TIE_EPS
                    if dl <= dr:
                        if dr != np.inf and dr <= lim:
                            t_stack[t_top] = right
                            t_dist[t_top] = dr
                            t_top += 1
                        if dl != np.inf and dl <= lim:
                            t_stack[t_top] = left
                            t_dist[t_top] = dl
                            t_top += 1
                    else:
                        if dl != np.inf and dl <= lim:
                            t_stack[t_top] = left
                            t_dist[t_top] = dl
                            t_top += 1
                        if dr != np.inf and dr <= lim:
                            t_stack[t_top] = right
                            t_dist[t_top] = dr
                            t_top += 1

            out_t[py, px] = best_t
            out_inst[py, px] = best_inst
            out_gtri[py, px] = best_gtri
