# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Scalar per-ray loops mirroring color_rl.kernels._py operation for operation,
so both backends produce bit-identical results.
"""

import numpy as np

from libc.math cimport floor

BACKEND_NAME = "cy"

cdef double INF = float("inf")
cdef double JUMP_MIN_CELLS = 2.5
cdef double JUMP_MARGIN = 1.5


def cast_rays(const unsigned char[:, :, ::1] occ, const double[:, :, ::1] edt,
              const long long[::1] map_idx, const double[::1] px, const double[::1] py,
              const double[::1] dirx, const double[::1] diry,
              double cell, double max_range):
    cdef Py_ssize_t n_rays = px.shape[0]
    cdef Py_ssize_t height = occ.shape[1]
    cdef Py_ssize_t width = occ.shape[2]
    out_arr = np.empty(n_rays, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t r
    cdef long long m, ix, iy, stepx, stepy
    cdef double x0, y0, dx, dy, t, tmx, tmy, tdx, tdy, clearance, tj, qx, qy
    with nogil:
        for r in range(n_rays):
            m = map_idx[r]
            x0 = px[r]; y0 = py[r]; dx = dirx[r]; dy = diry[r]
            ix = <long long>floor(x0 / cell)
            iy = <long long>floor(y0 / cell)
            if ix < 0 or ix >= width or iy < 0 or iy >= height:
                out[r] = 0.0
                continue
            if occ[m, iy, ix]:
                out[r] = 0.0
                continue
            stepx = 1 if dx > 0 else (-1 if dx < 0 else 0)
            stepy = 1 if dy > 0 else (-1 if dy < 0 else 0)
            tdx = cell / abs(dx) if dx != 0 else INF
            tdy = cell / abs(dy) if dy != 0 else INF
            if dx > 0:
                tmx = ((ix + 1) * cell - x0) / dx
            elif dx < 0:
                tmx = (ix * cell - x0) / dx
            else:
                tmx = INF
            if dy > 0:
                tmy = ((iy + 1) * cell - y0) / dy
            elif dy < 0:
                tmy = (iy * cell - y0) / dy
            else:
                tmy = INF
            t = 0.0
            out[r] = max_range
            while True:
                clearance = edt[m, iy, ix]
                if clearance > JUMP_MIN_CELLS:
                    tj = t + (clearance - JUMP_MARGIN) * cell
                    qx = x0 + tj * dx
                    qy = y0 + tj * dy
                    ix = <long long>floor(qx / cell)
                    iy = <long long>floor(qy / cell)
                    if dx > 0:
                        tmx = ((ix + 1) * cell - qx) / dx + tj
                    elif dx < 0:
                        tmx = (ix * cell - qx) / dx + tj
                    else:
                        tmx = INF
                    if dy > 0:
                        tmy = ((iy + 1) * cell - qy) / dy + tj
                    elif dy < 0:
                        tmy = (iy * cell - qy) / dy + tj
                    else:
                        tmy = INF
                    t = tj
                    if t > max_range:
                        out[r] = max_range
                        break
                    if ix < 0 or ix >= width or iy < 0 or iy >= height:
                        out[r] = t if t < max_range else max_range
                        break
                    continue
                if tmx <= tmy:
                    t = tmx
                    tmx = tmx + tdx
                    ix = ix + stepx
                else:
                    t = tmy
                    tmy = tmy + tdy
                    iy = iy + stepy
                if t > max_range:
                    out[r] = max_range
                    break
                if ix < 0 or ix >= width or iy < 0 or iy >= height:
                    out[r] = t if t < max_range else max_range
                    break
                if occ[m, iy, ix]:
                    out[r] = t if t < max_range else max_range
                    break
    return out_arr


def disc_collides(const unsigned char[:, :, ::1] occ, const long long[::1] map_idx,
                  const double[::1] px, const double[::1] py,
                  const double[::1] radius, double cell):
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t height = occ.shape[1]
    cdef Py_ssize_t width = occ.shape[2]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t k
    cdef long long m, ix0, ix1, iy0, iy1, ix, iy
    cdef double x, y, r, nx, ny, ddx, ddy, lo, hi
    cdef bint hit
    with nogil:
        for k in range(n):
            x = px[k]; y = py[k]; r = radius[k]
            if x - r < 0.0 or y - r < 0.0 or x + r > width * cell or y + r > height * cell:
                out[k] = 1
                continue
            m = map_idx[k]
            ix0 = <long long>floor((x - r) / cell)
            if ix0 < 0: ix0 = 0
            ix1 = <long long>floor((x + r) / cell)
            if ix1 > width - 1: ix1 = width - 1
            iy0 = <long long>floor((y - r) / cell)
            if iy0 < 0: iy0 = 0
            iy1 = <long long>floor((y + r) / cell)
            if iy1 > height - 1: iy1 = height - 1
            hit = False
            for iy in range(iy0, iy1 + 1):
                for ix in range(ix0, ix1 + 1):
                    if not occ[m, iy, ix]:
                        continue
                    lo = ix * cell
                    hi = lo + cell
                    nx = x if x > lo else lo
                    if nx > hi: nx = hi
                    lo = iy * cell
                    hi = lo + cell
                    ny = y if y > lo else lo
                    if ny > hi: ny = hi
                    ddx = x - nx
                    ddy = y - ny
                    if ddx * ddx + ddy * ddy <= r * r:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                out[k] = 1
    return out_arr
