"""Shared test helpers: tiny hand-built maps and brute-force oracles."""

from __future__ import annotations

import numpy as np

from color_rl.sim.gridmap import GridMap


def make_map(n_cells: int = 20, cell: int = 1, goal=None, goal_radius: float = 2.0,
             spawn=None, blocks=()) -> GridMap:
    """Bordered square map; blocks are (ix0, iy0, ix1, iy1) cell ranges."""
    occ = np.zeros((n_cells, n_cells), dtype=bool)
    occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
    for ix0, iy0, ix1, iy1 in blocks:
        occ[iy0:iy1, ix0:ix1] = True
    size = n_cells * cell
    if goal is None:
        goal = (0.7 * size, 0.7 * size)
    if spawn is None:
        # roomy enough for the default 9 cm robot radius
        spawn = (0.3 * size, 0.3 * size, 0.45 * size, 0.45 * size)
    return GridMap(size, size, cell, occ, goal, goal_radius, spawn)


def march_rays(occ: np.ndarray, cell: float, x: float, y: float,
               angles: np.ndarray, max_range: float,
               step_frac: float = 0.1) -> np.ndarray:
    """Fine-step ray marching oracle (vectorized over beams)."""
    n_rows, n_cols = occ.shape
    step = step_frac * cell
    ts = np.arange(0.0, max_range + step, step)
    out = np.empty(len(angles))
    for b, ang in enumerate(angles):
        px = x + ts * np.cos(ang)
        py = y + ts * np.sin(ang)
        ix = np.floor(px / cell).astype(int)
        iy = np.floor(py / cell).astype(int)
        valid = (ix >= 0) & (ix < n_cols) & (iy >= 0) & (iy < n_rows)
        hit = valid & occ[np.clip(iy, 0, n_rows - 1), np.clip(ix, 0, n_cols - 1)]
        idx = np.flatnonzero(hit)
        out[b] = min(ts[idx[0]], max_range) if idx.size else max_range
    return out


def slab_first_hit(occ: np.ndarray, cell: float, x: float, y: float,
                   angle: float, max_range: float):
    """Exact first-hit oracle: ray/rectangle slab intersection against every
    occupied cell.  Returns (entry_t, chord_len) capped at max_range, or
    (max_range, 0.0) when nothing is hit."""
    dx, dy = np.cos(angle), np.sin(angle)
    iys, ixs = np.nonzero(occ)
    with np.errstate(divide="ignore", invalid="ignore"):
        t0x = (ixs * cell - x) / dx
        t1x = ((ixs + 1) * cell - x) / dx
        t0y = (iys * cell - y) / dy
        t1y = ((iys + 1) * cell - y) / dy
    txin, txout = np.minimum(t0x, t1x), np.maximum(t0x, t1x)
    tyin, tyout = np.minimum(t0y, t1y), np.maximum(t0y, t1y)
    if dx == 0.0:
        inside = (ixs * cell <= x) & (x < (ixs + 1) * cell)
        txin = np.where(inside, -np.inf, np.inf)
        txout = np.where(inside, np.inf, -np.inf)
    if dy == 0.0:
        inside = (iys * cell <= y) & (y < (iys + 1) * cell)
        tyin = np.where(inside, -np.inf, np.inf)
        tyout = np.where(inside, np.inf, -np.inf)
    tin = np.maximum(txin, tyin)
    tout = np.minimum(txout, tyout)
    ok = (tout >= tin) & (tout > 0)
    if not ok.any():
        return max_range, 0.0
    entry = np.clip(tin[ok], 0.0, None)
    best = np.argmin(entry)
    t = float(entry[best])
    if t > max_range:
        return max_range, 0.0
    return t, float(tout[ok][best] - entry[best])


def disc_hits_grid(occ: np.ndarray, cell: float, x: float, y: float,
                   radius: float) -> bool:
    """Disc-cell intersection oracle checked against every cell."""
    n_rows, n_cols = occ.shape
    if x - radius < 0 or y - radius < 0 or x + radius > n_cols * cell \
            or y + radius > n_rows * cell:
        return True
    for iy in range(n_rows):
        for ix in range(n_cols):
            if not occ[iy, ix]:
                continue
            nx = min(max(x, ix * cell), (ix + 1) * cell)
            ny = min(max(y, iy * cell), (iy + 1) * cell)
            if (x - nx) ** 2 + (y - ny) ** 2 <= radius * radius:
                return True
    return False


def random_scene(rng: np.random.Generator, n_cells: int = 60, n_blocks: int = 8):
    """Random bordered occupancy grid plus a free-cell pose sampler."""
    occ = np.zeros((n_cells, n_cells), dtype=bool)
    occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
    for _ in range(n_blocks):
        w, h = rng.integers(2, max(3, n_cells // 5), 2)
        ix = int(rng.integers(1, n_cells - 1 - w))
        iy = int(rng.integers(1, n_cells - 1 - h))
        occ[iy:iy + h, ix:ix + w] = True

    def sample_free_pose():
        while True:
            x = rng.uniform(1.0, n_cells - 1.0)
            y = rng.uniform(1.0, n_cells - 1.0)
            if not occ[int(np.floor(y)), int(np.floor(x))]:
                return x, y

    return occ, sample_free_pose
