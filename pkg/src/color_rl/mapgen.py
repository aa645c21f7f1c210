"""Procedural training/test maps: bordered arenas with rectangular obstacles,
a lower-left spawn region, and an upper-right goal disc.

Generation is deterministic for a given seed.  Layouts whose inflated free
space does not connect spawn to goal are rejected and resampled.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy import ndimage

from color_rl.sim.gridmap import GridMap, MapError


class MapGenError(MapError):
    """No acceptable layout found for the requested parameters."""


def _connected(occ: np.ndarray, cell: int, spawn_rect, goal_center, goal_radius,
               robot_radius: float) -> bool:
    """Can a disc of robot_radius travel spawn -> goal through free space?"""
    clearance = ndimage.distance_transform_edt(~occ) * cell
    passable = clearance > robot_radius
    labels, n = ndimage.label(passable)
    if n == 0:
        return False
    ny, nx = occ.shape
    xs = (np.arange(nx) + 0.5) * cell
    ys = (np.arange(ny) + 0.5) * cell
    cx, cy = np.meshgrid(xs, ys)
    x0, y0, x1, y1 = spawn_rect
    spawn_labels = labels[passable & (cx >= x0) & (cx <= x1) & (cy >= y0) & (cy <= y1)]
    goal_labels = labels[passable & (np.sqrt((cx - goal_center[0]) ** 2
                                             + (cy - goal_center[1]) ** 2) <= goal_radius)]
    if spawn_labels.size == 0 or goal_labels.size == 0:
        return False
    return bool(np.isin(np.unique(spawn_labels), np.unique(goal_labels)).any())


def generate_map(rng: np.random.Generator, size_cm: int = 366, cell_size_cm: int = 1,
                 density: float = 0.08, robot_radius_cm: float = 9.0,
                 goal_radius_cm: float = 20.0, spawn_size_cm: float = 70.0,
                 margin_cm: float = 10.0, block_range_cm=(20.0, 60.0),
                 min_gap_cm: float = 34.0, layout_attempts: int = 50) -> GridMap:
    """One random arena; raises MapGenError when no connected layout fits.

    Blocks either merge into larger clusters or keep min_gap_cm of clearance,
    so passages are traversable rather than near-miss traps.
    """
    if not 0.0 <= density < 1.0:
        raise ValueError("density must lie in [0, 1)")
    cell = int(cell_size_cm)
    n = size_cm // cell
    if n < 8:
        raise ValueError("map too small for the requested cell size")

    spawn_rect = (margin_cm, margin_cm,
                  margin_cm + spawn_size_cm, margin_cm + spawn_size_cm)
    g = size_cm - margin_cm - goal_radius_cm - 10.0
    goal_center = (g, g)
    clear = robot_radius_cm + 3.0
    gap = max(int(np.ceil(min_gap_cm / cell)), 1)

    interior = (n - 2) * (n - 2)
    target = int(density * interior)

    for _ in range(layout_attempts):
        occ = np.zeros((n, n), dtype=bool)
        occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
        placed = 0
        tries = 0
        while placed < target and tries < 10_000:
            tries += 1
            w = int(rng.uniform(*block_range_cm) / cell)
            h = int(rng.uniform(*block_range_cm) / cell)
            ix = int(rng.integers(1, max(n - 1 - w, 2)))
            iy = int(rng.integers(1, max(n - 1 - h, 2)))
            block = occ[iy:iy + h, ix:ix + w]
            ring = occ[max(iy - gap, 0):iy + h + gap, max(ix - gap, 0):ix + w + gap]
            if ring.any() and not block.any():
                continue  # too close to another block without merging
            before = int(block.sum())
            block[:] = True
            placed += w * h - before
        if placed < 0.8 * target:
            continue  # density not realizable under the gap rule; try a new layout

        # keep the spawn area and goal disc free (with robot clearance)
        xs = (np.arange(n) + 0.5) * cell
        cx, cy = np.meshgrid(xs, xs)
        x0, y0, x1, y1 = spawn_rect
        keep_free = ((cx >= x0 - clear) & (cx <= x1 + clear)
                     & (cy >= y0 - clear) & (cy <= y1 + clear))
        keep_free |= (np.sqrt((cx - goal_center[0]) ** 2 + (cy - goal_center[1]) ** 2)
                      <= goal_radius_cm + clear)
        occ &= ~keep_free
        occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True

        if _connected(occ, cell, spawn_rect, goal_center, goal_radius_cm,
                      robot_radius_cm):
            return GridMap(size_cm, size_cm, cell, occ, goal_center,
                           goal_radius_cm, spawn_rect)
    raise MapGenError(
        f"no connected layout at density {density} after {layout_attempts} attempts")


def generate_maps(count: int, seed: int, size_cm: int = 366, cell_size_cm: int = 1,
                  density: float = 0.08, **kwargs) -> list[GridMap]:
    rng = np.random.default_rng(seed)
    return [generate_map(rng, size_cm=size_cm, cell_size_cm=cell_size_cm,
                         density=density, **kwargs) for _ in range(count)]


def write_maps(maps, out_dir, prefix: str = "map") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    digits = max(2, len(str(max(len(maps) - 1, 1))))
    for i, m in enumerate(maps):
        path = out / f"{prefix}{i:0{digits}d}.txt"
        m.save(path)
        paths.append(path)
    return paths
