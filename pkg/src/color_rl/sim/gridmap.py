"""Occupancy grid world: storage, validation, and the text map format.

Coordinates are centimetres with the origin at the lower-left map corner and
y pointing up.  Cell (ix, iy) covers [ix*cell, (ix+1)*cell) x [iy*cell,
(iy+1)*cell).  The occupancy array is indexed [iy, ix]; text files store rows
top to bottom.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

FREE_CHAR = "."
OBSTACLE_CHAR = "#"
GOAL_CHAR = "G"
SPAWN_CHAR = "S"


class MapError(ValueError):
    """Raised for malformed, inconsistent, or unusable maps."""


class GridMap:
    """A bordered occupancy grid with a goal disc and a spawn rectangle."""

    def __init__(self, width_cm, height_cm, cell_size_cm, occupancy,
                 goal_center, goal_radius_cm, spawn_region):
        self.width_cm = int(width_cm)
        self.height_cm = int(height_cm)
        self.cell_size_cm = int(cell_size_cm)
        self.occupancy = np.asarray(occupancy, dtype=bool)
        self.goal_center = (float(goal_center[0]), float(goal_center[1]))
        self.goal_radius_cm = float(goal_radius_cm)
        self.spawn_region = tuple(float(v) for v in spawn_region)
        self._edt_cells = None
        self._validate()

    # -- geometry helpers -------------------------------------------------

    @property
    def n_cols(self) -> int:
        return self.width_cm // self.cell_size_cm

    @property
    def n_rows(self) -> int:
        return self.height_cm // self.cell_size_cm

    @property
    def diagonal_cm(self) -> float:
        return math.hypot(self.width_cm, self.height_cm)

    def cell_of(self, x_cm: float, y_cm: float) -> tuple[int, int]:
        c = self.cell_size_cm
        return int(math.floor(x_cm / c)), int(math.floor(y_cm / c))

    def in_bounds(self, x_cm: float, y_cm: float) -> bool:
        return 0.0 <= x_cm < self.width_cm and 0.0 <= y_cm < self.height_cm

    def edt_cells(self) -> np.ndarray:
        """Distance (in cell units, cell centre to cell centre) to the nearest
        occupied cell; used by the raycast kernels to skip open space."""
        if self._edt_cells is None:
            from scipy import ndimage

            self._edt_cells = ndimage.distance_transform_edt(
                ~self.occupancy
            ).astype(np.float64)
        return self._edt_cells

    # -- validation --------------------------------------------------------

    def _validate(self) -> None:
        if self.cell_size_cm <= 0:
            raise MapError("cell size must be a positive integer")
        if self.width_cm <= 0 or self.height_cm <= 0:
            raise MapError("map dimensions must be positive")
        if self.width_cm % self.cell_size_cm or self.height_cm % self.cell_size_cm:
            raise MapError("width and height must be exact multiples of the cell size")
        if self.occupancy.shape != (self.n_rows, self.n_cols):
            raise MapError(
                f"occupancy shape {self.occupancy.shape} does not match the "
                f"declared {self.n_rows}x{self.n_cols} grid"
            )
        border = np.concatenate([
            self.occupancy[0, :], self.occupancy[-1, :],
            self.occupancy[:, 0], self.occupancy[:, -1],
        ])
        if not border.all():
            raise MapError("border cells must all be occupied")
        gx, gy = self.goal_center
        if not self.in_bounds(gx, gy):
            raise MapError("goal center lies outside map bounds")
        ix, iy = self.cell_of(gx, gy)
        if self.occupancy[iy, ix]:
            raise MapError("goal center lies on an occupied cell")
        if self.goal_radius_cm <= 0:
            raise MapError("goal radius must be positive")
        x0, y0, x1, y1 = self.spawn_region
        if not (0 <= x0 <= x1 <= self.width_cm and 0 <= y0 <= y1 <= self.height_cm):
            raise MapError("spawn region must be a rectangle inside map bounds")

    # -- text format ---------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "GridMap":
        lines = text.splitlines()
        if not lines:
            raise MapError("empty map text")
        head = lines[0].split()
        if len(head) != 3:
            raise MapError("header must be 'width height cell_size'")
        try:
            width, height, cell = (int(v) for v in head)
        except ValueError as exc:
            raise MapError(f"non-integer map header: {lines[0]!r}") from exc
        if cell <= 0 or width % cell or height % cell:
            raise MapError("dimensions must be positive multiples of the cell size")
        n_rows, n_cols = height // cell, width // cell
        rows = [ln for ln in lines[1:] if ln.strip() != ""]
        if len(rows) != n_rows:
            raise MapError(f"expected {n_rows} grid rows, found {len(rows)}")

        occ = np.zeros((n_rows, n_cols), dtype=bool)
        goal_cells: list[tuple[int, int]] = []
        spawn_cells: list[tuple[int, int]] = []
        for r, line in enumerate(rows):
            if len(line) != n_cols:
                raise MapError(f"row {r + 1} has {len(line)} characters, expected {n_cols}")
            iy = n_rows - 1 - r
            for ix, ch in enumerate(line):
                if ch == OBSTACLE_CHAR:
                    occ[iy, ix] = True
                elif ch == GOAL_CHAR:
                    goal_cells.append((ix, iy))
                elif ch == SPAWN_CHAR:
                    spawn_cells.append((ix, iy))
                elif ch != FREE_CHAR:
                    raise MapError(f"unknown map character {ch!r} in row {r + 1}")
        # implicit walls
        occ[0, :] = occ[-1, :] = occ[:, 0] = occ[:, -1] = True
        if not goal_cells:
            raise MapError("map has no goal ('G') cells")
        if not spawn_cells:
            raise MapError("map has no spawn ('S') cells")

        centers = (np.array(goal_cells, dtype=np.float64) + 0.5) * cell
        goal_center = centers.mean(axis=0)
        extent = np.hypot(*(centers - goal_center).T).max()
        goal_radius = float(extent + cell / 2.0)

        sx = np.array([c[0] for c in spawn_cells])
        sy = np.array([c[1] for c in spawn_cells])
        spawn = (sx.min() * cell, sy.min() * cell,
                 (sx.max() + 1) * cell, (sy.max() + 1) * cell)
        return cls(width, height, cell, occ, tuple(goal_center), goal_radius, spawn)

    def to_text(self) -> str:
        cell = self.cell_size_cm
        xs = (np.arange(self.n_cols) + 0.5) * cell
        ys = (np.arange(self.n_rows) + 0.5) * cell
        cx, cy = np.meshgrid(xs, ys)
        in_goal = np.hypot(cx - self.goal_center[0], cy - self.goal_center[1]) <= self.goal_radius_cm
        x0, y0, x1, y1 = self.spawn_region
        in_spawn = (cx >= x0) & (cx <= x1) & (cy >= y0) & (cy <= y1)

        grid = np.full((self.n_rows, self.n_cols), FREE_CHAR, dtype="<U1")
        grid[in_spawn & ~self.occupancy] = SPAWN_CHAR
        grid[in_goal & ~self.occupancy] = GOAL_CHAR
        grid[self.occupancy] = OBSTACLE_CHAR
        lines = [f"{self.width_cm} {self.height_cm} {self.cell_size_cm}"]
        for r in range(self.n_rows - 1, -1, -1):
            lines.append("".join(grid[r]))
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, path) -> "GridMap":
        return cls.from_text(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    def to_ascii(self, robot_xy=None) -> str:
        """Debug dump; marks the robot cell with 'R' when a pose is given."""
        text = self.to_text().splitlines()[1:]
        if robot_xy is not None:
            ix, iy = self.cell_of(*robot_xy)
            r = self.n_rows - 1 - iy
            if 0 <= r < len(text) and 0 <= ix < self.n_cols:
                row = list(text[r])
                row[ix] = "R"
                text[r] = "".join(row)
        return "\n".join(text)
