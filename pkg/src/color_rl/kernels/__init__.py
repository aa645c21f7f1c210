"""Grid raycasting / collision kernels with a compiled core and a numpy fallback.

The compiled extension (``color_rl.kernels._cy``) and the pure-numpy module
(``color_rl.kernels._py``) implement the same per-ray algorithm with the same
floating-point operation order, so their outputs are bit-identical.  The
backend is chosen once at import: the extension if it built, else numpy.
Set ``COLOR_KERNELS=py`` or ``COLOR_KERNELS=cy`` to force one.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

_BACKENDS = ("cy", "py")


def _load(name: str):
    if name == "py":
        return importlib.import_module("color_rl.kernels._py")
    if name == "cy":
        return importlib.import_module("color_rl.kernels._cy")
    raise ValueError(f"unknown kernel backend {name!r} (expected 'cy' or 'py')")


def available_backends() -> tuple[str, ...]:
    out = []
    for name in _BACKENDS:
        try:
            _load(name)
        except ImportError:
            continue
        out.append(name)
    return tuple(out)


def get_backend(name: str | None = None):
    """Return a kernel backend module; default is the active one."""
    if name is None or name in ("active", "auto"):
        return _active
    return _load(name)


_forced = os.environ.get("COLOR_KERNELS", "").strip().lower()
if _forced:
    _active = _load(_forced)
else:
    try:
        _active = _load("cy")
    except ImportError:
        _active = _load("py")

backend_name: str = _active.BACKEND_NAME


def _as_f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def cast_rays(occ, edt, map_idx, px, py, dirx, diry, cell, max_range, backend=None):
    """Distance from each ray origin to the first occupied cell, capped at max_range.

    occ: (M, H, W) uint8 stack of occupancy grids; edt: matching distance
    transform in cell units; map_idx selects the grid per ray.  Origins in an
    occupied cell or outside the grid report 0.
    """
    be = backend if backend is not None else _active
    occ = np.ascontiguousarray(occ, dtype=np.uint8)
    edt = _as_f64(edt)
    map_idx = np.ascontiguousarray(map_idx, dtype=np.int64)
    return be.cast_rays(
        occ, edt, map_idx, _as_f64(px), _as_f64(py), _as_f64(dirx), _as_f64(diry),
        float(cell), float(max_range),
    )


def disc_collides(occ, map_idx, px, py, radius, cell, backend=None):
    """Whether a disc intersects any occupied cell or exits the map bounds."""
    be = backend if backend is not None else _active
    occ = np.ascontiguousarray(occ, dtype=np.uint8)
    map_idx = np.ascontiguousarray(map_idx, dtype=np.int64)
    return be.disc_collides(
        occ, map_idx, _as_f64(px), _as_f64(py), _as_f64(radius), float(cell)
    )
