"""Analytic test volumes: half-space slab, sphere, and single-voxel phantoms."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .volume import Volume


def halfspace(
    dims: Sequence[int],
    z0: int | None = None,
    value: int = 255,
    spacing: Sequence[float] = (1.0, 1.0, 1.0),
) -> Volume:
    """Slab phantom: every voxel with k <= z0 is set to (value,)*4, the rest empty.

    With z0 = nz-1 (the default) the whole grid is solid and the felt surface
    is the grid's top voxel-center plane, so a sampling sphere at a top-face
    contact sees solid voxels only.
    """
    nx, ny, nz = (int(d) for d in dims)
    if z0 is None:
        z0 = nz - 1
    if not 0 <= z0 < nz:
        raise ValueError(f"z0 must be in [0, {nz - 1}], got {z0}")
    vol = Volume.filled((nx, ny, nz), spacing=spacing)
    vol.data[: z0 + 1, :, :, :] = np.uint8(value)
    return vol


def sphere(
    dims: Sequence[int],
    radius: float,
    center: Sequence[float] | None = None,
    value: int = 255,
    soft: bool = True,
    spacing: Sequence[float] = (1.0, 1.0, 1.0),
) -> Volume:
    """Solid sphere phantom, centered in the grid unless ``center`` (voxel coords) is given.

    ``soft`` grades all four channels over a one-voxel shell (coverage ramp),
    which keeps marching-cubes geometry faithful to the analytic surface;
    ``soft=False`` produces a hard binary ball. Radius is in voxel units.
    """
    nx, ny, nz = (int(d) for d in dims)
    if center is None:
        center = ((nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0)
    cx, cy, cz = (float(c) for c in center)
    kk, jj, ii = np.mgrid[0:nz, 0:ny, 0:nx].astype(np.float64)
    dist = np.sqrt((ii - cx) ** 2 + (jj - cy) ** 2 + (kk - cz) ** 2)
    if soft:
        t = np.clip(radius - dist + 0.5, 0.0, 1.0)
    else:
        t = (dist <= radius).astype(np.float64)
    channel = np.round(t * value).astype(np.uint8)
    data = np.repeat(channel[:, :, :, None], 4, axis=3)
    return Volume(
        (nx, ny, nz),
        tuple(float(s) for s in spacing),
        (0.0, 0.0, 0.0),
        np.ascontiguousarray(data),
    )


def single_voxel(
    dims: Sequence[int] = (3, 3, 3),
    value: int = 255,
    spacing: Sequence[float] = (1.0, 1.0, 1.0),
) -> Volume:
    """Empty grid with one opaque voxel at the center."""
    nx, ny, nz = (int(d) for d in dims)
    vol = Volume.filled((nx, ny, nz), spacing=spacing)
    vol.data[nz // 2, ny // 2, nx // 2] = np.uint8(value)
    return vol
