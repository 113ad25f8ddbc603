"""Voxel volume data model: RGBA grid, world/voxel transforms, trilinear sampling, slice-stack I/O."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from PIL import Image

STACK_META_NAME = "meta.json"

_IMAGE_SUFFIXES = (".png", ".tif", ".tiff")


class StackError(ValueError):
    """A slice stack on disk violates the import contract."""


class Voxel(NamedTuple):
    """One RGBA cell; channels are ints in [0, 255]. Alpha doubles as radiodensity."""

    r: int
    g: int
    b: int
    a: int


class VoxelIndex(NamedTuple):
    i: int
    j: int
    k: int


@dataclass
class Volume:
    """Dense RGBA voxel grid with millimeter spacing and a world transform.

    ``data`` is a (nz, ny, nx, 4) uint8 array, which lays voxels out x-fastest
    in memory. The center of voxel (i, j, k) sits at ``origin + (i, j, k) *
    spacing`` in world mm. ``revision`` increases by one on every mutating
    operation and never otherwise.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    data: np.ndarray
    revision: int = 0

    def __post_init__(self) -> None:
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 1:
            raise ValueError(f"dims must all be >= 1, got {self.dims}")
        if min(self.spacing) <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        expected = (nz, ny, nx, 4)
        if self.data.dtype != np.uint8 or self.data.shape != expected:
            raise ValueError(
                f"voxel array must be uint8 with shape {expected}, "
                f"got {self.data.dtype} {self.data.shape}"
            )

    @classmethod
    def filled(
        cls,
        dims: Sequence[int],
        value: Sequence[int] = (0, 0, 0, 0),
        spacing: Sequence[float] = (1.0, 1.0, 1.0),
        origin: Sequence[float] = (0.0, 0.0, 0.0),
    ) -> "Volume":
        """Uniform volume with every voxel set to ``value``."""
        nx, ny, nz = (int(d) for d in dims)
        data = np.empty((nz, ny, nx, 4), dtype=np.uint8)
        data[...] = np.asarray(value, dtype=np.uint8)
        return cls(
            (nx, ny, nz),
            tuple(float(s) for s in spacing),
            tuple(float(o) for o in origin),
            data,
        )

    def copy(self) -> "Volume":
        return Volume(self.dims, self.spacing, self.origin, self.data.copy(), self.revision)

    @property
    def voxels(self) -> np.ndarray:
        """Flat (nx*ny*nz, 4) view of the voxels in x-fastest order."""
        return self.data.reshape(-1, 4)

    @property
    def alpha(self) -> np.ndarray:
        """(nz, ny, nx) view of the alpha channel."""
        return self.data[..., 3]

    def voxel_at(self, i: int, j: int, k: int) -> Voxel:
        r, g, b, a = self.data[k, j, i]
        return Voxel(int(r), int(g), int(b), int(a))

    def set_voxel(self, i: int, j: int, k: int, voxel: Sequence[int]) -> None:
        """Write one voxel; counts as a mutation and bumps ``revision``."""
        self.data[k, j, i] = np.asarray(voxel, dtype=np.uint8)
        self.revision += 1


def world_to_voxel(volume: Volume, p: Sequence[float]) -> np.ndarray:
    """World point (mm) -> continuous voxel coordinates (i, j, k)."""
    p = np.asarray(p, dtype=np.float64)
    return (p - np.asarray(volume.origin)) / np.asarray(volume.spacing)


def voxel_to_world(volume: Volume, u: Sequence[float]) -> np.ndarray:
    """Continuous voxel coordinates -> world point (mm); inverse of world_to_voxel."""
    u = np.asarray(u, dtype=np.float64)
    return u * np.asarray(volume.spacing) + np.asarray(volume.origin)


def sample_alpha(volume: Volume, p: Sequence[float]) -> float:
    """Trilinearly interpolated alpha in [0, 1] at world point ``p``.

    Interpolates a/255 over the 8 surrounding voxel centers. Points outside
    the voxel-center bounding box read as 0 (empty space).
    """
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    ox, oy, oz = volume.origin
    ux = (p[0] - ox) / sx
    uy = (p[1] - oy) / sy
    uz = (p[2] - oz) / sz
    if not (0.0 <= ux <= nx - 1 and 0.0 <= uy <= ny - 1 and 0.0 <= uz <= nz - 1):
        return 0.0
    i0 = 0 if nx == 1 else min(int(ux), nx - 2)
    j0 = 0 if ny == 1 else min(int(uy), ny - 2)
    k0 = 0 if nz == 1 else min(int(uz), nz - 2)
    i1 = min(i0 + 1, nx - 1)
    j1 = min(j0 + 1, ny - 1)
    k1 = min(k0 + 1, nz - 1)
    fx = ux - i0
    fy = uy - j0
    fz = uz - k0
    d = volume.data
    a000 = int(d[k0, j0, i0, 3])
    a100 = int(d[k0, j0, i1, 3])
    a010 = int(d[k0, j1, i0, 3])
    a110 = int(d[k0, j1, i1, 3])
    a001 = int(d[k1, j0, i0, 3])
    a101 = int(d[k1, j0, i1, 3])
    a011 = int(d[k1, j1, i0, 3])
    a111 = int(d[k1, j1, i1, 3])
    c00 = a000 + (a100 - a000) * fx
    c10 = a010 + (a110 - a010) * fx
    c01 = a001 + (a101 - a001) * fx
    c11 = a011 + (a111 - a011) * fx
    c0 = c00 + (c10 - c00) * fy
    c1 = c01 + (c11 - c01) * fy
    return (c0 + (c1 - c0) * fz) / 255.0


def ball_window(
    volume: Volume, center: Sequence[float], radius: float
) -> tuple[VoxelIndex, np.ndarray] | None:
    """Indices of voxels whose centers lie within ``radius`` mm of ``center``.

    Returns the window's low corner and a boolean (dz, dy, dx) mask over the
    window, or None when no voxel center can be in range. Distances are
    Euclidean in world space, so anisotropic spacing gives an ellipsoidal
    footprint in index space. The boundary is inclusive (<= radius).
    """
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    ox, oy, oz = volume.origin
    cx, cy, cz = (float(c) for c in center)
    # Conservative index bounds, padded one voxel against rounding.
    i0 = max(0, math.floor((cx - radius - ox) / sx) - 1)
    i1 = min(nx - 1, math.ceil((cx + radius - ox) / sx) + 1)
    j0 = max(0, math.floor((cy - radius - oy) / sy) - 1)
    j1 = min(ny - 1, math.ceil((cy + radius - oy) / sy) + 1)
    k0 = max(0, math.floor((cz - radius - oz) / sz) - 1)
    k1 = min(nz - 1, math.ceil((cz + radius - oz) / sz) + 1)
    if i0 > i1 or j0 > j1 or k0 > k1:
        return None
    dx = ox + np.arange(i0, i1 + 1) * sx - cx
    dy = oy + np.arange(j0, j1 + 1) * sy - cy
    dz = oz + np.arange(k0, k1 + 1) * sz - cz
    d2 = (
        dz[:, None, None] ** 2
        + dy[None, :, None] ** 2
        + dx[None, None, :] ** 2
    )
    mask = d2 <= radius * radius
    if not mask.any():
        return None
    return VoxelIndex(i0, j0, k0), mask


def _natural_key(path: Path) -> list:
    # "slice_2" sorts before "slice_10"
    return [int(tok) if tok.isdigit() else tok.lower() for tok in re.split(r"(\d+)", path.name)]


def import_stack(dir_path: str | Path, spacing: Sequence[float]) -> Volume:
    """Load a directory of PNG/TIFF slices into a Volume.

    Slices sort into z order by natural numeric filename ordering. 8-bit
    grayscale g maps to (g, g, g, g); 8-bit RGBA maps channel-wise. Any other
    mode, or a size mismatch between slices, is an error naming the file.
    """
    path = Path(dir_path)
    if not path.is_dir():
        raise StackError(f"not a directory: {path}")
    files = sorted(
        (f for f in path.iterdir() if f.suffix.lower() in _IMAGE_SUFFIXES),
        key=_natural_key,
    )
    if not files:
        raise StackError(f"no PNG/TIFF slice files in {path}")
    slices = []
    width = height = None
    for f in files:
        with Image.open(f) as img:
            if img.mode == "L":
                gray = np.asarray(img, dtype=np.uint8)
                rgba = np.repeat(gray[:, :, None], 4, axis=2)
            elif img.mode == "RGBA":
                rgba = np.asarray(img, dtype=np.uint8)
            else:
                raise StackError(
                    f"{f.name}: unsupported image mode {img.mode!r} "
                    "(need 8-bit grayscale or 8-bit RGBA)"
                )
        if width is None:
            height, width = rgba.shape[:2]
        elif rgba.shape[:2] != (height, width):
            raise StackError(
                f"{f.name}: slice is {rgba.shape[1]}x{rgba.shape[0]}, "
                f"expected {width}x{height}"
            )
        slices.append(np.ascontiguousarray(rgba))
    data = np.stack(slices)
    return Volume(
        dims=(width, height, len(files)),
        spacing=tuple(float(s) for s in spacing),
        origin=(0.0, 0.0, 0.0),
        data=data,
        revision=0,
    )


def export_stack(volume: Volume, dir_path: str | Path) -> int:
    """Write the volume as zero-padded RGBA PNG slices plus a meta.json sidecar.

    Re-importing the written stack yields a channel-for-channel identical
    volume. Returns the number of slices written.
    """
    out = Path(dir_path)
    out.mkdir(parents=True, exist_ok=True)
    nx, ny, nz = volume.dims
    for k in range(nz):
        Image.fromarray(volume.data[k], "RGBA").save(out / f"slice_{k:04d}.png")
    meta = {
        "dims": [nx, ny, nz],
        "spacing_mm": list(volume.spacing),
        "origin_mm": list(volume.origin),
    }
    (out / STACK_META_NAME).write_text(json.dumps(meta, indent=2) + "\n")
    return nz


def read_stack_meta(dir_path: str | Path) -> dict | None:
    """Parse a stack's meta.json sidecar if present."""
    meta_path = Path(dir_path) / STACK_META_NAME
    if not meta_path.is_file():
        return None
    return json.loads(meta_path.read_text())
