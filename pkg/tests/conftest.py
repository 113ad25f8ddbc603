"""Shared fixtures and independent brute-force oracles for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from voxelhaptics import HapticConfig, Volume


def brute_luminosity(volume: Volume, center, radius: float, cfg: HapticConfig):
    """Weighted-luminosity average by full-grid enumeration (no windowing)."""
    nx, ny, nz = volume.dims
    kk, jj, ii = np.mgrid[0:nz, 0:ny, 0:nx]
    wx = volume.origin[0] + ii * volume.spacing[0]
    wy = volume.origin[1] + jj * volume.spacing[1]
    wz = volume.origin[2] + kk * volume.spacing[2]
    d2 = (wx - center[0]) ** 2 + (wy - center[1]) ** 2 + (wz - center[2]) ** 2
    mask = d2 <= radius * radius
    n = int(mask.sum())
    if n == 0:
        return 0.0, 0
    rgba = volume.data.astype(np.float64) / 255.0
    term = (
        cfg.w_r * rgba[..., 0] + cfg.w_g * rgba[..., 1] + cfg.w_b * rgba[..., 2]
    ) * rgba[..., 3]
    return float(term[mask].sum() / n), n


def slow_luminosity(volume: Volume, center, radius: float, cfg: HapticConfig):
    """Pure-Python voxel loop; use only on small volumes."""
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    ox, oy, oz = volume.origin
    total = 0.0
    n = 0
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                dx = ox + i * sx - center[0]
                dy = oy + j * sy - center[1]
                dz = oz + k * sz - center[2]
                if math.sqrt(dx * dx + dy * dy + dz * dz) <= radius:
                    r, g, b, a = volume.voxel_at(i, j, k)
                    total += (cfg.w_r * r / 255 + cfg.w_g * g / 255 + cfg.w_b * b / 255) * (
                        a / 255
                    )
                    n += 1
    return (total / n if n else 0.0), n


def ball_mask_full(volume: Volume, center, radius: float) -> np.ndarray:
    """(nz, ny, nx) bool mask of voxel centers within radius (world mm) of center."""
    nx, ny, nz = volume.dims
    kk, jj, ii = np.mgrid[0:nz, 0:ny, 0:nx]
    wx = volume.origin[0] + ii * volume.spacing[0]
    wy = volume.origin[1] + jj * volume.spacing[1]
    wz = volume.origin[2] + kk * volume.spacing[2]
    d2 = (wx - center[0]) ** 2 + (wy - center[1]) ** 2 + (wz - center[2]) ** 2
    return d2 <= radius * radius


def swept_ball_mask(volume: Volume, centers, radius: float) -> np.ndarray:
    union = np.zeros(volume.alpha.shape, dtype=bool)
    for c in centers:
        union |= ball_mask_full(volume, c, radius)
    return union


def random_volume(rng: np.random.Generator, max_dim: int = 8) -> Volume:
    dims = tuple(int(d) for d in rng.integers(1, max_dim + 1, size=3))
    nx, ny, nz = dims
    data = rng.integers(0, 256, size=(nz, ny, nx, 4), dtype=np.uint8)
    return Volume(dims, (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), data)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
