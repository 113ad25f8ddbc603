"""Subtractive carving: zero RGBA under the probe sphere, tracking dirty regions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .haptics import ProbeState
from .volume import Volume, VoxelIndex, ball_window


@dataclass(frozen=True)
class DirtyRegion:
    """Inclusive voxel AABB covering every voxel modified by one edit."""

    lo: VoxelIndex
    hi: VoxelIndex
    revision_after: int


@dataclass(frozen=True)
class CarveReport:
    zeroed_count: int
    region: DirtyRegion | None

    def __post_init__(self) -> None:
        if (self.zeroed_count == 0) != (self.region is None):
            raise ValueError("zeroed_count and region presence must agree")


_NOOP = CarveReport(0, None)


def carve(volume: Volume, center: Sequence[float], radius: float) -> CarveReport:
    """Zero all channels of voxels whose centers lie within ``radius`` mm of ``center``.

    Already-zero voxels do not count; a carve that changes nothing leaves the
    revision untouched. The reported region is the tight AABB of the voxels
    actually modified.
    """
    window = ball_window(volume, center, radius)
    if window is None:
        return _NOOP
    lo, mask = window
    block = volume.data[
        lo.k : lo.k + mask.shape[0],
        lo.j : lo.j + mask.shape[1],
        lo.i : lo.i + mask.shape[2],
    ]
    hit = mask & block.any(axis=3)
    count = int(hit.sum())
    if count == 0:
        return _NOOP
    ks, js, is_ = np.nonzero(hit)
    block[hit] = 0
    volume.revision += 1
    region = DirtyRegion(
        lo=VoxelIndex(lo.i + int(is_.min()), lo.j + int(js.min()), lo.k + int(ks.min())),
        hi=VoxelIndex(lo.i + int(is_.max()), lo.j + int(js.max()), lo.k + int(ks.max())),
        revision_after=volume.revision,
    )
    return CarveReport(count, region)


def sculpt_step(volume: Volume, probe: ProbeState, enabled: bool) -> CarveReport:
    """Carve at the device position iff sculpting is toggled on and the button is held."""
    if not (enabled and probe.sculpt_pressed):
        return _NOOP
    return carve(volume, probe.device_pos, probe.radius)
