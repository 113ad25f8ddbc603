"""Deterministic fixed-order session loop: replay a trajectory, record forces, carve."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .haptics import (
    ForceSample,
    HapticConfig,
    ProbeState,
    ProxyState,
    haptic_tick,
    resolve_sample_radius,
)
from .sculpt import DirtyRegion, sculpt_step
from .volume import Volume

TRACE_HEADER = ["tick", "fx", "fy", "fz", "l_avg", "n_sampled", "out_fx", "out_fy", "out_fz"]


class TrajectoryError(ValueError):
    """A trajectory file violates the frame contract."""


@dataclass(frozen=True)
class TrajectoryFrame:
    tick: int
    device_pos: tuple[float, float, float]
    sculpt_pressed: bool


@dataclass(frozen=True)
class SessionConfig:
    haptic: HapticConfig = field(default_factory=HapticConfig)
    sculpt_enabled: bool = True
    probe_radius: float = 1.5  # mm

    def __post_init__(self) -> None:
        if self.probe_radius <= 0:
            raise ValueError(f"probe_radius must be > 0, got {self.probe_radius}")


@dataclass
class ForceTrace:
    """One ForceSample per executed tick, tick numbers contiguous from 0."""

    samples: list[ForceSample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def load_trajectory(path: str | Path) -> list[TrajectoryFrame]:
    """Parse a JSON-lines trajectory: {"tick":int,"pos":[x,y,z],"sculpt":bool} per line."""
    frames: list[TrajectoryFrame] = []
    prev_tick = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TrajectoryError(f"malformed frame at line {lineno}: {exc.msg}") from exc
            frame = _parse_frame(obj, lineno)
            if prev_tick is not None and frame.tick <= prev_tick:
                raise TrajectoryError(f"non-increasing tick at line {lineno}")
            prev_tick = frame.tick
            frames.append(frame)
    return frames


def _parse_frame(obj: object, lineno: int) -> TrajectoryFrame:
    if not isinstance(obj, dict):
        raise TrajectoryError(f"malformed frame at line {lineno}: expected an object")
    tick = obj.get("tick")
    pos = obj.get("pos")
    sculpt = obj.get("sculpt")
    if not isinstance(tick, int) or isinstance(tick, bool) or tick < 0:
        raise TrajectoryError(f"malformed frame at line {lineno}: bad tick {tick!r}")
    if (
        not isinstance(pos, list)
        or len(pos) != 3
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pos)
    ):
        raise TrajectoryError(f"malformed frame at line {lineno}: bad pos {pos!r}")
    if not isinstance(sculpt, bool):
        raise TrajectoryError(f"malformed frame at line {lineno}: bad sculpt {sculpt!r}")
    return TrajectoryFrame(tick, (float(pos[0]), float(pos[1]), float(pos[2])), sculpt)


def save_trajectory(frames: Sequence[TrajectoryFrame], path: str | Path) -> int:
    """Write frames in the JSONL schema load_trajectory reads; returns frame count."""
    with open(path, "w", encoding="utf-8") as fh:
        for f in frames:
            fh.write(
                json.dumps({"tick": f.tick, "pos": list(f.device_pos), "sculpt": f.sculpt_pressed})
                + "\n"
            )
    return len(frames)


def run_session(
    volume: Volume, frames: Sequence[TrajectoryFrame], cfg: SessionConfig
) -> tuple[ForceTrace, Volume, list[DirtyRegion]]:
    """Replay a trajectory tick by tick over a private copy of the volume.

    Each tick runs the haptic pipeline against the volume state at tick start,
    then applies the sculpt step, so a carve is first felt on the next tick.
    Ticks missing from the trajectory hold the previous frame's position and
    button state; ticks before the first frame hold its position, button up.
    """
    vol = volume.copy()
    trace = ForceTrace()
    regions: list[DirtyRegion] = []
    if not frames:
        return trace, vol, regions
    haptic_cfg = resolve_sample_radius(cfg.haptic, cfg.probe_radius)
    pos = np.asarray(frames[0].device_pos, dtype=np.float64)
    sculpt_pressed = False
    proxy = ProxyState(pos.copy(), in_contact=False)
    prev: ForceSample | None = None
    next_frame = 0
    for tick in range(frames[-1].tick + 1):
        if next_frame < len(frames) and frames[next_frame].tick == tick:
            frame = frames[next_frame]
            pos = np.asarray(frame.device_pos, dtype=np.float64)
            sculpt_pressed = frame.sculpt_pressed
            next_frame += 1
        probe = ProbeState(pos, cfg.probe_radius, sculpt_pressed)
        sample, proxy = haptic_tick(probe, proxy, vol, prev, haptic_cfg, tick)
        report = sculpt_step(vol, probe, cfg.sculpt_enabled)
        if report.region is not None:
            regions.append(report.region)
        trace.samples.append(sample)
        prev = sample
    return trace, vol, regions


def _fmt(x: float) -> str:
    return format(float(x), ".9e")


def write_trace(trace: ForceTrace, path: str | Path) -> int:
    """Write the trace as CSV (schema in TRACE_HEADER); returns the row count."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for s in trace:
            writer.writerow(
                [
                    s.tick,
                    _fmt(s.raw_f[0]),
                    _fmt(s.raw_f[1]),
                    _fmt(s.raw_f[2]),
                    _fmt(s.l_avg),
                    s.n_sampled,
                    _fmt(s.output_f[0]),
                    _fmt(s.output_f[1]),
                    _fmt(s.output_f[2]),
                ]
            )
    return len(trace)


def read_trace(path: str | Path) -> list[dict]:
    """Parse a trace CSV back into dict rows with float fields."""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {reader.fieldnames}")
        for row in reader:
            rows.append(
                {
                    "tick": int(row["tick"]),
                    "fx": float(row["fx"]),
                    "fy": float(row["fy"]),
                    "fz": float(row["fz"]),
                    "l_avg": float(row["l_avg"]),
                    "n_sampled": int(row["n_sampled"]),
                    "out_fx": float(row["out_fx"]),
                    "out_fy": float(row["out_fy"]),
                    "out_fz": float(row["out_fz"]),
                }
            )
    return rows
