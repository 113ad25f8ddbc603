"""Session service: the single-writer engine facade behind the wire protocol.

One SessionService owns one volume and one live haptic session. All state
changes flow through handle_message, which never raises for client-caused
problems: protocol or engine errors come back as error{reason} messages.
"""

from __future__ import annotations

import base64
import io
from dataclasses import replace

import numpy as np
from PIL import Image

from .haptics import ForceSample, HapticConfig, ProbeState, ProxyState, haptic_tick, resolve_sample_radius
from .mesh import export_stl, polygonize
from .protocol import (
    SET_CONFIG_HAPTIC_FIELDS,
    ProtocolError,
    parse_message,
    validate_message,
)
from .sculpt import sculpt_step
from .session import ForceTrace, SessionConfig
from .volume import Volume, export_stack, import_stack

DEFAULT_FORCE_DECIMATION = 16

EXPORT_VOLUME_MESSAGE = "Exporting Volume..."
EXPORT_MESH_MESSAGE = "Exporting Model..."


class SessionService:
    def __init__(self, config: SessionConfig | None = None, volume: Volume | None = None):
        self.config = config if config is not None else SessionConfig()
        self.volume = volume
        self.proxy: ProxyState | None = None
        self.prev_sample: ForceSample | None = None
        self.tick = 0
        self.trace = ForceTrace()
        self.force_decimation: int | None = None
        self.dropped_frames = 0

    # -- state snapshots

    def status_message(self, transient: str | None = None) -> dict:
        vol = self.volume
        return {
            "type": "status",
            "volume_loaded": vol is not None,
            "dims": list(vol.dims) if vol is not None else None,
            "spacing_mm": list(vol.spacing) if vol is not None else None,
            "origin_mm": list(vol.origin) if vol is not None else None,
            "revision": vol.revision if vol is not None else 0,
            "toggles": {
                "haptics": self.config.haptic.haptics_enabled,
                "smoothing": self.config.haptic.smoothing_enabled,
                "sculpt": self.config.sculpt_enabled,
            },
            "f_max": self.config.haptic.f_max,
            "dropped_frames": self.dropped_frames,
            "transient_message": transient,
        }

    def snapshot_volume(self) -> Volume:
        if self.volume is None:
            raise ProtocolError("no volume loaded")
        return self.volume.copy()

    def _reset_session(self) -> None:
        self.proxy = None
        self.prev_sample = None
        self.tick = 0
        self.trace = ForceTrace()

    # -- message handling

    def handle_message(self, msg: dict | str | bytes) -> list[dict]:
        """Process one client message; returns reply/broadcast messages in order."""
        try:
            if not isinstance(msg, dict):
                msg = parse_message(msg)
            else:
                msg = validate_message(msg)
            handler = getattr(self, f"_on_{msg['type']}")
            return handler(msg)
        except (ProtocolError, ValueError, OSError) as exc:
            return [{"type": "error", "reason": str(exc)}]

    def _on_load_volume(self, msg: dict) -> list[dict]:
        self.volume = import_stack(msg["path"], msg["spacing_mm"])
        self._reset_session()
        return [self.status_message()]

    def _on_probe(self, msg: dict) -> list[dict]:
        if self.volume is None:
            raise ProtocolError("no volume loaded")
        probe = ProbeState(
            device_pos=np.asarray(msg["pos_mm"], dtype=np.float64),
            radius=self.config.probe_radius,
            sculpt_pressed=msg["sculpt"],
        )
        if self.proxy is None:
            self.proxy = ProxyState(probe.device_pos.copy(), in_contact=False)
        cfg = resolve_sample_radius(self.config.haptic, self.config.probe_radius)
        sample, self.proxy = haptic_tick(
            probe, self.proxy, self.volume, self.prev_sample, cfg, self.tick
        )
        sculpt_step(self.volume, probe, self.config.sculpt_enabled)
        self.trace.samples.append(sample)
        self.prev_sample = sample
        self.tick += 1
        out: list[dict] = []
        if self.force_decimation is not None and sample.tick % self.force_decimation == 0:
            out.append(self._force_message(sample))
        return out

    def _force_message(self, sample: ForceSample) -> dict:
        return {
            "type": "force",
            "tick": sample.tick,
            "out_f": [float(c) for c in sample.output_f],
            "l_avg": float(sample.l_avg),
            "in_contact": bool(self.proxy.in_contact) if self.proxy is not None else False,
        }

    def _on_set_config(self, msg: dict) -> list[dict]:
        haptic_updates = {k: msg[k] for k in SET_CONFIG_HAPTIC_FIELDS if k in msg}
        new_haptic = replace(self.config.haptic, **haptic_updates) if haptic_updates else self.config.haptic
        session_updates = {}
        if "sculpt_enabled" in msg:
            session_updates["sculpt_enabled"] = msg["sculpt_enabled"]
        if "probe_radius_mm" in msg:
            session_updates["probe_radius"] = float(msg["probe_radius_mm"])
        self.config = replace(self.config, haptic=new_haptic, **session_updates)
        return [self.status_message()]

    def _on_get_slice(self, msg: dict) -> list[dict]:
        if self.volume is None:
            raise ProtocolError("no volume loaded")
        axis, index = msg["axis"], msg["index"]
        nx, ny, nz = self.volume.dims
        limits = {"x": nx, "y": ny, "z": nz}
        if not 0 <= index < limits[axis]:
            raise ProtocolError(
                f"get_slice: index {index} out of range for axis {axis} (size {limits[axis]})"
            )
        if axis == "z":
            pixels = self.volume.data[index]
        elif axis == "y":
            pixels = self.volume.data[:, index, :, :]
        else:
            pixels = self.volume.data[:, :, index, :]
        buf = io.BytesIO()
        Image.fromarray(np.ascontiguousarray(pixels), "RGBA").save(buf, format="PNG")
        return [
            {
                "type": "slice",
                "axis": axis,
                "index": index,
                "png_base64": base64.b64encode(buf.getvalue()).decode("ascii"),
            }
        ]

    def _on_export_volume(self, msg: dict) -> list[dict]:
        snapshot = self.snapshot_volume()
        transient = self.status_message(transient=EXPORT_VOLUME_MESSAGE)
        export_stack(snapshot, msg["path"])
        return [
            transient,
            {"type": "done", "op": "export_volume", "path": msg["path"]},
            self.status_message(),
        ]

    def _on_export_mesh(self, msg: dict) -> list[dict]:
        snapshot = self.snapshot_volume()
        transient = self.status_message(transient=EXPORT_MESH_MESSAGE)
        mesh = polygonize(snapshot, float(msg["isovalue"]))
        export_stl(mesh, msg["path"])
        return [
            transient,
            {"type": "done", "op": "export_mesh", "path": msg["path"]},
            self.status_message(),
        ]

    def _on_subscribe_forces(self, msg: dict) -> list[dict]:
        self.force_decimation = int(msg.get("decimation", DEFAULT_FORCE_DECIMATION))
        return [self.status_message()]

    # -- snapshot-based export helpers for the socket server's side threads

    def export_volume_to(self, snapshot: Volume, path: str) -> dict:
        export_stack(snapshot, path)
        return {"type": "done", "op": "export_volume", "path": path}

    def export_mesh_to(self, snapshot: Volume, path: str, isovalue: float) -> dict:
        export_stl(polygonize(snapshot, isovalue), path)
        return {"type": "done", "op": "export_mesh", "path": path}
