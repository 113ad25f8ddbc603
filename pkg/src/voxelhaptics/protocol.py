"""Wire protocol: JSON text messages exchanged with UI clients over a WebSocket."""

from __future__ import annotations

import json
from typing import Any

CLIENT_TYPES = (
    "load_volume",
    "probe",
    "set_config",
    "get_slice",
    "export_volume",
    "export_mesh",
    "subscribe_forces",
)
SERVER_TYPES = ("status", "force", "slice", "done", "error")

# Types a read-only client may not send.
MUTATING_TYPES = frozenset(
    {"load_volume", "probe", "set_config", "export_volume", "export_mesh"}
)

SET_CONFIG_HAPTIC_FIELDS = (
    "stiffness_k",
    "iso",
    "sample_radius",
    "w_r",
    "w_g",
    "w_b",
    "haptics_enabled",
    "smoothing_enabled",
    "f_max",
    "tick_rate",
)
SET_CONFIG_SESSION_FIELDS = ("sculpt_enabled", "probe_radius_mm")

AXES = ("x", "y", "z")


class ProtocolError(ValueError):
    """A message violates the wire schema; maps to an error{reason} reply."""


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _require_vec3(msg: dict, key: str) -> list[float]:
    v = msg.get(key)
    if not isinstance(v, list) or len(v) != 3 or not all(_is_number(c) for c in v):
        raise ProtocolError(f"{msg['type']}: {key} must be a list of 3 numbers")
    return [float(c) for c in v]


def parse_message(text: str | bytes) -> dict:
    """Decode and validate one client message; raises ProtocolError on any defect."""
    try:
        msg = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"invalid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    return validate_message(msg)


def validate_message(msg: dict) -> dict:
    """Validate an already-decoded client message dict against the schema."""
    mtype = msg.get("type")
    if mtype not in CLIENT_TYPES:
        raise ProtocolError(f"unknown message type: {mtype!r}")
    _VALIDATORS[mtype](msg)
    return msg


def encode_message(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"))


def _validate_load_volume(msg: dict) -> None:
    if not isinstance(msg.get("path"), str) or not msg["path"]:
        raise ProtocolError("load_volume: path must be a non-empty string")
    _require_vec3(msg, "spacing_mm")


def _validate_probe(msg: dict) -> None:
    _require_vec3(msg, "pos_mm")
    if not isinstance(msg.get("sculpt"), bool):
        raise ProtocolError("probe: sculpt must be a bool")


def _validate_set_config(msg: dict) -> None:
    known = set(SET_CONFIG_HAPTIC_FIELDS) | set(SET_CONFIG_SESSION_FIELDS)
    fields = [k for k in msg if k != "type"]
    if not fields:
        raise ProtocolError("set_config: no fields given")
    for k in fields:
        if k not in known:
            raise ProtocolError(f"set_config: unknown field {k!r}")
        v = msg[k]
        if k in ("haptics_enabled", "smoothing_enabled", "sculpt_enabled"):
            if not isinstance(v, bool):
                raise ProtocolError(f"set_config: {k} must be a bool")
        elif k == "tick_rate":
            if not isinstance(v, int) or isinstance(v, bool):
                raise ProtocolError("set_config: tick_rate must be an int")
        elif k == "sample_radius":
            if v is not None and not _is_number(v):
                raise ProtocolError("set_config: sample_radius must be a number or null")
        elif not _is_number(v):
            raise ProtocolError(f"set_config: {k} must be a number")


def _validate_get_slice(msg: dict) -> None:
    if msg.get("axis") not in AXES:
        raise ProtocolError("get_slice: axis must be one of 'x', 'y', 'z'")
    idx = msg.get("index")
    if not isinstance(idx, int) or isinstance(idx, bool):
        raise ProtocolError("get_slice: index must be an int")


def _validate_export_volume(msg: dict) -> None:
    if not isinstance(msg.get("path"), str) or not msg["path"]:
        raise ProtocolError("export_volume: path must be a non-empty string")


def _validate_export_mesh(msg: dict) -> None:
    if not isinstance(msg.get("path"), str) or not msg["path"]:
        raise ProtocolError("export_mesh: path must be a non-empty string")
    iso = msg.get("isovalue")
    if not _is_number(iso) or not 0.0 < float(iso) < 1.0:
        raise ProtocolError("export_mesh: isovalue must be a number in (0, 1)")


def _validate_subscribe_forces(msg: dict) -> None:
    dec = msg.get("decimation", 16)
    if not isinstance(dec, int) or isinstance(dec, bool) or dec < 1:
        raise ProtocolError("subscribe_forces: decimation must be an int >= 1")


_VALIDATORS = {
    "load_volume": _validate_load_volume,
    "probe": _validate_probe,
    "set_config": _validate_set_config,
    "get_slice": _validate_get_slice,
    "export_volume": _validate_export_volume,
    "export_mesh": _validate_export_mesh,
    "subscribe_forces": _validate_subscribe_forces,
}
