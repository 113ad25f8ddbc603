/** Wire protocol: typed messages exchanged with the session service over a WebSocket. */

export type Axis = "x" | "y" | "z";
export type Vec3 = [number, number, number];

export interface Toggles {
  haptics: boolean;
  smoothing: boolean;
  sculpt: boolean;
}

export interface StatusMessage {
  type: "status";
  volume_loaded: boolean;
  dims: Vec3 | null;
  spacing_mm: Vec3 | null;
  origin_mm: Vec3 | null;
  revision: number;
  toggles: Toggles;
  f_max: number;
  dropped_frames: number;
  transient_message: string | null;
}

export interface ForceMessage {
  type: "force";
  tick: number;
  out_f: Vec3;
  l_avg: number;
  in_contact: boolean;
}

export interface SliceMessage {
  type: "slice";
  axis: Axis;
  index: number;
  png_base64: string;
}

export interface DoneMessage {
  type: "done";
  op: string;
  path: string;
}

export interface ErrorMessage {
  type: "error";
  reason: string;
}

export type ServerMessage =
  | StatusMessage
  | ForceMessage
  | SliceMessage
  | DoneMessage
  | ErrorMessage;

const SERVER_TYPES = new Set(["status", "force", "slice", "done", "error"]);

function isVec3(v: unknown): v is Vec3 {
  return Array.isArray(v) && v.length === 3 && v.every((c) => typeof c === "number");
}

/** Decode one server frame; returns null for frames this client does not understand. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) return null;
  switch (msg.type) {
    case "status":
      if (typeof msg.volume_loaded !== "boolean") return null;
      if (msg.dims !== null && !isVec3(msg.dims)) return null;
      if (typeof msg.revision !== "number") return null;
      return msg as unknown as StatusMessage;
    case "force":
      if (!isVec3(msg.out_f) || typeof msg.l_avg !== "number") return null;
      return msg as unknown as ForceMessage;
    case "slice":
      if (typeof msg.png_base64 !== "string" || typeof msg.index !== "number") return null;
      return msg as unknown as SliceMessage;
    case "done":
      return msg as unknown as DoneMessage;
    case "error":
      if (typeof msg.reason !== "string") return null;
      return msg as unknown as ErrorMessage;
  }
  return null;
}

// -- client -> server builders; field names are the wire contract

export function loadVolumeMessage(path: string, spacingMm: Vec3) {
  return { type: "load_volume", path, spacing_mm: spacingMm };
}

export function probeMessage(posMm: Vec3, sculpt: boolean) {
  return { type: "probe", pos_mm: posMm, sculpt };
}

export interface ConfigPatch {
  stiffness_k?: number;
  iso?: number;
  sample_radius?: number | null;
  haptics_enabled?: boolean;
  smoothing_enabled?: boolean;
  f_max?: number;
  sculpt_enabled?: boolean;
  probe_radius_mm?: number;
}

export function setConfigMessage(patch: ConfigPatch) {
  return { type: "set_config", ...patch };
}

export function getSliceMessage(axis: Axis, index: number) {
  return { type: "get_slice", axis, index };
}

export function exportVolumeMessage(path: string) {
  return { type: "export_volume", path };
}

export function exportMeshMessage(path: string, isovalue: number) {
  return { type: "export_mesh", path, isovalue };
}

export function subscribeForcesMessage(decimation: number) {
  return { type: "subscribe_forces", decimation };
}

export function encodeMessage(msg: object): string {
  return JSON.stringify(msg);
}
