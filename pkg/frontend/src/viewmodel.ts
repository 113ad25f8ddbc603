/** Pure view logic: viewport state, pointer->world mapping, labels and gauges.
 *
 * Everything here is a plain function over immutable state so the DOM layer
 * stays a thin shell and the behavior is unit-testable without a browser.
 */

import type {
  Axis,
  DoneMessage,
  ForceMessage,
  ServerMessage,
  StatusMessage,
  Vec3,
} from "./protocol.js";

export interface ViewportState {
  axis: Axis;
  index: number;
}

export interface ViewState {
  connected: boolean;
  status: StatusMessage | null;
  force: ForceMessage | null;
  lastDone: DoneMessage | null;
  lastError: string | null;
  viewports: ViewportState[];
  /** Exactly one viewport holds pointer focus. */
  focused: number;
}

/** Default toggle values; labels turn red when the user moves them off these. */
export const TOGGLE_DEFAULTS = { haptics: true, smoothing: true, sculpt: true } as const;

export type ToggleKey = keyof typeof TOGGLE_DEFAULTS;

/** Keyboard shortcut per toggle; every toggle has one. */
export const TOGGLE_SHORTCUTS: Record<string, ToggleKey> = {
  h: "haptics",
  s: "smoothing",
  c: "sculpt",
};

export function initialState(): ViewState {
  return {
    connected: false,
    status: null,
    force: null,
    lastDone: null,
    lastError: null,
    viewports: [
      { axis: "x", index: 0 },
      { axis: "y", index: 0 },
      { axis: "z", index: 0 },
    ],
    focused: 2,
  };
}

export function axisSize(dims: Vec3, axis: Axis): number {
  return axis === "x" ? dims[0] : axis === "y" ? dims[1] : dims[2];
}

/** Columns/rows of the slice image the service sends for a given axis. */
export function sliceShape(dims: Vec3, axis: Axis): { cols: number; rows: number } {
  if (axis === "z") return { cols: dims[0], rows: dims[1] };
  if (axis === "y") return { cols: dims[0], rows: dims[2] };
  return { cols: dims[1], rows: dims[2] };
}

function clampIndex(index: number, size: number): number {
  return Math.min(Math.max(index, 0), size - 1);
}

/** Fold one server message into the state; pure, returns a new state. */
export function applyServerMessage(state: ViewState, msg: ServerMessage): ViewState {
  switch (msg.type) {
    case "status": {
      const viewports = state.viewports.map((vp) => {
        if (!msg.dims) return { ...vp, index: 0 };
        return { ...vp, index: clampIndex(vp.index, axisSize(msg.dims, vp.axis)) };
      });
      return { ...state, status: msg, viewports };
    }
    case "force":
      return { ...state, force: msg };
    case "done":
      return { ...state, lastDone: msg };
    case "error":
      return { ...state, lastError: msg.reason };
    case "slice":
      return state; // pixel payloads are consumed by the canvas layer directly
  }
}

export function setConnected(state: ViewState, connected: boolean): ViewState {
  return connected ? { ...state, connected } : { ...state, connected, force: null };
}

export function focusViewport(state: ViewState, viewport: number): ViewState {
  if (viewport < 0 || viewport >= state.viewports.length) return state;
  return { ...state, focused: viewport };
}

/** Scroll-wheel depth: one step moves the viewport's slice index by one voxel. */
export function stepDepth(state: ViewState, viewport: number, steps: number): ViewState {
  const dims = state.status?.dims;
  if (!dims) return state;
  const viewports = state.viewports.map((vp, i) => {
    if (i !== viewport) return vp;
    return { ...vp, index: clampIndex(vp.index + steps, axisSize(dims, vp.axis)) };
  });
  return { ...state, viewports };
}

/** Continuous slice-pixel coordinate of a pointer event; pixel centers sit at integers. */
export function pixelFromOffset(
  offsetX: number,
  offsetY: number,
  clientWidth: number,
  clientHeight: number,
  cols: number,
  rows: number,
): { col: number; row: number } {
  return {
    col: (offsetX / clientWidth) * cols - 0.5,
    row: (offsetY / clientHeight) * rows - 0.5,
  };
}

/** World position (mm) of a slice pixel; the viewport's index supplies depth. */
export function pixelToWorld(
  status: StatusMessage,
  viewport: ViewportState,
  col: number,
  row: number,
): Vec3 {
  const spacing = status.spacing_mm ?? [1, 1, 1];
  const origin = status.origin_mm ?? [0, 0, 0];
  let voxel: Vec3;
  if (viewport.axis === "z") voxel = [col, row, viewport.index];
  else if (viewport.axis === "y") voxel = [col, viewport.index, row];
  else voxel = [viewport.index, col, row];
  return [
    origin[0] + voxel[0] * spacing[0],
    origin[1] + voxel[1] * spacing[1],
    origin[2] + voxel[2] * spacing[2],
  ];
}

/** Probe message for a pointer position, or null when input must be ignored. */
export function probeFromPointer(
  state: ViewState,
  viewport: number,
  col: number,
  row: number,
  sculptHeld: boolean,
): { type: "probe"; pos_mm: Vec3; sculpt: boolean } | null {
  if (!state.connected || !state.status?.volume_loaded || !state.status.dims) return null;
  const vp = state.viewports[viewport];
  if (!vp) return null;
  const pos = pixelToWorld(state.status, vp, col, row);
  return { type: "probe", pos_mm: pos, sculpt: sculptHeld };
}

export interface ToggleLabel {
  key: ToggleKey;
  text: string;
  color: "white" | "red";
  value: boolean;
}

/** Menu labels: show on/off, white in the default state, red once user-toggled. */
export function toggleLabels(status: StatusMessage | null): ToggleLabel[] {
  const names: Record<ToggleKey, string> = {
    haptics: "Haptics",
    smoothing: "Smoothing",
    sculpt: "Sculpt",
  };
  return (Object.keys(TOGGLE_DEFAULTS) as ToggleKey[]).map((key) => {
    const value = status ? status.toggles[key] : TOGGLE_DEFAULTS[key];
    return {
      key,
      value,
      text: `${names[key]} (${value ? "on" : "off"})`,
      color: value === TOGGLE_DEFAULTS[key] ? "white" : "red",
    };
  });
}

/** Bottom-center status bar: transient messages win, then static off-state notes. */
export function statusBarText(state: ViewState): string {
  if (!state.connected) return "Disconnected";
  const status = state.status;
  if (!status) return "Connecting...";
  if (status.transient_message) return status.transient_message;
  const offNotes = toggleLabels(status)
    .filter((l) => !l.value)
    .map((l) => l.text);
  if (offNotes.length > 0) return offNotes.join("  ");
  if (!status.volume_loaded || !status.dims) return "No volume loaded";
  const [nx, ny, nz] = status.dims;
  return `Ready (${nx}x${ny}x${nz})`;
}

export interface GaugeModel {
  forceNewtons: number;
  forceRatio: number; // |out_f| / f_max, clamped to [0, 1]
  lAvg: number;
  inContact: boolean;
}

export function gaugeModel(state: ViewState): GaugeModel {
  const force = state.force;
  const fMax = state.status?.f_max ?? 7.0;
  if (!force) return { forceNewtons: 0, forceRatio: 0, lAvg: 0, inContact: false };
  const norm = Math.hypot(force.out_f[0], force.out_f[1], force.out_f[2]);
  return {
    forceNewtons: norm,
    forceRatio: Math.min(norm / fMax, 1),
    lAvg: Math.min(Math.max(force.l_avg, 0), 1),
    inContact: force.in_contact,
  };
}
