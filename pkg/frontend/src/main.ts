/** DOM shell: wires the WebSocket, canvases, gauges and controls to the viewmodel. */

import {
  encodeMessage,
  getSliceMessage,
  loadVolumeMessage,
  parseServerMessage,
  probeMessage,
  setConfigMessage,
  exportMeshMessage,
  exportVolumeMessage,
  subscribeForcesMessage,
  type Axis,
  type ServerMessage,
  type Vec3,
} from "./protocol.js";
import {
  applyServerMessage,
  focusViewport,
  gaugeModel,
  initialState,
  pixelFromOffset,
  probeFromPointer,
  setConnected,
  sliceShape,
  statusBarText,
  stepDepth,
  toggleLabels,
  TOGGLE_SHORTCUTS,
  type ViewState,
} from "./viewmodel.js";

const FORCE_DECIMATION = 16;
const SCULPT_REFRESH_MS = 150;

let state: ViewState = initialState();
let ws: WebSocket | null = null;
let sculptHeld = false;
let probePending: { viewport: number; col: number; row: number } | null = null;
let lastRevision = -1;

const $ = (id: string) => document.getElementById(id)!;
const canvases = [0, 1, 2].map((i) => $(`view-${i}`) as HTMLCanvasElement);
const viewLabels = [0, 1, 2].map((i) => $(`view-label-${i}`));

function send(msg: object): void {
  if (ws && ws.readyState === WebSocket.OPEN) ws.send(encodeMessage(msg));
}

function update(next: ViewState): void {
  state = next;
  render();
}

function requestSlice(viewport: number): void {
  const vp = state.viewports[viewport];
  if (state.status?.volume_loaded) send(getSliceMessage(vp.axis, vp.index));
}

function requestAllSlices(): void {
  for (let i = 0; i < 3; i++) requestSlice(i);
}

function drawSlice(axis: Axis, index: number, pngBase64: string): void {
  const viewport = state.viewports.findIndex((vp) => vp.axis === axis && vp.index === index);
  if (viewport < 0 || !state.status?.dims) return;
  const { cols, rows } = sliceShape(state.status.dims, axis);
  const canvas = canvases[viewport];
  canvas.width = cols;
  canvas.height = rows;
  const img = new Image();
  img.onload = () => {
    const ctx = canvas.getContext("2d")!;
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, cols, rows);
    ctx.drawImage(img, 0, 0);
  };
  img.src = `data:image/png;base64,${pngBase64}`;
}

function onServerMessage(msg: ServerMessage): void {
  const prevStatus = state.status;
  update(applyServerMessage(state, msg));
  if (msg.type === "slice") drawSlice(msg.axis, msg.index, msg.png_base64);
  if (msg.type === "status") {
    const statusChanged =
      !prevStatus ||
      prevStatus.revision !== msg.revision ||
      JSON.stringify(prevStatus.dims) !== JSON.stringify(msg.dims);
    if (msg.volume_loaded && statusChanged && msg.revision !== lastRevision) {
      lastRevision = msg.revision;
      requestAllSlices();
    }
  }
  if (msg.type === "error") console.warn("server error:", msg.reason);
}

function connect(): void {
  const params = new URLSearchParams(location.search);
  const url =
    params.get("server") ?? `ws://${location.hostname || "127.0.0.1"}:${params.get("port") ?? "8765"}`;
  ws = new WebSocket(url);
  ws.onopen = () => {
    update(setConnected(state, true));
    send(subscribeForcesMessage(FORCE_DECIMATION));
  };
  ws.onclose = () => {
    update(setConnected(state, false));
    setTimeout(connect, 1500);
  };
  ws.onmessage = (ev) => {
    const msg = parseServerMessage(String(ev.data));
    if (msg) onServerMessage(msg);
  };
}

// -- pointer probe at display rate

function flushProbe(): void {
  if (probePending) {
    const { viewport, col, row } = probePending;
    probePending = null;
    const msg = probeFromPointer(state, viewport, col, row, sculptHeld);
    if (msg) send(probeMessage(msg.pos_mm as Vec3, msg.sculpt));
  }
  requestAnimationFrame(flushProbe);
}

function bindViewport(viewport: number): void {
  const canvas = canvases[viewport];
  canvas.addEventListener("pointermove", (ev) => {
    if (!state.status?.dims) return;
    const vp = state.viewports[viewport];
    const { cols, rows } = sliceShape(state.status.dims, vp.axis);
    const { col, row } = pixelFromOffset(
      ev.offsetX,
      ev.offsetY,
      canvas.clientWidth,
      canvas.clientHeight,
      cols,
      rows,
    );
    probePending = { viewport, col, row };
  });
  canvas.addEventListener("pointerenter", () => update(focusViewport(state, viewport)));
  canvas.addEventListener("pointerdown", (ev) => {
    if (ev.button === 0) {
      sculptHeld = true;
      canvas.setPointerCapture(ev.pointerId);
    }
  });
  canvas.addEventListener("pointerup", () => {
    sculptHeld = false;
    requestSlice(viewport);
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const steps = ev.deltaY > 0 ? 1 : -1;
    update(stepDepth(state, viewport, steps));
    requestSlice(viewport);
  });
}

// While the sculpt button is held the probed slice refreshes so holes appear live.
setInterval(() => {
  if (sculptHeld) requestSlice(state.focused);
}, SCULPT_REFRESH_MS);

// -- controls

function bindControls(): void {
  for (const label of toggleLabels(null)) {
    $(`toggle-${label.key}`).addEventListener("click", () => sendToggle(label.key));
  }
  document.addEventListener("keydown", (ev) => {
    const key = TOGGLE_SHORTCUTS[ev.key.toLowerCase()];
    if (key && !(ev.target instanceof HTMLInputElement)) sendToggle(key);
  });
  $("load-btn").addEventListener("click", () => {
    const path = ($("load-path") as HTMLInputElement).value.trim();
    const spacing = (($("load-spacing") as HTMLInputElement).value.trim() || "1,1,1")
      .split(",")
      .map(Number) as Vec3;
    if (path) send(loadVolumeMessage(path, spacing));
  });
  $("export-volume-btn").addEventListener("click", () => {
    const path = ($("export-path") as HTMLInputElement).value.trim();
    if (path) send(exportVolumeMessage(path));
  });
  $("export-mesh-btn").addEventListener("click", () => {
    const path = ($("export-path") as HTMLInputElement).value.trim();
    if (path) send(exportMeshMessage(`${path}.stl`, 0.5));
  });
}

function sendToggle(key: "haptics" | "smoothing" | "sculpt"): void {
  if (!state.status) return;
  const current = state.status.toggles[key];
  if (key === "haptics") send(setConfigMessage({ haptics_enabled: !current }));
  else if (key === "smoothing") send(setConfigMessage({ smoothing_enabled: !current }));
  else send(setConfigMessage({ sculpt_enabled: !current }));
}

// -- rendering

function render(): void {
  $("banner").style.display = state.connected ? "none" : "block";
  $("status-bar").textContent = statusBarText(state);
  for (const label of toggleLabels(state.status)) {
    const el = $(`toggle-${label.key}`);
    el.textContent = label.text;
    el.classList.toggle("toggled", label.color === "red");
  }
  const gauge = gaugeModel(state);
  ($("force-fill") as HTMLElement).style.width = `${(gauge.forceRatio * 100).toFixed(1)}%`;
  ($("lavg-fill") as HTMLElement).style.width = `${(gauge.lAvg * 100).toFixed(1)}%`;
  $("force-text").textContent = `|F| ${gauge.forceNewtons.toFixed(3)} N${
    gauge.inContact ? " (contact)" : ""
  }`;
  $("lavg-text").textContent = `L ${gauge.lAvg.toFixed(3)}`;
  state.viewports.forEach((vp, i) => {
    const dims = state.status?.dims;
    const size = dims ? (vp.axis === "x" ? dims[0] : vp.axis === "y" ? dims[1] : dims[2]) : 0;
    viewLabels[i].textContent = `${vp.axis.toUpperCase()} slice ${vp.index}${
      size ? ` / ${size - 1}` : ""
    }${state.focused === i ? " *" : ""}`;
  });
}

for (let i = 0; i < 3; i++) bindViewport(i);
bindControls();
render();
connect();
requestAnimationFrame(flushProbe);
