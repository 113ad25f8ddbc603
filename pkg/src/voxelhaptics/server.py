"""WebSocket gateway: routes wire messages between clients and one SessionService.

One session thread owns all engine mutations (single-writer). Incoming probe
messages cross to it through a bounded deque that drops its oldest entry past
64 pending frames; control messages use an unbounded queue. The first client
to connect controls the session; later clients join read-only and only
receive broadcasts or issue queries.
"""

from __future__ import annotations

import queue
import threading
from collections import deque

from websockets.sync.server import serve

from .protocol import MUTATING_TYPES, ProtocolError, encode_message, parse_message
from .service import SessionService

PROBE_QUEUE_LIMIT = 64

_BROADCAST_TYPES = frozenset({"status", "force", "done"})


class GatewayServer:
    def __init__(self, service: SessionService, host: str = "127.0.0.1", port: int = 8765):
        self.service = service
        self.host = host
        self.port = port
        self._clients: list = []  # connection order; index 0 controls the session
        self._clients_lock = threading.Lock()
        self._send_lock = threading.Lock()
        self._probe_queue: deque = deque()
        self._control_queue: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._server = None
        self._threads: list[threading.Thread] = []

    # -- lifecycle

    def start(self) -> None:
        self._server = serve(self._handle_client, self.host, self.port)
        accept = threading.Thread(target=self._server.serve_forever, daemon=True)
        session = threading.Thread(target=self._session_loop, daemon=True)
        accept.start()
        session.start()
        self._threads = [accept, session]

    def stop(self) -> None:
        self._stop.set()
        if self._server is not None:
            self._server.shutdown()

    def serve_forever(self) -> None:
        self.start()
        try:
            self._stop.wait()
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # -- client side

    def _handle_client(self, ws) -> None:
        with self._clients_lock:
            self._clients.append(ws)
        try:
            self._send(ws, self.service.status_message())
            for raw in ws:
                self._dispatch(ws, raw)
        except Exception:
            pass
        finally:
            with self._clients_lock:
                if ws in self._clients:
                    self._clients.remove(ws)

    def _is_controller(self, ws) -> bool:
        with self._clients_lock:
            return bool(self._clients) and self._clients[0] is ws

    def _dispatch(self, ws, raw) -> None:
        try:
            msg = parse_message(raw)
        except ProtocolError as exc:
            self._send(ws, {"type": "error", "reason": str(exc)})
            return
        if msg["type"] in MUTATING_TYPES and not self._is_controller(ws):
            self._send(ws, {"type": "error", "reason": "read-only client"})
            return
        if msg["type"] == "probe":
            if len(self._probe_queue) >= PROBE_QUEUE_LIMIT:
                self._probe_queue.popleft()
                self.service.dropped_frames += 1
            self._probe_queue.append((ws, msg))
        else:
            self._control_queue.put((ws, msg))

    # -- session side

    def _session_loop(self) -> None:
        while not self._stop.is_set():
            busy = False
            while True:
                try:
                    ws, msg = self._control_queue.get_nowait()
                except queue.Empty:
                    break
                busy = True
                self._handle_control(ws, msg)
            if self._probe_queue:
                busy = True
                ws, msg = self._probe_queue.popleft()
                self._route(ws, self.service.handle_message(msg))
            if not busy:
                self._stop.wait(0.0005)

    def _handle_control(self, ws, msg) -> None:
        # Exports write on a snapshot in a side thread so ticks keep flowing.
        if msg["type"] in ("export_volume", "export_mesh"):
            try:
                snapshot = self.service.snapshot_volume()
            except (ProtocolError, ValueError) as exc:
                self._send(ws, {"type": "error", "reason": str(exc)})
                return
            transient = (
                "Exporting Volume..." if msg["type"] == "export_volume" else "Exporting Model..."
            )
            self._broadcast(self.service.status_message(transient=transient))

            def run_export() -> None:
                try:
                    if msg["type"] == "export_volume":
                        done = self.service.export_volume_to(snapshot, msg["path"])
                    else:
                        done = self.service.export_mesh_to(
                            snapshot, msg["path"], float(msg["isovalue"])
                        )
                    self._broadcast(done)
                    self._broadcast(self.service.status_message())
                except (ValueError, OSError) as exc:
                    self._send(ws, {"type": "error", "reason": str(exc)})

            worker = threading.Thread(target=run_export, daemon=True)
            worker.start()
            return
        self._route(ws, self.service.handle_message(msg))

    def _route(self, origin, messages: list[dict]) -> None:
        for msg in messages:
            if msg["type"] in _BROADCAST_TYPES:
                self._broadcast(msg)
            else:
                self._send(origin, msg)

    def _send(self, ws, msg: dict) -> None:
        text = encode_message(msg)
        with self._send_lock:
            try:
                ws.send(text)
            except Exception:
                pass

    def _broadcast(self, msg: dict) -> None:
        with self._clients_lock:
            targets = list(self._clients)
        text = encode_message(msg)
        with self._send_lock:
            for ws in targets:
                try:
                    ws.send(text)
                except Exception:
                    pass
