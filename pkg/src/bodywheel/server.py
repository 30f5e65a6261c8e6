"""Session host: one live simulation task serving driver/observer clients.

Transports: newline-framed JSON over TCP, and the same messages as
WebSocket text frames for browser clients. One driver per session; extra
connections observe. Telemetry is dropped oldest-first under backpressure;
control and lifecycle frames are never dropped.
"""

from __future__ import annotations

import asyncio
import logging
from collections import deque
from pathlib import Path

import numpy as np

from . import protocol
from .errors import ProtocolError
from .session import SessionConfig, resolve_session
from .trial import TrialSession

log = logging.getLogger("bodywheel.server")

TELEMETRY_QUEUE = 1024


class ClientConn:
    """Outbound queues: telemetry drops oldest under backpressure, system
    frames never drop, and delivery preserves the original send order."""

    def __init__(self, host, send_raw, label: str):
        self.host = host
        self.send_raw = send_raw
        self.label = label
        self.role = None  # None until a valid hello
        self.system = deque()
        self.telemetry = deque(maxlen=TELEMETRY_QUEUE)
        self.wake = asyncio.Event()
        self.closed = False
        self._seq = 0

    def push(self, msg: dict, telemetry: bool = False):
        if self.closed:
            return
        self._seq += 1
        if telemetry:
            if self.host.drop_prob > 0.0 and self.host._lossy_rng.random() < self.host.drop_prob:
                return  # simulated lossy link: telemetry only
            self.telemetry.append((self._seq, msg))
        else:
            self.system.append((self._seq, msg))
        self.wake.set()

    async def write_loop(self):
        try:
            while not self.closed:
                await self.wake.wait()
                self.wake.clear()
                while self.system or self.telemetry:
                    if not self.telemetry:
                        q = self.system
                    elif not self.system:
                        q = self.telemetry
                    else:
                        q = (self.system if self.system[0][0] < self.telemetry[0][0]
                             else self.telemetry)
                    _, msg = q.popleft()
                    await self.send_raw(protocol.encode(msg))
        except (ConnectionError, asyncio.CancelledError):
            pass
        finally:
            self.closed = True


class SessionHost:
    """Owns the world, calibration, trial lifecycle, and connected clients."""

    def __init__(self, cfg: SessionConfig, data_dir=None, drop_prob: float = 0.0):
        resolved = resolve_session(cfg)
        self.cfg = cfg
        self.world = resolved.world
        self.model = resolved.model
        self.data_dir = Path(data_dir) if data_dir else (
            Path(cfg.data_dir) if cfg.data_dir else None)
        self.drop_prob = drop_prob
        self._lossy_rng = np.random.default_rng(cfg.seed)
        self.records = []
        self.clients = set()
        self.driver = None
        self.trial = None
        self._trial_task = None
        self._gesture_queue = asyncio.Queue()
        self._latest_gesture = {}
        self._last_row = None

    # -- transports ---------------------------------------------------------

    async def serve_tcp(self, host: str, port: int):
        async def handle(reader, writer):
            peer = writer.get_extra_info("peername")

            async def send_raw(data: bytes):
                writer.write(data)
                await writer.drain()

            conn = ClientConn(self, send_raw, f"tcp:{peer}")
            writer_task = asyncio.create_task(conn.write_loop())
            self.clients.add(conn)
            try:
                while True:
                    line = await reader.readline()
                    if not line:
                        break
                    if not line.strip():
                        continue
                    self.handle_message(conn, line)
            except (ConnectionError, asyncio.IncompleteReadError):
                pass
            finally:
                self._drop_client(conn)
                writer_task.cancel()
                writer.close()

        return await asyncio.start_server(handle, host, port, limit=2 ** 20)

    async def serve_ws(self, host: str, port: int):
        import websockets

        async def handle(ws):
            async def send_raw(data: bytes):
                await ws.send(data.decode())

            conn = ClientConn(self, send_raw, f"ws:{ws.remote_address}")
            writer_task = asyncio.create_task(conn.write_loop())
            self.clients.add(conn)
            try:
                async for raw in ws:
                    self.handle_message(conn, raw)
            except Exception:
                pass
            finally:
                self._drop_client(conn)
                writer_task.cancel()

        return await websockets.serve(handle, host, port)

    def _drop_client(self, conn: ClientConn):
        conn.closed = True
        self.clients.discard(conn)
        if self.driver is conn:
            self.driver = None

    # -- message handling ---------------------------------------------------

    def handle_message(self, conn: ClientConn, raw):
        try:
            msg = protocol.decode(raw)
        except ProtocolError as e:
            conn.push(protocol.error_frame("malformed", str(e)))
            return
        mtype = msg["type"]
        if mtype == "hello":
            self._on_hello(conn, msg)
        elif conn.role is None:
            conn.push(protocol.error_frame(
                "handshake-required", "send hello before anything else"))
        elif mtype == "gesture":
            self._on_gesture(conn, msg)
        elif mtype == "trial_start":
            self._on_trial_start(conn)
        elif mtype == "bye":
            conn.closed = True
        else:
            conn.push(protocol.error_frame("unknown-type",
                                           f"unknown message type {mtype!r}"))

    def _on_hello(self, conn: ClientConn, msg: dict):
        if msg.get("version") != protocol.PROTOCOL_VERSION:
            conn.push(protocol.error_frame(
                "version-mismatch",
                f"server speaks version {protocol.PROTOCOL_VERSION}"))
            return
        wanted = msg.get("role", "driver")
        if wanted == "driver" and self.driver is None:
            conn.role = "driver"
            self.driver = conn
        else:
            if wanted == "driver":
                conn.push(protocol.error_frame(
                    "busy", "a driver is already connected; joining as observer"))
            conn.role = "observer"
        conn.push({"type": "hello", "version": protocol.PROTOCOL_VERSION,
                   "role": conn.role, "mode": self.cfg.mode, "dt": self.cfg.dt})
        conn.push(protocol.world_snapshot_frame(self.world, self.cfg.vehicle))
        conn.push(protocol.trial_history_frame(self.records))
        if self.trial is not None:
            conn.push(protocol.trial_start_frame(self.trial.trial_id))
            if self._last_row is not None:
                conn.push(protocol.telemetry_frame(self.trial.trial_id,
                                                   self._last_row))

    def _on_gesture(self, conn: ClientConn, msg: dict):
        if conn is not self.driver:
            conn.push(protocol.error_frame("not-driver",
                                           "only the driver may send gestures"))
            return
        try:
            intensities = protocol.validate_gesture(msg)
        except ProtocolError as e:
            conn.push(protocol.error_frame("invalid-gesture", str(e)))
            return
        self._latest_gesture = intensities
        if self.cfg.pacing == "lockstep":
            self._gesture_queue.put_nowait(intensities)

    def _on_trial_start(self, conn: ClientConn):
        if conn is not self.driver:
            conn.push(protocol.error_frame("not-driver",
                                           "only the driver may start trials"))
            return
        if self.trial is not None:
            conn.push(protocol.error_frame("busy", "a trial is already running"))
            return
        self._trial_task = asyncio.create_task(self._run_trial())

    def broadcast(self, msg: dict, telemetry: bool = False):
        for conn in list(self.clients):
            if conn.role is not None:
                conn.push(msg, telemetry=telemetry)

    # -- trial loop ---------------------------------------------------------

    async def _run_trial(self):
        trial_id = f"trial-{len(self.records) + 1:03d}"
        session = TrialSession(self.cfg, self.world, self.model, trial_id)
        self.trial = session
        self._last_row = None
        while not self._gesture_queue.empty():
            self._gesture_queue.get_nowait()
        self.broadcast(protocol.trial_start_frame(trial_id))
        loop = asyncio.get_running_loop()
        next_tick = loop.time()
        try:
            while session.running:
                if self.cfg.pacing == "lockstep":
                    intensities = await self._gesture_queue.get()
                else:
                    intensities = dict(self._latest_gesture)
                    if self.cfg.pacing == "realtime":
                        next_tick += self.cfg.dt
                        delay = next_tick - loop.time()
                        if delay > 0:
                            await asyncio.sleep(delay)
                    else:
                        await asyncio.sleep(0)
                row = session.tick(intensities)
                self._last_row = row
                self.broadcast(protocol.telemetry_frame(trial_id, row),
                               telemetry=True)
            record = session.record()
            self.records.append(record)
            self._persist(record)
            self.broadcast(protocol.trial_end_frame(record))
        except asyncio.CancelledError:
            raise
        except Exception as e:  # keep the session alive past a broken trial
            log.exception("trial %s aborted", trial_id)
            self.broadcast(protocol.error_frame(
                "trial-aborted", f"trial {trial_id} aborted: {e}"))
        finally:
            self.trial = None

    def _persist(self, record):
        if self.data_dir is None:
            return
        self.data_dir.mkdir(parents=True, exist_ok=True)
        record.save(self.data_dir / f"{record.trial_id}.btrial")
