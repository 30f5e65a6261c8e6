"""Minimal protocol client (TCP) for driving sessions programmatically."""

from __future__ import annotations

import asyncio

from . import protocol
from .errors import ProtocolError


class SessionClient:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(cls, host: str, port: int) -> "SessionClient":
        reader, writer = await asyncio.open_connection(host, port, limit=2 ** 20)
        return cls(reader, writer)

    async def send(self, msg: dict):
        self.writer.write(protocol.encode(msg))
        await self.writer.drain()

    async def recv(self, timeout: float = 10.0) -> dict:
        line = await asyncio.wait_for(self.reader.readline(), timeout)
        if not line:
            raise ProtocolError("connection closed by server")
        return protocol.decode(line)

    async def recv_type(self, *types, timeout: float = 10.0) -> dict:
        """Next message of one of the given types; other types are skipped
        except errors, which raise."""
        while True:
            msg = await self.recv(timeout)
            if msg["type"] == "error" and "error" not in types:
                raise ProtocolError(f"{msg['code']}: {msg['detail']}")
            if msg["type"] in types:
                return msg

    async def handshake(self, role: str = "driver") -> dict:
        await self.send(protocol.hello_frame(role))
        hello = await self.recv_type("hello")
        world = await self.recv_type("world_snapshot")
        history = await self.recv_type("trial_history")
        return {"hello": hello, "world_snapshot": world, "trial_history": history}

    async def run_script(self, intensity_seq) -> tuple:
        """Drive one lockstep trial: one gesture per tick, collect telemetry.

        Returns (rows, trial_end message); rows are (t, x, y, theta, u1, u2).
        """
        await self.send({"type": "trial_start"})
        await self.recv_type("trial_start")
        rows = []
        end = None
        for intensities in intensity_seq:
            await self.send(protocol.gesture_frame(intensities))
            msg = await self.recv_type("tick_telemetry", "trial_end")
            if msg["type"] == "trial_end":
                end = msg
                break
            rows.append((msg["t"], msg["x"], msg["y"], msg["theta"],
                         msg["u1"], msg["u2"]))
        if end is None:
            end = await self.recv_type("trial_end")
        return rows, end

    async def close(self):
        try:
            await self.send({"type": "bye"})
        except (ConnectionError, ProtocolError):
            pass
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except ConnectionError:
            pass
