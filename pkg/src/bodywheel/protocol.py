"""Wire protocol: newline-framed JSON messages over a stream transport.

The same JSON objects travel as WebSocket text messages for browser
clients. All lengths are meters, angles radians, time seconds. See
PROTOCOL.md at the repository root for the authoritative field tables.
"""

from __future__ import annotations

import json
import math

from .errors import ProtocolError
from .sensors import GESTURES

PROTOCOL_VERSION = 1

CLIENT_TYPES = ("hello", "gesture", "trial_start", "bye")
SERVER_TYPES = ("hello", "world_snapshot", "trial_history", "trial_start",
                "tick_telemetry", "trial_end", "error")

ERROR_CODES = (
    "version-mismatch",
    "malformed",
    "unknown-type",
    "handshake-required",
    "invalid-gesture",
    "not-driver",
    "busy",
    "trial-aborted",
)


def encode(msg: dict) -> bytes:
    return (json.dumps(msg, sort_keys=True, separators=(",", ":")) + "\n").encode()


def decode(line) -> dict:
    if isinstance(line, (bytes, bytearray)):
        line = line.decode("utf-8", errors="replace")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed: not valid JSON: {e}") from e
    if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
        raise ProtocolError("malformed: message must be an object with a 'type'")
    return msg


def error_frame(code: str, detail: str) -> dict:
    assert code in ERROR_CODES, code
    return {"type": "error", "code": code, "detail": detail}


def hello_frame(role: str = "driver") -> dict:
    return {"type": "hello", "version": PROTOCOL_VERSION, "role": role}


def gesture_frame(intensities: dict, t=None) -> dict:
    msg = {"type": "gesture", "intensities": dict(intensities)}
    if t is not None:
        msg["t"] = t
    return msg


def validate_gesture(msg: dict) -> dict:
    """Check a gesture message strictly; live inputs are rejected, never
    clamped. Returns the validated intensity map."""
    intensities = msg.get("intensities")
    if not isinstance(intensities, dict):
        raise ProtocolError("invalid-gesture: missing intensities object")
    out = {}
    for g, v in intensities.items():
        if g not in GESTURES:
            raise ProtocolError(f"invalid-gesture: unknown gesture {g!r}")
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ProtocolError(f"invalid-gesture: {g} intensity must be a number")
        v = float(v)
        if not math.isfinite(v) or not 0.0 <= v <= 1.0:
            raise ProtocolError(f"invalid-gesture: {g} intensity {v!r} outside [0, 1]")
        out[g] = v
    return out


def world_snapshot_frame(world, vehicle) -> dict:
    return {
        "type": "world_snapshot",
        "world": {
            "id": world.id,
            "walls": [list(w) for w in world.walls],
            "path": [list(p) for p in world.path],
            "start": {"x": world.start.x, "y": world.start.y,
                      "theta": world.start.theta},
            "goal": {"x": world.goal.x, "y": world.goal.y,
                     "radius": world.goal.radius},
        },
        "vehicle": vehicle.to_dict(),
    }


def telemetry_frame(trial_id: str, row) -> dict:
    t, x, y, theta, u1, u2 = row
    return {"type": "tick_telemetry", "trial_id": trial_id,
            "t": t, "x": x, "y": y, "theta": theta, "u1": u1, "u2": u2}


def trial_start_frame(trial_id: str) -> dict:
    return {"type": "trial_start", "trial_id": trial_id, "t0": 0.0}


def trial_end_frame(record) -> dict:
    return {
        "type": "trial_end",
        "trial_id": record.trial_id,
        "stop_reason": record.stop_reason,
        "metrics": {"dist": record.metrics.dist, "e_diff": record.metrics.e_diff},
    }


def trial_history_frame(records) -> dict:
    return {
        "type": "trial_history",
        "trials": [
            {"trial_id": r.trial_id, "stop_reason": r.stop_reason,
             "metrics": {"dist": r.metrics.dist, "e_diff": r.metrics.e_diff}}
            for r in records
        ],
    }
