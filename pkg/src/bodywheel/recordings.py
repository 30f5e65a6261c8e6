"""Body-signal recording files (`.bsr`): header line + one frame per line.

Line 1 is a JSON header (channel layout, sample rate, params hash); every
following line is ``t,v0,v1,...`` with full-precision decimal floats so that
write -> read is exact.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ChannelCountError,
    MalformedHeaderError,
    NonMonotonicTimestampError,
    ValidationError,
)
from .sensors import ChannelLayout, SensorFrame


@dataclass
class Recording:
    layout: ChannelLayout
    sample_rate: float
    frames: list = field(default_factory=list)
    params_hash: str = ""

    def __len__(self):
        return len(self.frames)

    def values_matrix(self) -> np.ndarray:
        if not self.frames:
            return np.zeros((0, self.layout.total_channels))
        return np.stack([f.values for f in self.frames])

    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])


def _header_doc(rec: Recording) -> dict:
    doc = {"format": "bsr", "version": 1, "sample_rate": rec.sample_rate}
    doc.update(rec.layout.to_dict())
    if rec.params_hash:
        doc["params_hash"] = rec.params_hash
    return doc


def serialize_recording(rec: Recording) -> str:
    lines = [json.dumps(_header_doc(rec), sort_keys=True, separators=(",", ":"))]
    t_prev = -math.inf
    for row, f in enumerate(rec.frames):
        if len(f.values) != rec.layout.total_channels:
            raise ChannelCountError(row, rec.layout.total_channels, len(f.values))
        if f.t <= t_prev:
            raise NonMonotonicTimestampError(row, t_prev, f.t)
        t_prev = f.t
        lines.append(",".join([repr(float(f.t))] + [repr(float(v)) for v in f.values]))
    return "\n".join(lines) + "\n"


def write_recording(path, rec: Recording) -> None:
    text = serialize_recording(rec)
    tmp = str(path) + ".tmp"
    Path(tmp).write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def read_recording(path) -> Recording:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise MalformedHeaderError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise MalformedHeaderError(f"{path}: header is not valid JSON: {e}") from e
    if not isinstance(header, dict) or header.get("format") != "bsr":
        raise MalformedHeaderError(f"{path}: header format field is not 'bsr'")
    try:
        layout = ChannelLayout.from_dict(header)
        sample_rate = float(header["sample_rate"])
    except (KeyError, TypeError, ValidationError) as e:
        raise MalformedHeaderError(f"{path}: bad header: {e}") from e

    frames = []
    t_prev = -math.inf
    for row, line in enumerate(lines[1:]):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 1 + layout.total_channels:
            raise ChannelCountError(row, layout.total_channels, len(parts) - 1)
        try:
            t = float(parts[0])
            values = np.array([float(p) for p in parts[1:]])
        except ValueError as e:
            raise MalformedHeaderError(f"{path}: row {row}: unparseable number: {e}") from e
        if t <= t_prev:
            raise NonMonotonicTimestampError(row, t_prev, t)
        t_prev = t
        frames.append(SensorFrame(t, values))
    return Recording(layout=layout, sample_rate=sample_rate, frames=frames,
                     params_hash=header.get("params_hash", ""))


def recording_sha256(rec: Recording) -> str:
    """Content hash of the canonical serialization; used as provenance."""
    return hashlib.sha256(serialize_recording(rec).encode()).hexdigest()
