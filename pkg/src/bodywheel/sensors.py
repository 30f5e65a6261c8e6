"""Sensor shirt data model and the synthetic signal generator that stands in for it.

Channel semantics: dimensionless resistance readings from fabric strain
sensors. The synthetic model per channel is

    value = baseline + drift_rate * t + sum_g gain[g] * lag_g(t) + noise

where ``lag_g`` is a first-order lag (time constant ``relaxation_time``)
tracking the saturated gesture intensity ``sat(u) = u / (1 + u)``. The lag is
the outermost nonlinearity so a full-intensity step reaches ``1 - e^-1`` of
its asymptote at ``t = relaxation_time`` exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    StreamOrderError,
    UnknownGestureError,
    ValidationError,
)

GROUPS = ("right_shoulder", "left_shoulder", "right_elbow", "left_elbow", "other")

#: Movement vocabulary, and the joint group each movement primarily deforms.
GESTURES = (
    "right_elbow_flex",
    "left_elbow_flex",
    "right_shoulder_protract",
    "left_shoulder_protract",
)
GESTURE_GROUP = {
    "right_elbow_flex": "right_elbow",
    "left_elbow_flex": "left_elbow",
    "right_shoulder_protract": "right_shoulder",
    "left_shoulder_protract": "left_shoulder",
}

#: Order of the retained principal components everywhere downstream:
#: (h_rs, h_ls, h_re, h_le).
PC_GROUPS = ("right_shoulder", "left_shoulder", "right_elbow", "left_elbow")


@dataclass(frozen=True)
class ChannelLayout:
    """Assignment of shirt channels to joint groups.

    Placement is configuration, not code: real shirts differ, so the mapping
    lives in the recording/calibration headers.
    """

    total_channels: int = 52
    groups: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.groups:
            object.__setattr__(self, "groups", _default_groups(self.total_channels))
        seen = set()
        for name, idx in self.groups.items():
            if name not in GROUPS:
                raise ValidationError(f"unknown group {name!r}")
            for i in idx:
                if not 0 <= i < self.total_channels:
                    raise ValidationError(f"channel {i} outside 0..{self.total_channels - 1}")
                if i in seen:
                    raise ValidationError(f"channel {i} assigned to more than one group")
                seen.add(i)
        for name in PC_GROUPS:
            if not self.groups.get(name):
                raise ValidationError(f"group {name!r} must be non-empty")

    def indices(self, group: str) -> list:
        return list(self.groups[group])

    def to_dict(self) -> dict:
        return {
            "total_channels": self.total_channels,
            "groups": {g: list(ix) for g, ix in self.groups.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelLayout":
        return cls(total_channels=int(d["total_channels"]),
                   groups={g: [int(i) for i in ix] for g, ix in d["groups"].items()})


def _default_groups(total: int) -> dict:
    if total < 8:
        raise ValidationError("need at least 8 channels for the default layout")
    per = min(10, total // 5)
    groups = {}
    for k, name in enumerate(PC_GROUPS):
        groups[name] = list(range(k * per, (k + 1) * per))
    groups["other"] = list(range(4 * per, total))
    return groups


@dataclass(frozen=True)
class SensorFrame:
    """One timestamped sample of every shirt channel."""

    t: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise ValidationError(f"non-finite sensor values at t={self.t}")
        if not math.isfinite(self.t):
            raise ValidationError("non-finite frame timestamp")


@dataclass(frozen=True)
class GestureCommand:
    """Gesture activations at one instant; intensities must lie in [0, 1]."""

    t: float
    intensities: dict

    def __post_init__(self):
        for g, v in self.intensities.items():
            if g not in GESTURES:
                raise UnknownGestureError(f"unknown gesture {g!r}")
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValidationError(f"intensity {v!r} for {g} outside [0, 1]")

    @classmethod
    def clamped(cls, t: float, intensities: dict) -> "GestureCommand":
        """Scripted-mode constructor: clamp raw activations into [0, 1]."""
        return cls(t, {g: min(1.0, max(0.0, float(v))) for g, v in intensities.items()})


@dataclass(frozen=True)
class SignalModelParams:
    relaxation_time: float = 0.4  # s, first-order lag constant
    drift_rate: float = 0.002  # units/s, common slow drift
    noise_std: float = 0.005
    baseline: float = 1.0
    sample_rate: float = 100.0  # Hz
    gain_per_gesture: dict = field(default_factory=dict)  # gesture -> len-52 vector

    def __post_init__(self):
        if self.relaxation_time <= 0:
            raise ValidationError("relaxation_time must be > 0")
        if self.sample_rate <= 0:
            raise ValidationError("sample_rate must be > 0")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")

    def gains(self, layout: ChannelLayout) -> dict:
        if self.gain_per_gesture:
            out = {}
            for g in GESTURES:
                vec = np.asarray(self.gain_per_gesture[g], dtype=float)
                if vec.shape != (layout.total_channels,):
                    raise DimensionMismatchError(
                        f"gain vector for {g} has shape {vec.shape}, "
                        f"expected ({layout.total_channels},)")
                out[g] = vec
            return out
        return default_gains(layout)

    def to_dict(self) -> dict:
        return {
            "relaxation_time": self.relaxation_time,
            "drift_rate": self.drift_rate,
            "noise_std": self.noise_std,
            "baseline": self.baseline,
            "sample_rate": self.sample_rate,
            "gain_per_gesture": {g: list(map(float, v))
                                 for g, v in self.gain_per_gesture.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalModelParams":
        d = dict(d)
        d["gain_per_gesture"] = {g: list(map(float, v))
                                 for g, v in d.get("gain_per_gesture", {}).items()}
        return cls(**d)

    def content_hash(self, layout: ChannelLayout) -> str:
        doc = {"params": self.to_dict(), "layout": layout.to_dict()}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def default_gains(layout: ChannelLayout) -> dict:
    """Deterministic per-channel gains: each gesture mostly deforms its own
    joint group, with small same-side and torso crosstalk."""
    out = {}
    for g in GESTURES:
        vec = np.zeros(layout.total_channels)
        primary = layout.indices(GESTURE_GROUP[g])
        n = len(primary)
        for rank, ch in enumerate(primary):
            vec[ch] = 0.7 + 0.6 * (rank / max(1, n - 1))
        side = "right" if g.startswith("right") else "left"
        joint = "shoulder" if "elbow" in g else "elbow"
        for ch in layout.indices(f"{side}_{joint}"):
            vec[ch] = 0.04
        for ch in layout.groups.get("other", ()):
            vec[ch] = 0.08
        out[g] = vec
    return out


def sat(x: float) -> float:
    """Saturating sensor nonlinearity, monotone on [0, inf)."""
    return x / (1.0 + x)


class SignalSynthesizer:
    """Streaming generator of shirt frames from gesture commands.

    Holds the per-gesture lag state and the noise RNG; deterministic given
    (command stream, params, seed). Commands are zero-order held: the lag
    tracks the previous command's intensity until the next one arrives.
    """

    def __init__(self, params: SignalModelParams, layout: ChannelLayout, seed=0):
        self.params = params
        self.layout = layout
        self._gains = params.gains(layout)
        self.reset(seed)

    def reset(self, seed=0, t0: float = 0.0):
        self._rng = np.random.default_rng(seed)
        self._lag = {g: 0.0 for g in GESTURES}
        self._held = {g: 0.0 for g in GESTURES}
        self._t = t0

    def synthesize_frame(self, cmd: GestureCommand) -> SensorFrame:
        p = self.params
        dt = cmd.t - self._t
        if dt < 0:
            raise StreamOrderError(
                f"command at t={cmd.t} precedes synthesizer clock {self._t}")
        if dt > 0:
            alpha = 1.0 - math.exp(-dt / p.relaxation_time)
            for g in GESTURES:
                target = sat(self._held[g])
                self._lag[g] += (target - self._lag[g]) * alpha
        for g in GESTURES:
            self._held[g] = float(cmd.intensities.get(g, 0.0))
        self._t = cmd.t

        values = np.full(self.layout.total_channels, p.baseline + p.drift_rate * cmd.t)
        for g in GESTURES:
            if self._lag[g] != 0.0:
                values = values + self._gains[g] * self._lag[g]
        if p.noise_std > 0:
            values = values + self._rng.normal(0.0, p.noise_std, self.layout.total_channels)
        return SensorFrame(cmd.t, values)

    def synthesize(self, commands) -> list:
        """Run a whole command stream; one frame per command, in order."""
        return [self.synthesize_frame(c) for c in commands]
