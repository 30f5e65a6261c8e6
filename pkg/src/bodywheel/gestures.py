"""Gesture scripts: timed activation streams that drive the synthetic shirt."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, MalformedHeaderError, StreamOrderError
from .sensors import GESTURES, GestureCommand


class GestureScript:
    """Ordered sequence of GestureCommands with non-decreasing timestamps."""

    def __init__(self, events):
        self.events = list(events)
        t_prev = -math.inf
        for e in self.events:
            if e.t < t_prev:
                raise StreamOrderError(f"script timestamps decrease at t={e.t}")
            t_prev = e.t

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def duration(self) -> float:
        return self.events[-1].t if self.events else 0.0

    def sampled(self, sample_rate: float, duration=None) -> list:
        """Zero-order-hold resample to a regular clock starting at t=0.

        Times are k * (1/sample_rate) so the grid is bit-identical to a live
        tick clock of k * dt whenever 1/sample_rate == dt.
        """
        if duration is None:
            duration = self.duration
        period = 1.0 / sample_rate
        n = int(round(duration * sample_rate)) + 1
        ts = [k * period for k in range(n)]
        out, i, current = [], 0, {}
        for t in ts:
            while i < len(self.events) and self.events[i].t <= t:
                current = self.events[i].intensities
                i += 1
            out.append(GestureCommand(t, dict(current)))
        return out

    def save(self, path):
        doc = {
            "format": "bgest",
            "version": 1,
            "events": [{"t": e.t, "intensities": e.intensities} for e in self.events],
        }
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "GestureScript":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise MalformedHeaderError(f"{path}: not a gesture script: {e}") from e
        if doc.get("format") != "bgest":
            raise MalformedHeaderError(f"{path}: format field is not 'bgest'")
        return cls(GestureCommand(float(e["t"]), {g: float(v) for g, v in e["intensities"].items()})
                   for e in doc["events"])


def uninstructed_script(duration: float = 10.0, sample_rate: float = 100.0,
                        seed=0) -> GestureScript:
    """Free arm/shoulder wandering used to fit the calibration model.

    Each gesture intensity follows an independent smooth random sum of
    sinusoids, clipped into [0, 1], so all four joint groups see sustained
    movement over the window.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate)) + 1
    ts = np.arange(n) / sample_rate
    tracks = {}
    for g in GESTURES:
        x = np.full(n, 0.45)
        for _ in range(4):
            amp = rng.uniform(0.1, 0.3)
            freq = rng.uniform(0.15, 0.9)  # Hz, slow deliberate movement
            phase = rng.uniform(0, 2 * np.pi)
            x = x + amp * np.sin(2 * np.pi * freq * ts + phase)
        tracks[g] = np.clip(x, 0.0, 1.0)
    return GestureScript(
        GestureCommand(float(ts[k]), {g: float(tracks[g][k]) for g in GESTURES})
        for k in range(n))


def step_script(gesture: str, duration: float = 3.0, sample_rate: float = 100.0,
                intensity: float = 1.0, onset: float = 0.0) -> GestureScript:
    """Hold one gesture at a fixed intensity from ``onset`` to the end."""
    n = int(round(duration * sample_rate)) + 1
    events = []
    for k in range(n):
        t = k / sample_rate
        level = intensity if t >= onset else 0.0
        events.append(GestureCommand.clamped(t, {gesture: level}))
    return GestureScript(events)


def pump_script(gesture: str, duration: float, sample_rate: float = 100.0,
                rise_time: float = 0.4, rest_time: float = 0.0) -> GestureScript:
    """Repeated 0->1 ramps with instant release: sustained rising-edge drive.

    Release costs nothing downstream because falling derivatives are
    rectified away, so pumping is how a full-intensity command is held.
    A nonzero ``rest_time`` pauses at zero between ramps, letting the slow
    sensor lag decay so the next rise regains its full derivative.
    """
    period = 1.0 / sample_rate
    cycle = rise_time + rest_time
    n = int(round(duration * sample_rate)) + 1
    events = []
    for k in range(n):
        t = k * period
        phase = math.fmod(t, cycle)
        level = phase / rise_time if phase < rise_time else 0.0
        events.append(GestureCommand.clamped(t, {gesture: level}))
    return GestureScript(events)


BUILTIN_SCRIPTS = {
    "uninstructed": uninstructed_script,
}


def resolve_script(ref, *, seed=0, duration=None, sample_rate=100.0) -> GestureScript:
    """Resolve ``builtin:<name>`` or a ``.bgest`` path into a script."""
    ref = str(ref)
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in BUILTIN_SCRIPTS:
            raise ConfigError(f"unknown builtin script {name!r} "
                              f"(have: {sorted(BUILTIN_SCRIPTS)})")
        kwargs = {"seed": seed, "sample_rate": sample_rate}
        if duration is not None:
            kwargs["duration"] = duration
        return BUILTIN_SCRIPTS[name](**kwargs)
    return GestureScript.load(ref)
