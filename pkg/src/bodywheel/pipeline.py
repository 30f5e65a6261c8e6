"""Rectified-derivative control mapping.

Each retained PC is differentiated, dead-zoned, and positive-rectified, so
only the rising part of a movement carries authority. The elbow difference
is integrated into the persistent speed command u1 (cruise behavior); the
shoulder difference is emitted directly as the instantaneous turn command
u2 and returns to zero as soon as the shoulders stop rising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import StreamOrderError, ValidationError
from .sensors import GESTURE_GROUP, PC_GROUPS


@dataclass(frozen=True)
class PipelineConfig:
    dead_zone: float = 0.02  # threshold on the PC derivative, units/s
    derivative_smoothing: int = 5  # moving-average window, samples
    u1_gain: float = 1.0
    u2_gain: float = 1.0
    u1_leak: float = 0.0  # per-second decay; 0 = perfect integrator
    clamp: float = 1.0  # symmetric bound: u1, u2 in [-clamp, clamp]

    def __post_init__(self):
        if self.dead_zone < 0:
            raise ValidationError("dead_zone must be >= 0")
        if self.u1_gain <= 0 or self.u2_gain <= 0:
            raise ValidationError("gains must be > 0")
        if not 0.0 <= self.u1_leak <= 1.0:
            raise ValidationError("u1_leak must be in [0, 1]")
        if self.clamp <= 0:
            raise ValidationError("clamp must be > 0")
        if self.derivative_smoothing < 1:
            raise ValidationError("derivative_smoothing must be >= 1")

    def to_dict(self) -> dict:
        return {
            "dead_zone": self.dead_zone,
            "derivative_smoothing": self.derivative_smoothing,
            "u1_gain": self.u1_gain,
            "u2_gain": self.u2_gain,
            "u1_leak": self.u1_leak,
            "clamp": self.clamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(**d)


@dataclass
class ControlState:
    """Per-session filter state; owned by one consumer, applied in time order."""

    u1: float = 0.0
    u2: float = 0.0
    prev_smoothed: tuple = None  # previous smoothed PC 4-tuple
    prev_t: float = 0.0
    buffer: list = field(default_factory=list)


def rectified_derivative(h_prev: float, h_curr: float, dt: float,
                         dead_zone: float) -> float:
    """Soft dead-zone on the finite-difference derivative, then keep the
    positive part: max(0, (h_curr - h_prev)/dt - dead_zone)."""
    if dt <= 0:
        raise ValidationError("dt must be > 0")
    d = (h_curr - h_prev) / dt
    out = d - dead_zone
    return out if out > 0.0 else 0.0


def step_controls(state: ControlState, pc, t: float,
                  cfg: PipelineConfig) -> ControlState:
    """Advance u1/u2 with one PC sample (h_rs, h_ls, h_re, h_le) at time t.

    The first sample only primes the derivative filter. Mutates and returns
    ``state``.
    """
    h = [float(v) for v in pc]
    if len(h) != 4:
        raise ValidationError(f"expected 4 PC values, got {len(h)}")
    if not all(math.isfinite(v) for v in h):
        raise StreamOrderError(f"non-finite PC values at t={t}")
    if state.prev_smoothed is not None and t <= state.prev_t:
        raise StreamOrderError(f"timestamp {t} does not advance past {state.prev_t}")
    (state.u1, state.u2, state.prev_smoothed, state.prev_t, state.buffer
     ) = kernels.pipeline_step(
        state.u1, state.u2, state.prev_smoothed, state.prev_t, state.buffer,
        h[0], h[1], h[2], h[3], float(t),
        cfg.dead_zone, cfg.derivative_smoothing,
        cfg.u1_gain, cfg.u2_gain, cfg.u1_leak, cfg.clamp)
    return state


def run_pipeline(pcs: np.ndarray, ts: np.ndarray, cfg: PipelineConfig,
                 u1=0.0, u2=0.0):
    """Batch counterpart of iterating step_controls from a fresh state."""
    pcs = np.ascontiguousarray(pcs, dtype=float)
    ts = np.ascontiguousarray(ts, dtype=float)
    if pcs.shape != (len(ts), 4):
        raise ValidationError(f"PC stream shape {pcs.shape} != ({len(ts)}, 4)")
    if not np.all(np.isfinite(pcs)):
        raise StreamOrderError("non-finite PC values in stream")
    if np.any(np.diff(ts) <= 0):
        raise StreamOrderError("PC stream timestamps must strictly increase")
    return kernels.pipeline_steps(
        pcs, ts, cfg.dead_zone, cfg.derivative_smoothing,
        cfg.u1_gain, cfg.u2_gain, cfg.u1_leak, cfg.clamp, u1, u2)


def derive_pipeline_config(model, params, *, smoothing: int = 5,
                           saturation_time: float = 1.0,
                           dead_zone_fraction: float = 0.05,
                           noise_guard_sigmas: float = 6.0,
                           u1_leak: float = 0.0) -> PipelineConfig:
    """Size the dead-zone and gains from the calibrated signal chain.

    The dead-zone must dominate the resting noise floor, otherwise rectified
    sensor noise accumulates in the u1 integrator. With a moving-average
    window W at frame spacing dt, the smoothed-difference derivative of a
    unit-axis projection of iid channel noise has standard deviation
    sigma_d = noise_std * sqrt(2) / (W * dt); the dead-zone is placed
    ``noise_guard_sigmas`` above it (plus the drift slope), or at
    ``dead_zone_fraction`` of the weakest reference gesture peak, whichever
    is larger. Gains then normalize the post-dead-zone response: a
    full-intensity elbow pump saturates u1 in ``saturation_time`` seconds
    and a shoulder pump peaks at full turn rate.
    """
    from .gestures import pump_script
    from .sensors import GESTURES, SignalModelParams, SignalSynthesizer

    quiet = SignalModelParams(
        relaxation_time=params.relaxation_time, drift_rate=0.0, noise_std=0.0,
        baseline=params.baseline, sample_rate=params.sample_rate,
        gain_per_gesture=params.gain_per_gesture)
    pc_index = {g: PC_GROUPS.index(GESTURE_GROUP[g]) for g in GESTURES}

    def reference_derivative(g, duration, rest):
        synth = SignalSynthesizer(quiet, model.layout, seed=0)
        script = pump_script(g, duration=duration, rest_time=rest,
                             sample_rate=params.sample_rate)
        frames = synth.synthesize(script.events)
        pcs = model.project_frames(frames)
        ts = np.array([f.t for f in frames])
        h = pcs[:, pc_index[g]]
        # same smoothing the pipeline applies
        hs = np.empty_like(h)
        for k in range(len(h)):
            lo = max(0, k - smoothing + 1)
            hs[k] = h[lo:k + 1].mean()
        return ts[1:], np.diff(hs) / np.diff(ts), np.diff(ts)

    derivs = {g: reference_derivative(g, saturation_time, 0.0) for g in GESTURES}
    weakest_peak = min(float(np.max(d)) for _, d, _ in derivs.values())
    if weakest_peak <= 0:
        raise ValidationError("reference gestures produce no rising PC response; "
                              "check calibration sign conventions")
    frame_dt = 1.0 / params.sample_rate
    sigma_d = params.noise_std * math.sqrt(2.0) / (smoothing * frame_dt)
    drift_slope = abs(params.drift_rate) * 4.0  # generous bound on axis sums
    dead_zone = max(dead_zone_fraction * weakest_peak,
                    noise_guard_sigmas * sigma_d + drift_slope)

    # u1: the first second of continuous pumping should integrate to 1
    elbow_int = min(
        float(np.sum(np.maximum(derivs[g][1] - dead_zone, 0.0) * derivs[g][2]))
        for g in ("right_elbow_flex", "left_elbow_flex"))
    # u2: a deliberate rested pump should peak at full turn rate even after
    # the initial transient has decayed
    shoulder_peak = math.inf
    for g in ("right_shoulder_protract", "left_shoulder_protract"):
        ts, d, _ = reference_derivative(g, 3.0, 0.4)
        steady = np.maximum(d[ts >= 1.5] - dead_zone, 0.0)
        shoulder_peak = min(shoulder_peak, float(np.max(steady)))
    if elbow_int <= 0 or shoulder_peak <= 0:
        raise ValidationError(
            f"dead zone {dead_zone:.3g} swallows the reference gestures; "
            "the sensor noise floor is too high for this calibration")
    return PipelineConfig(
        dead_zone=dead_zone,
        derivative_smoothing=smoothing,
        u1_gain=1.0 / elbow_int,
        u2_gain=1.0 / shoulder_peak,
        u1_leak=u1_leak,
        clamp=1.0,
    )
