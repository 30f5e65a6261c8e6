"""Trial execution (batch and incremental) and the `.btrial` record format."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .calibration import CalibrationModel
from .errors import MalformedHeaderError, ValidationError
from .kinematics import World, world_sha256
from .metrics import MetricReport, area_error
from .pipeline import ControlState, run_pipeline, step_controls
from .sensors import GestureCommand, SignalSynthesizer

COLLISION_MODES = {"stop": 0, "slide": 1}
STOP_NAMES = {0: "end", 1: "goal"}


@dataclass
class TrialRecord:
    trial_id: str
    world_id: str
    world_sha256: str
    config: dict
    trajectory: np.ndarray  # (m, 6) rows of t, x, y, theta, u1, u2
    contacts: list  # (step, wall_index, cx, cy)
    stop_reason: str
    metrics: MetricReport = None
    frames_ref: str = ""
    # in-memory only, not persisted
    frames: list = field(default=None, repr=False)
    pc_stream: np.ndarray = field(default=None, repr=False)

    def trajectory_xy(self) -> np.ndarray:
        return self.trajectory[:, 1:3]

    def header_doc(self) -> dict:
        doc = {
            "format": "btrial",
            "version": 1,
            "trial_id": self.trial_id,
            "world_id": self.world_id,
            "world_sha256": self.world_sha256,
            "config": self.config,
            "stop_reason": self.stop_reason,
            "contacts": [[int(s), int(w), float(x), float(y)]
                         for s, w, x, y in self.contacts],
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "frames_ref": self.frames_ref,
        }
        return doc

    def serialize(self) -> str:
        lines = [json.dumps(self.header_doc(), sort_keys=True, separators=(",", ":"))]
        for row in self.trajectory:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        tmp = str(path) + ".tmp"
        Path(tmp).write_text(self.serialize(), encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "TrialRecord":
        text = Path(path).read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines:
            raise MalformedHeaderError(f"{path}: empty file")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as e:
            raise MalformedHeaderError(f"{path}: header is not valid JSON: {e}") from e
        if header.get("format") != "btrial":
            raise MalformedHeaderError(f"{path}: format field is not 'btrial'")
        rows = []
        for line in lines[1:]:
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise MalformedHeaderError(f"{path}: trajectory row needs 6 fields")
            rows.append([float(p) for p in parts])
        metrics = header.get("metrics")
        return cls(
            trial_id=header["trial_id"],
            world_id=header["world_id"],
            world_sha256=header["world_sha256"],
            config=header.get("config", {}),
            trajectory=np.array(rows).reshape(len(rows), 6),
            contacts=[tuple(c) for c in header.get("contacts", [])],
            stop_reason=header.get("stop_reason", "end"),
            metrics=MetricReport.from_dict(metrics) if metrics else None,
            frames_ref=header.get("frames_ref", ""),
        )

    def recompute_metrics(self, world: World) -> MetricReport:
        return area_error(world.path_array(), self.trajectory_xy())


def controls_from_frames(frames, model: CalibrationModel, pipeline_cfg):
    """frames -> (frame timestamps, per-frame u1/u2, per-frame PC stream)."""
    pcs = model.project_frames(frames)
    ts = np.array([f.t for f in frames])
    u1f, u2f = run_pipeline(pcs, ts, pipeline_cfg)
    return ts, u1f, u2f, pcs


def tick_controls(frame_ts, u1f, u2f, dt: float, n_steps: int):
    """Sample-and-hold frame-rate controls onto the simulation tick grid.

    Step k (1-based) uses the latest control computed from frames with
    t <= (k-1)*dt; before any frame the controls are zero.
    """
    tick_prev = np.array([k * dt for k in range(n_steps)])
    idx = np.searchsorted(frame_ts, tick_prev, side="right") - 1
    safe = np.maximum(idx, 0)
    u1s = np.where(idx >= 0, u1f[safe], 0.0)
    u2s = np.where(idx >= 0, u2f[safe], 0.0)
    return u1s, u2s


def simulate_controls(world: World, vehicle, u1s, u2s, dt: float,
                      collision: str = "stop", use_goal: bool = True,
                      t0: float = 0.0):
    """Integrate a per-tick control stream through the world.

    Returns (trajectory (m, 6), contacts, stop_reason).
    """
    if collision not in COLLISION_MODES:
        raise ValidationError(f"unknown collision mode {collision!r}")
    world.validate_start(vehicle)
    walls = world.walls_array()
    goal = (world.goal.x, world.goal.y, world.goal.radius) if use_goal else None
    ts, xs, ys, ths, contacts, stop, steps = kernels.simulate(
        world.start.x, world.start.y, world.start.theta,
        np.ascontiguousarray(u1s, dtype=float),
        np.ascontiguousarray(u2s, dtype=float),
        vehicle.v_f, vehicle.v_r, dt, walls, vehicle.body_radius,
        COLLISION_MODES[collision], goal, t0)
    m = steps + 1
    traj = np.empty((m, 6))
    traj[:, 0] = ts
    traj[:, 1] = xs
    traj[:, 2] = ys
    traj[:, 3] = ths
    traj[0, 4] = 0.0
    traj[0, 5] = 0.0
    traj[1:, 4] = u1s[:steps]
    traj[1:, 5] = u2s[:steps]
    return traj, contacts, STOP_NAMES[stop]


def _n_steps(duration: float, dt: float) -> int:
    return int(math.floor(duration / dt + 1e-9))


def run_scripted_trial(cfg, world: World, model: CalibrationModel, script,
                       trial_id: str = "trial") -> TrialRecord:
    """Full chain: gesture script -> frames -> PCs -> controls -> trajectory."""
    duration = min(cfg.timeout, script.duration)
    commands = script.sampled(cfg.signal.sample_rate, duration=duration)
    synth = SignalSynthesizer(cfg.signal, model.layout, seed=cfg.seed)
    frames = synth.synthesize(commands)
    return run_frames_trial(cfg, world, model, frames, trial_id=trial_id)


def run_frames_trial(cfg, world: World, model: CalibrationModel, frames,
                     trial_id: str = "trial") -> TrialRecord:
    """Replay a frame stream (recorded or synthesized) through the chain."""
    if not frames:
        raise ValidationError("no frames to replay")
    frame_ts, u1f, u2f, pcs = controls_from_frames(frames, model, cfg.pipeline)
    n = _n_steps(min(cfg.timeout, float(frame_ts[-1])), cfg.dt)
    u1s, u2s = tick_controls(frame_ts, u1f, u2f, cfg.dt, n)
    traj, contacts, stop = simulate_controls(
        world, cfg.vehicle, u1s, u2s, cfg.dt, collision=cfg.collision)
    metrics = area_error(world.path_array(), traj[:, 1:3])
    return TrialRecord(
        trial_id=trial_id,
        world_id=world.id,
        world_sha256=world_sha256(world),
        config=cfg.to_dict(),
        trajectory=traj,
        contacts=contacts,
        stop_reason=stop,
        metrics=metrics,
        frames=list(frames),
        pc_stream=pcs,
    )


class TrialSession:
    """Incremental tick-at-a-time engine for live driving.

    Produces bit-identical trajectories to the batch path: the tick clock is
    k*dt, one frame is synthesized per tick at the pre-step time, and the
    same kernel step functions are applied in the same order.
    """

    def __init__(self, cfg, world: World, model: CalibrationModel,
                 trial_id: str = "trial"):
        if 1.0 / cfg.signal.sample_rate != cfg.dt:
            raise ValidationError(
                "live sessions need signal.sample_rate == 1/dt exactly")
        world.validate_start(cfg.vehicle)
        self.cfg = cfg
        self.world = world
        self.model = model
        self.trial_id = trial_id
        self.synth = SignalSynthesizer(cfg.signal, model.layout, seed=cfg.seed)
        self.cstate = ControlState()
        self.walls = world.walls_array()
        self.mode = COLLISION_MODES[cfg.collision]
        self.x, self.y, self.th = world.start.as_tuple()
        self.k = 0
        self.n_max = _n_steps(cfg.timeout, cfg.dt)
        self.rows = [(0.0, self.x, self.y, self.th, 0.0, 0.0)]
        self.contacts = []
        self.frames = []
        self.pcs = []
        self.stop_reason = None

    @property
    def running(self) -> bool:
        return self.stop_reason is None

    def tick(self, intensities: dict):
        """Apply one gesture sample and advance the world by dt."""
        if not self.running:
            raise ValidationError("trial already finished")
        cfg = self.cfg
        t_prev = self.k * cfg.dt
        frame = self.synth.synthesize_frame(GestureCommand(t_prev, intensities))
        pc = self.model.project_values(frame.values)
        step_controls(self.cstate, pc, frame.t, cfg.pipeline)
        u1 = self.cstate.u1
        u2 = self.cstate.u2
        x2, y2, th2, wall, cx, cy = kernels.step_with_walls(
            self.x, self.y, self.th, u1, u2, cfg.vehicle.v_f, cfg.vehicle.v_r,
            cfg.dt, self.walls, cfg.vehicle.body_radius, self.mode)
        self.k += 1
        if wall >= 0:
            self.contacts.append((self.k, wall, cx, cy))
        self.x, self.y, self.th = x2, y2, th2
        row = (self.k * cfg.dt, x2, y2, th2, u1, u2)
        self.rows.append(row)
        self.frames.append(frame)
        self.pcs.append(pc)
        if self.world.goal.contains(x2, y2):
            self.stop_reason = "goal"
        elif self.k >= self.n_max:
            self.stop_reason = "end"
        return row

    def record(self) -> TrialRecord:
        traj = np.array(self.rows).reshape(len(self.rows), 6)
        metrics = area_error(self.world.path_array(), traj[:, 1:3])
        return TrialRecord(
            trial_id=self.trial_id,
            world_id=self.world.id,
            world_sha256=world_sha256(self.world),
            config=self.cfg.to_dict(),
            trajectory=traj,
            contacts=list(self.contacts),
            stop_reason=self.stop_reason or "end",
            metrics=metrics,
            frames=list(self.frames),
            pc_stream=np.array(self.pcs) if self.pcs else None,
        )
