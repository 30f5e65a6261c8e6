"""Scripted learner: a deterministic gesture-script generator with
controllable execution noise, standing in for a practicing human subject.

The learner drives the full signal chain closed-loop (pure pursuit) but
executes imperfectly, with all imperfections scaled by the noise level
``sigma`` and drawn once per seed:

* it aims at an internally distorted copy of the prescribed track
  (misremembered geometry plus a serpentine weave), and
* its gesture onsets lag each decision by a random reaction time,
  so turns start late and get corrected, lengthening the driven path.

A shrinking sigma therefore behaves like one subject whose execution
errors shrink with practice: the trajectory tightens onto the track and
both the traveled distance and the enclosed area error fall.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .calibration import CalibrationModel
from .gestures import GestureScript
from .kinematics import World
from .sensors import GestureCommand
from .trial import TrialSession


@dataclass(frozen=True)
class LearnerParams:
    cruise: float = 0.42  # target u1 on straights
    slow: float = 0.15  # target u1 while turning hard
    lookahead: float = 1.4  # m along the aim track
    decision_period: float = 0.1  # s between control decisions
    reaction_delay: float = 0.3  # s of |N(0,1)| latency per unit sigma
    reaction_delay_cap: float = 0.5  # s, bounds the worst-case late turn
    turn_deadband: float = 0.04  # rad
    pump_rise: float = 2.4  # max ramp rate, intensity/s
    pump_rest: float = 0.45  # s at zero between ramps (lets the lag decay)
    distortion_amp: float = 0.45  # low-frequency track distortion at sigma=1, m
    weave_amp: float = 0.15  # serpentine amplitude at sigma=1, m
    weave_wavelength: float = 4.0  # m
    corner_overshoot: float = 0.9  # m of late turning per unit sigma
    corner_overshoot_cap: float = 0.6  # m, keeps the aim corner off the walls
    clip_offset: float = 0.6  # hard bound on the aim-point offset, m
    corner_calm: float = 2.5  # m around corners where offsets shrink
    wall_margin: float = 0.35  # extra clearance the aim track must keep, m
    resample_step: float = 0.05  # m


def _resample_polyline(pts: np.ndarray, step: float):
    segs = np.diff(pts, axis=0)
    lens = np.hypot(segs[:, 0], segs[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    total = cum[-1]
    n = max(2, int(math.ceil(total / step)) + 1)
    s = np.linspace(0.0, total, n)
    x = np.interp(s, cum, pts[:, 0])
    y = np.interp(s, cum, pts[:, 1])
    return np.column_stack([x, y]), s


def _normals(pts: np.ndarray) -> np.ndarray:
    t = np.empty_like(pts)
    t[1:-1] = pts[2:] - pts[:-2]
    t[0] = pts[1] - pts[0]
    t[-1] = pts[-1] - pts[-2]
    norm = np.hypot(t[:, 0], t[:, 1])
    norm[norm == 0] = 1.0
    t /= norm[:, None]
    return np.column_stack([-t[:, 1], t[:, 0]])


class _Pump:
    """Rise/rest sawtooth generator for one gesture channel."""

    def __init__(self, rise_rate: float, rest_ticks: int):
        self.rise_rate = rise_rate
        self.rest_ticks = rest_ticks
        self.phase = 0.0
        self.resting = 0
        self.strength = 0.0

    def level(self, dt: float) -> float:
        if self.strength <= 0.0:
            self.phase = 0.0
            self.resting = 0
            return 0.0
        if self.resting > 0:
            self.resting -= 1
            return 0.0
        rate = self.rise_rate * max(0.45, min(1.0, self.strength))
        self.phase += rate * dt
        if self.phase >= 1.0:
            self.phase = 0.0
            self.resting = self.rest_ticks
            return 0.0
        return self.phase


class ScriptedLearner:
    def __init__(self, cfg, world: World, model: CalibrationModel,
                 params: LearnerParams = None):
        self.cfg = cfg
        self.world = world
        self.model = model
        self.params = params or LearnerParams()

    def aim_track(self, sigma: float, rng) -> np.ndarray:
        """The learner's internal (distorted) copy of the prescribed track.

        Three sigma-scaled imperfections, drawn once per seed: every corner
        is turned late (the aim corner slides along the incoming leg, which
        lengthens the track first-order in sigma), the legs carry a few
        misremembered long-wave offsets, and a mid-wavelength weave rides on
        top. Offsets taper to zero at both ends so every run still starts on
        the track and converges on the goal, and are hard-clipped so even a
        sloppy run keeps wall clearance.
        """
        p = self.params
        raw = self.world.path_array().copy()
        corner_z = np.abs(rng.standard_normal(max(0, len(raw) - 2)))
        corner_points = []
        for c in range(1, len(raw) - 1):
            d = raw[c] - raw[c - 1]
            norm = math.hypot(d[0], d[1])
            if norm == 0:
                continue
            # 0.4 floor: every seed turns at least somewhat late
            push = min(sigma * p.corner_overshoot * (0.4 + corner_z[c - 1]),
                       p.corner_overshoot_cap)
            raw[c] = raw[c] + d / norm * push
            corner_points.append(raw[c].copy())
        pts, s = _resample_polyline(raw, p.resample_step)
        total = s[-1]
        fld = np.zeros(len(s))
        for m in range(1, 5):
            fld += rng.normal(0.0, p.distortion_amp / m) * np.sin(math.pi * m * s / total)
        # one guaranteed misremembered bend: fixed amplitude, random phase
        fld += 0.5 * p.distortion_amp * np.sin(
            2.5 * math.pi * s / total + rng.uniform(0.0, 2.0 * math.pi))
        weave_amp = p.weave_amp * (0.7 + 0.6 * rng.random())
        phase = rng.uniform(0.0, 2.0 * math.pi)
        fld += weave_amp * np.sin(2.0 * math.pi * s / p.weave_wavelength + phase)
        offset = np.clip(sigma * fld, -p.clip_offset, p.clip_offset)
        taper = np.minimum(1.0, np.minimum(s, total - s) / 1.5)
        # calm the field near corners, where lateral clearance is spent on
        # the late-turn push already
        for cp in corner_points:
            d = np.hypot(pts[:, 0] - cp[0], pts[:, 1] - cp[1])
            taper = np.minimum(taper, np.clip(0.4 + d / p.corner_calm, 0.4, 1.0))
        offset *= taper
        aim = pts + _normals(pts) * offset[:, None]
        return self._keep_off_walls(aim)

    def _keep_off_walls(self, aim: np.ndarray) -> np.ndarray:
        """Pull any aim point with insufficient wall clearance back toward
        the true track, which always has full corridor clearance."""
        walls = self.world.walls_array()
        if len(walls) == 0:
            return aim
        from .metrics import _Poly

        margin = self.cfg.vehicle.body_radius + self.params.wall_margin
        true_path = _Poly(self.world.path_array(), 1e-9)
        for i in range(len(aim)):
            x, y = aim[i]
            if kernels.first_contact(x, y, margin, walls) is None:
                continue
            _, _, anchor = true_path.project((x, y))
            for _ in range(12):
                x = 0.7 * x + 0.3 * anchor[0]
                y = 0.7 * y + 0.3 * anchor[1]
                if kernels.first_contact(x, y, margin, walls) is None:
                    break
            aim[i] = (x, y)
        return aim

    def generate(self, sigma: float, seed: int) -> GestureScript:
        """Run the noisy expert once and record its gesture stream."""
        p = self.params
        cfg = self.cfg
        rng = np.random.default_rng([int(seed), 9173])
        track = self.aim_track(sigma, rng)
        delays = np.minimum(np.abs(rng.standard_normal(4096)) * p.reaction_delay * sigma,
                            p.reaction_delay_cap)

        session = TrialSession(cfg, self.world, self.model, trial_id="learner")
        dt = cfg.dt
        decision_ticks = max(1, int(round(p.decision_period / dt)))
        look_pts = max(1, int(round(p.lookahead / p.resample_step)))
        rest_ticks = int(round(p.pump_rest / dt))
        pumps = {g: _Pump(p.pump_rise, rest_ticks) for g in (
            "right_shoulder_protract", "left_shoulder_protract",
            "right_elbow_flex", "left_elbow_flex")}

        events = []
        pending = deque()
        idx_prev = 0
        decision = 0
        contacts_seen = 0
        recovering = False
        while session.running:
            k = session.k
            if k % decision_ticks == 0:
                if len(session.contacts) > contacts_seen:
                    contacts_seen = len(session.contacts)
                    recovering = True
                plan, idx_prev, recovering = self._decide(
                    session, track, idx_prev, look_pts, recovering)
                # executed late: reaction time scales with sigma
                delay = int(round(delays[decision % len(delays)] / dt))
                decision += 1
                pending.append((k + delay, plan))
            while pending and pending[0][0] <= k:
                plan = pending.popleft()[1]
                for g, pump in pumps.items():
                    pump.strength = plan.get(g, 0.0)
            intensities = {}
            for g, pump in pumps.items():
                level = pump.level(dt)
                if level > 0.0:
                    intensities[g] = level
            events.append(GestureCommand.clamped(k * dt, intensities))
            session.tick(intensities)
        # trailing event so a batch replay covers the final step's frame clock
        events.append(GestureCommand.clamped(session.k * dt, {}))
        return GestureScript(events)

    def _decide(self, session: TrialSession, track: np.ndarray, idx_prev: int,
                look_pts: int, recovering: bool):
        p = self.params
        x, y, th = session.x, session.y, session.th
        lo = max(0, idx_prev - 10)
        hi = min(len(track), idx_prev + 80)
        window = track[lo:hi]
        d2 = (window[:, 0] - x) ** 2 + (window[:, 1] - y) ** 2
        idx = lo + int(np.argmin(d2))
        target = track[min(idx + look_pts, len(track) - 1)]
        alpha = kernels.normalize_angle(math.atan2(target[1] - y, target[0] - x) - th)
        u1 = session.cstate.u1

        if recovering:
            # wedged against a wall: kill the speed, then rotate toward the
            # track while creeping in whichever direction leads away from
            # the contact point (in stop mode any wallward velocity freezes
            # the whole step, rotation included)
            if abs(u1) > 0.10:
                brake = "left_elbow_flex" if u1 > 0 else "right_elbow_flex"
                return {brake: 1.0}, idx, True
            if abs(alpha) > 0.25:
                plan = {}
                cx, cy = session.contacts[-1][2], session.contacts[-1][3]
                outward = ((x - cx) * math.cos(th) + (y - cy) * math.sin(th)) > 0
                lo, hi = (0.02, 0.06) if outward else (-0.06, -0.02)
                if u1 < lo:
                    plan["right_elbow_flex"] = 1.0
                elif u1 > hi:
                    plan["left_elbow_flex"] = 1.0
                side = ("right_shoulder_protract" if alpha > 0
                        else "left_shoulder_protract")
                plan[side] = 1.0
                return plan, idx, True
            recovering = False

        plan = {}
        if abs(alpha) > p.turn_deadband:
            side = ("right_shoulder_protract" if alpha > 0
                    else "left_shoulder_protract")
            plan[side] = min(1.0, abs(alpha) / 0.45)
        target_u1 = p.cruise if abs(alpha) < 0.3 else p.slow
        if u1 < target_u1 - 0.02:
            plan["right_elbow_flex"] = min(1.0, (target_u1 - u1) * 6.0)
        elif u1 > target_u1 + 0.07:
            plan["left_elbow_flex"] = min(1.0, (u1 - target_u1) * 6.0)
        return plan, idx, recovering


def learner_suite(sigmas=(1.0, 0.5, 0.25, 0.1), seed: int = 0, cfg=None,
                  world: World = None, model: CalibrationModel = None,
                  params: LearnerParams = None) -> list:
    """One practice session: a trial per sigma, highest noise first."""
    from .session import SessionConfig, calibrated_config, resolve_calibration
    from .trial import run_scripted_trial
    from .worlds import resolve_world

    if cfg is None:
        from .sensors import SignalModelParams

        cfg = SessionConfig(world="builtin:corridor", timeout=180.0, seed=seed,
                            signal=SignalModelParams(sample_rate=50.0))
        cfg = calibrated_config(cfg)
    world = world or resolve_world(cfg.world)
    model = model or resolve_calibration(cfg.calibration, cfg.signal)
    learner = ScriptedLearner(cfg, world, model, params)
    records = []
    for i, sigma in enumerate(sigmas):
        script = learner.generate(sigma, seed)
        rec = run_scripted_trial(cfg, world, model, script,
                                 trial_id=f"trial-{i + 1:03d}")
        records.append(rec)
    return records
