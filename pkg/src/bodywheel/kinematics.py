"""Unicycle wheelchair kinematics inside a 2D walled world.

Discrete law per step: x += v cos(theta) dt, y += v sin(theta) dt, then
theta += omega dt — the heading used for the translation is the one from
the start of the step.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import MalformedHeaderError, ValidationError, WorldError


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float  # radians, normalized to (-pi, pi]

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.theta))):
            raise ValidationError("non-finite pose")
        object.__setattr__(self, "theta", kernels.normalize_angle(self.theta))

    def as_tuple(self):
        return (self.x, self.y, self.theta)


@dataclass(frozen=True)
class VehicleParams:
    v_f: float = 1.5  # max forward velocity, m/s
    v_r: float = 1.5  # max rotational velocity, rad/s
    body_radius: float = 0.35  # collision disc, m

    def __post_init__(self):
        if self.v_f <= 0 or self.v_r <= 0:
            raise ValidationError("V_f and V_r must be > 0")
        if self.body_radius < 0:
            raise ValidationError("body_radius must be >= 0")

    def to_dict(self) -> dict:
        return {"v_f": self.v_f, "v_r": self.v_r, "body_radius": self.body_radius}

    @classmethod
    def from_dict(cls, d: dict) -> "VehicleParams":
        return cls(**d)


@dataclass(frozen=True)
class Goal:
    x: float
    y: float
    radius: float

    def contains(self, x: float, y: float) -> bool:
        dx = x - self.x
        dy = y - self.y
        return dx * dx + dy * dy <= self.radius * self.radius


@dataclass(frozen=True)
class Contact:
    wall_index: int
    point: tuple
    distance: float


@dataclass
class World:
    id: str
    walls: list  # of (x1, y1, x2, y2)
    path: list  # prescribed track: list of (x, y) waypoints
    start: Pose
    goal: Goal

    def __post_init__(self):
        if len(self.path) < 2:
            raise WorldError("prescribed path needs at least 2 waypoints")
        self.walls = [tuple(float(v) for v in w) for w in self.walls]
        for w in self.walls:
            if len(w) != 4 or not all(map(math.isfinite, w)):
                raise WorldError(f"bad wall segment {w!r}")
        self.path = [(float(x), float(y)) for x, y in self.path]

    def walls_array(self) -> np.ndarray:
        return np.array(self.walls, dtype=float).reshape(len(self.walls), 4)

    def path_array(self) -> np.ndarray:
        return np.array(self.path, dtype=float)

    def validate_start(self, vp: VehicleParams) -> None:
        if check_collision(self.start, vp, self) is not None:
            raise WorldError("start pose is in collision")

    def to_dict(self) -> dict:
        return {
            "format": "bworld",
            "version": 1,
            "id": self.id,
            "walls": [list(w) for w in self.walls],
            "path": [list(p) for p in self.path],
            "start": {"x": self.start.x, "y": self.start.y, "theta": self.start.theta},
            "goal": {"x": self.goal.x, "y": self.goal.y, "radius": self.goal.radius},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "World":
        return cls(
            id=str(d["id"]),
            walls=[tuple(w) for w in d.get("walls", [])],
            path=[tuple(p) for p in d["path"]],
            start=Pose(**d["start"]),
            goal=Goal(**d["goal"]),
        )


def step_pose(p: Pose, u1: float, u2: float, vp: VehicleParams, dt: float) -> Pose:
    """One discrete step: v = u1*V_f, omega = u2*V_r."""
    if dt <= 0:
        raise ValidationError("dt must be > 0")
    if not (-1.0 <= u1 <= 1.0 and -1.0 <= u2 <= 1.0):
        raise ValidationError(f"controls ({u1}, {u2}) outside [-1, 1]")
    x, y, th = kernels.unicycle_step(p.x, p.y, p.theta, u1, u2, vp.v_f, vp.v_r, dt)
    return Pose(x, y, th)


def check_collision(p: Pose, vp: VehicleParams, w: World):
    """First wall segment (list order) within body_radius of the pose center."""
    hit = kernels.first_contact(p.x, p.y, vp.body_radius, w.walls_array())
    if hit is None:
        return None
    i, cx, cy, d = hit
    return Contact(wall_index=i, point=(cx, cy), distance=d)


def world_sha256(world: World) -> str:
    blob = json.dumps(world.to_dict(), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def save_world(path, world: World) -> None:
    tmp = str(path) + ".tmp"
    Path(tmp).write_text(json.dumps(world.to_dict(), indent=1, sort_keys=True),
                         encoding="utf-8")
    os.replace(tmp, path)


def load_world(path) -> World:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedHeaderError(f"{path}: not a world file: {e}") from e
    if doc.get("format") != "bworld":
        raise MalformedHeaderError(f"{path}: format field is not 'bworld'")
    return World.from_dict(doc)
