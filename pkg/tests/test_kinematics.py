import math

import numpy as np
import pytest

from bodywheel import kernels
from bodywheel.errors import ValidationError, WorldError
from bodywheel.kinematics import (
    Goal,
    Pose,
    VehicleParams,
    World,
    check_collision,
    load_world,
    save_world,
    step_pose,
    world_sha256,
)
from bodywheel.trial import simulate_controls
from bodywheel.worlds import corridor, doorway, open_room, resolve_world


def test_zero_input_holds_pose():
    p = Pose(1.0, 2.0, 0.7)
    q = step_pose(p, 0.0, 0.0, VehicleParams(), 0.1)
    assert (q.x, q.y, q.theta) == (1.0, 2.0, 0.7)


def test_axis_aligned_straight_motion():
    q = step_pose(Pose(0, 0, 0), 1.0, 0.0, VehicleParams(v_f=1.0), 0.1)
    assert abs(q.x - 0.1) <= 1e-12
    assert abs(q.y) <= 1e-12
    assert abs(q.theta) <= 1e-12


def test_rotated_frame_straight_motion():
    q = step_pose(Pose(0, 0, math.pi / 2), 1.0, 0.0, VehicleParams(v_f=1.0), 0.1)
    assert abs(q.x) <= 1e-12
    assert abs(q.y - 0.1) <= 1e-12
    assert abs(q.theta - math.pi / 2) <= 1e-12


def test_pure_rotation_keeps_position_exactly():
    q = step_pose(Pose(3.25, -1.5, 0.1), 0.0, 1.0, VehicleParams(v_r=math.pi), 0.5)
    assert q.x == 3.25 and q.y == -1.5
    assert abs(q.theta - (0.1 + math.pi / 2)) <= 1e-12


def test_theta_normalized_into_half_open_interval():
    p = Pose(0, 0, 0)
    vp = VehicleParams(v_r=3.0)
    for _ in range(500):
        p = step_pose(p, 0.0, 1.0, vp, 0.05)
        assert -math.pi < p.theta <= math.pi
    assert Pose(0, 0, 7 * math.pi).theta == pytest.approx(math.pi, abs=1e-12)


def test_arc_length_matches_speed_integral():
    rng = np.random.default_rng(3)
    u1s = rng.uniform(-1, 1, size=400)
    u2s = np.zeros(400)
    vp = VehicleParams(v_f=1.3)
    w = World(id="empty", walls=[], path=[(0, 0), (1, 0)],
              start=Pose(0, 0, 0.3), goal=Goal(1e6, 0, 0.1))
    traj, _, _ = simulate_controls(w, vp, u1s, u2s, 0.02, use_goal=False)
    steps = np.hypot(np.diff(traj[:, 1]), np.diff(traj[:, 2]))
    want = np.abs(u1s) * vp.v_f * 0.02
    assert np.allclose(steps, want, rtol=1e-12, atol=1e-15)


def test_validation_errors():
    with pytest.raises(ValidationError):
        step_pose(Pose(0, 0, 0), 1.2, 0.0, VehicleParams(), 0.1)
    with pytest.raises(ValidationError):
        step_pose(Pose(0, 0, 0), 0.5, 0.0, VehicleParams(), 0.0)
    with pytest.raises(ValidationError):
        VehicleParams(v_f=0.0)
    with pytest.raises(WorldError):
        World(id="w", walls=[], path=[(0, 0)], start=Pose(0, 0, 0),
              goal=Goal(1, 0, 0.1))


def test_first_contact_examples():
    vp = VehicleParams(body_radius=0.5)
    empty = World(id="e", walls=[], path=[(0, 0), (1, 0)],
                  start=Pose(0, 0, 0), goal=Goal(1, 0, 0.1))
    assert check_collision(Pose(0, 0, 0), vp, empty) is None

    w = World(id="w", walls=[(0.3, -1.0, 0.3, 1.0)], path=[(0, 0), (1, 0)],
              start=Pose(-2, 0, 0), goal=Goal(1, 0, 0.1))
    hit = check_collision(Pose(0, 0, 0), vp, w)
    assert hit is not None
    assert hit.wall_index == 0
    assert hit.point == pytest.approx((0.3, 0.0))
    assert hit.distance == pytest.approx(0.3)


def test_first_contact_matches_bruteforce_oracle(rng):
    walls = rng.uniform(-5, 5, size=(40, 4))
    radius = 0.4

    def oracle(px, py):
        for i, (x1, y1, x2, y2) in enumerate(walls):
            dx, dy = x2 - x1, y2 - y1
            l2 = dx * dx + dy * dy
            t = 0.0 if l2 == 0 else max(0.0, min(1.0, ((px - x1) * dx + (py - y1) * dy) / l2))
            cx, cy = x1 + t * dx, y1 + t * dy
            if math.hypot(px - cx, py - cy) <= radius:
                return i
        return None

    for _ in range(1000):
        px, py = rng.uniform(-6, 6, size=2)
        got = kernels.first_contact(px, py, radius, walls)
        want = oracle(px, py)
        assert (got[0] if got else None) == want


def test_stop_mode_never_penetrates():
    w = doorway()
    vp = VehicleParams(body_radius=0.35)
    rng = np.random.default_rng(11)
    u1s = np.clip(rng.normal(0.6, 0.4, size=2000), -1, 1)
    u2s = np.clip(rng.normal(0.0, 0.5, size=2000), -1, 1)
    traj, contacts, _ = simulate_controls(w, vp, u1s, u2s, 0.02, use_goal=False)
    assert len(contacts) > 0  # the random walk must actually reach a wall
    walls = w.walls_array()
    for x, y in traj[:, 1:3]:
        hit = kernels.first_contact(x, y, vp.body_radius - 1e-9, walls)
        assert hit is None


def test_slide_mode_moves_along_wall():
    w = World(id="wall", walls=[(1.0, -5.0, 1.0, 5.0)], path=[(0, 0), (1, 0)],
              start=Pose(0.0, 0.0, 0.5), goal=Goal(50, 0, 0.1))
    vp = VehicleParams(v_f=1.0, body_radius=0.35)
    n = 300
    u1s = np.ones(n)
    u2s = np.zeros(n)
    stopped, _, _ = simulate_controls(w, vp, u1s, u2s, 0.02, collision="stop",
                                      use_goal=False)
    slid, _, _ = simulate_controls(w, vp, u1s, u2s, 0.02, collision="slide",
                                   use_goal=False)
    # heading up-right into the wall: stop pins both coordinates, slide climbs
    assert slid[-1, 2] > stopped[-1, 2] + 1.0
    assert np.max(slid[:, 1]) <= 1.0 - vp.body_radius + 1e-9


def test_rigid_motion_equivariance():
    rng = np.random.default_rng(21)
    u1s = rng.uniform(-1, 1, 500)
    u2s = rng.uniform(-1, 1, 500)
    vp = VehicleParams()
    base = World(id="b", walls=[(2.0, -1.0, 3.0, 4.0)], path=[(0, 0), (4, 0)],
                 start=Pose(0, 0, 0.2), goal=Goal(100, 0, 0.1))
    traj, _, _ = simulate_controls(base, vp, u1s, u2s, 0.02, use_goal=False)

    ang, tx, ty = 1.1, -3.0, 2.5
    c, s = math.cos(ang), math.sin(ang)

    def xf(x, y):
        return (c * x - s * y + tx, s * x + c * y + ty)

    moved = World(
        id="b",
        walls=[xf(w[0], w[1]) + xf(w[2], w[3]) for w in base.walls],
        path=[xf(*p) for p in base.path],
        start=Pose(*xf(0, 0), 0.2 + ang),
        goal=Goal(*xf(100, 0), 0.1))
    traj2, _, _ = simulate_controls(moved, vp, u1s, u2s, 0.02, use_goal=False)
    for row, row2 in zip(traj, traj2):
        wx, wy = xf(row[1], row[2])
        assert abs(row2[1] - wx) <= 1e-9
        assert abs(row2[2] - wy) <= 1e-9
        dth = kernels.normalize_angle(row2[3] - (row[3] + ang))
        assert abs(dth) <= 1e-9


def test_fixed_step_convergence_first_order():
    vp = VehicleParams(v_f=1.0, v_r=1.0)
    w = open_room()

    def final_pose(dt):
        n = int(round(5.0 / dt))
        ts = np.arange(n) * dt
        u1s = 0.7 + 0.25 * np.sin(0.9 * ts)
        u2s = 0.8 * np.sin(0.6 * ts + 0.4)
        traj, _, _ = simulate_controls(w, vp, u1s, u2s, dt, use_goal=False)
        return traj[-1, 1:4]

    ref = final_pose(0.000625)
    errs = {dt: np.linalg.norm(final_pose(dt)[:2] - ref[:2])
            for dt in (0.04, 0.02, 0.01, 0.005)}
    for dt in (0.04, 0.02, 0.01):
        ratio = errs[dt] / errs[dt / 2]
        assert 1.8 <= ratio <= 2.2, (dt, ratio)


def test_world_files_round_trip(tmp_path):
    w = corridor()
    path = tmp_path / "c.bworld"
    save_world(path, w)
    back = load_world(path)
    assert back.to_dict() == w.to_dict()
    assert world_sha256(back) == world_sha256(w)
    assert resolve_world("builtin:corridor").id == "corridor"
    assert resolve_world(str(path)).id == "corridor"


def test_builtin_worlds_validate():
    vp = VehicleParams()
    for w in (corridor(), doorway(), open_room()):
        w.validate_start(vp)
        assert len(w.path) >= 2
