"""Cross-backend checks: the compiled kernels must reproduce the pure-Python
fallback bit for bit, so persisted trial records never depend on which
backend produced them."""

import numpy as np
import pytest

from bodywheel.kernels import _pure

try:
    from bodywheel.kernels import _native
except ImportError:
    _native = None

needs_native = pytest.mark.skipif(_native is None,
                                  reason="compiled kernels not built")
BACKENDS = [_pure] if _native is None else [_pure, _native]


@needs_native
def test_unicycle_step_bitwise(rng):
    for _ in range(2000):
        args = (rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-4, 4),
                rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 3),
                rng.uniform(0.1, 3), rng.uniform(1e-3, 0.1))
        assert _pure.unicycle_step(*args) == _native.unicycle_step(*args)
        assert _pure.normalize_angle(args[2] * 7) == _native.normalize_angle(args[2] * 7)


@needs_native
def test_contact_and_steps_bitwise(rng):
    walls = rng.uniform(-4, 4, size=(25, 4))
    for _ in range(1500):
        px, py = rng.uniform(-5, 5, size=2)
        r = rng.uniform(0.05, 1.5)
        assert _pure.first_contact(px, py, r, walls) == _native.first_contact(
            px, py, r, walls)
    for mode in (0, 1):
        for _ in range(500):
            args = (rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-3, 3),
                    rng.uniform(-1, 1), rng.uniform(-1, 1), 1.5, 1.5, 0.02,
                    walls, 0.35, mode)
            assert _pure.step_with_walls(*args) == _native.step_with_walls(*args)


@needs_native
def test_simulate_bitwise(rng):
    walls = np.array([[2.0, -3.0, 2.0, 3.0], [-3.0, 2.5, 3.0, 2.5]])
    n = 3000
    u1s = rng.uniform(-1, 1, n)
    u2s = rng.uniform(-1, 1, n)
    for mode in (0, 1):
        for goal in (None, (1.5, 1.5, 0.4)):
            a = _pure.simulate(0.0, 0.0, 0.1, u1s, u2s, 1.5, 1.2, 0.02,
                               walls, 0.3, mode, goal)
            b = _native.simulate(0.0, 0.0, 0.1, u1s, u2s, 1.5, 1.2, 0.02,
                                 walls, 0.3, mode, goal)
            for x, y in zip(a[:4], b[:4]):
                assert np.array_equal(x, y)
            assert a[4] == b[4]  # contacts
            assert a[5] == b[5] and a[6] == b[6]


@needs_native
def test_pipeline_bitwise(rng):
    n = 4000
    ts = np.cumsum(rng.uniform(0.005, 0.03, n))
    pcs = np.cumsum(rng.normal(0, 0.1, size=(n, 4)), axis=0)
    args = (pcs, ts, 0.05, 5, 1.3, 0.8, 0.02, 1.0)
    a = _pure.pipeline_steps(*args)
    b = _native.pipeline_steps(*args)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])

    # scalar step parity including the warm-up region
    state_a = (0.0, 0.0, None, 0.0, [])
    state_b = (0.0, 0.0, None, 0.0, [])
    for k in range(200):
        h = [float(v) for v in pcs[k]]
        state_a = _pure.pipeline_step(state_a[0], state_a[1], state_a[2],
                                      state_a[3], state_a[4], *h, float(ts[k]),
                                      0.05, 5, 1.3, 0.8, 0.02, 1.0)
        state_b = _native.pipeline_step(state_b[0], state_b[1], state_b[2],
                                        state_b[3], state_b[4], *h, float(ts[k]),
                                        0.05, 5, 1.3, 0.8, 0.02, 1.0)
        assert state_a[:4] == state_b[:4]


@needs_native
def test_segment_candidates_bitwise(rng):
    for _ in range(30):
        a = rng.uniform(-3, 3, size=(14, 4))
        b = rng.uniform(-3, 3, size=(11, 4))
        assert _pure.segment_candidates(a, b, 1e-9) == _native.segment_candidates(
            a, b, 1e-9)
    # collinear overlaps
    a = np.array([[0.0, 0.0, 4.0, 0.0]])
    b = np.array([[1.0, 0.0, 2.0, 0.0], [6.0, 0.0, 7.0, 0.0]])
    assert _pure.segment_candidates(a, b, 1e-9) == _native.segment_candidates(
        a, b, 1e-9)


@needs_native
def test_full_trial_identical_across_backends(monkeypatch):
    # same seeded scripted trial through both backends, byte for byte
    import importlib

    import bodywheel.kernels as kernels_pkg
    from bodywheel.gestures import pump_script
    from bodywheel.sensors import SignalModelParams
    from bodywheel.session import SessionConfig, calibrated_config, resolve_calibration
    from bodywheel.trial import run_scripted_trial
    from bodywheel.worlds import resolve_world

    cfg = calibrated_config(SessionConfig(
        world="builtin:corridor", timeout=8.0, seed=33,
        signal=SignalModelParams(sample_rate=50.0)))
    world = resolve_world(cfg.world)
    model = resolve_calibration(cfg.calibration, cfg.signal)
    script = pump_script("right_elbow_flex", duration=8.0, sample_rate=50.0)

    records = {}
    for impl, name in ((_pure, "pure"), (_native, "native")):
        for fn in ("normalize_angle", "unicycle_step", "point_segment_distance",
                   "first_contact", "step_with_walls", "simulate",
                   "pipeline_step", "pipeline_steps", "segment_candidates"):
            monkeypatch.setattr(kernels_pkg, fn, getattr(impl, fn))
        records[name] = run_scripted_trial(cfg, world, model, script,
                                           trial_id="x").serialize()
    assert records["pure"] == records["native"]
