import numpy as np
import pytest

from bodywheel.learner import LearnerParams, ScriptedLearner, learner_suite
from bodywheel.sensors import SignalModelParams
from bodywheel.session import SessionConfig, calibrated_config, learning_curve, resolve_calibration
from bodywheel.trial import run_scripted_trial
from bodywheel.worlds import resolve_world


@pytest.fixture(scope="module")
def learner_cfg():
    cfg = SessionConfig(world="builtin:corridor", timeout=180.0, seed=4,
                        signal=SignalModelParams(sample_rate=50.0))
    return calibrated_config(cfg)


def test_aim_track_scales_with_sigma(learner_cfg):
    world = resolve_world("builtin:corridor")
    model = resolve_calibration(learner_cfg.calibration, learner_cfg.signal)
    learner = ScriptedLearner(learner_cfg, world, model)
    from bodywheel.metrics import _Poly

    true_path = _Poly(world.path_array(), 1e-9)
    tracks = {}
    dev = {}
    for sigma in (0.5, 1.0):
        rng = np.random.default_rng([4, 9173])
        tracks[sigma] = learner.aim_track(sigma, rng)
        dev[sigma] = max(true_path.project(p)[0] for p in tracks[sigma])
    assert dev[1.0] > dev[0.5] > 0.05
    # hard clearance bound survives the distortion
    walls = world.walls_array()
    from bodywheel import kernels

    for x, y in tracks[1.0]:
        assert kernels.first_contact(x, y, 0.35, walls) is None


def test_script_replay_reproduces_internal_run(learner_cfg):
    world = resolve_world("builtin:corridor")
    model = resolve_calibration(learner_cfg.calibration, learner_cfg.signal)
    learner = ScriptedLearner(learner_cfg, world, model)
    script = learner.generate(0.5, 4)
    rec = run_scripted_trial(learner_cfg, world, model, script, trial_id="replayed")
    assert rec.stop_reason == "goal"
    # drives the whole corridor
    assert rec.metrics.dist > 18.0


def test_suite_is_deterministic(learner_cfg):
    a = learner_suite(sigmas=(0.5, 0.25), seed=4, cfg=learner_cfg)
    b = learner_suite(sigmas=(0.5, 0.25), seed=4, cfg=learner_cfg)
    assert [r.serialize() for r in a] == [r.serialize() for r in b]


def test_learning_trend_single_seed(learner_cfg):
    recs = learner_suite(seed=4, cfg=learner_cfg)
    series = learning_curve(recs)
    e = [row[2] for row in series]
    d = [row[1] for row in series]
    assert all(r.stop_reason == "goal" for r in recs)
    assert all(e[i + 1] < e[i] for i in range(len(e) - 1))
    assert all(d[i + 1] < d[i] for i in range(len(d) - 1))


def test_custom_params_respected(learner_cfg):
    world = resolve_world("builtin:corridor")
    model = resolve_calibration(learner_cfg.calibration, learner_cfg.signal)
    params = LearnerParams(corner_overshoot=0.0, distortion_amp=0.0,
                           weave_amp=0.0, reaction_delay=0.0)
    learner = ScriptedLearner(learner_cfg, world, model, params)
    rng = np.random.default_rng([4, 9173])
    track = learner.aim_track(1.0, rng)
    base = learner.aim_track(0.0, np.random.default_rng([4, 9173]))
    assert np.abs(track - base).max() < 1e-12
