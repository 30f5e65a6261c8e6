import math

import numpy as np
import pytest

from bodywheel.calibration import (
    fit_calibration,
    load_calibration,
    project,
    save_calibration,
)
from bodywheel.errors import (
    CalibrationWindowError,
    DegenerateCalibrationError,
    DimensionMismatchError,
)
from bodywheel.sensors import PC_GROUPS, ChannelLayout, SensorFrame


def tiny_layout(k=2):
    groups = {name: list(range(i * k, (i + 1) * k)) for i, name in enumerate(PC_GROUPS)}
    return ChannelLayout(total_channels=4 * k, groups=groups)


def frames_from_matrix(data, dt=0.01):
    return [SensorFrame(i * dt, row) for i, row in enumerate(np.asarray(data, float))]


def test_perfectly_correlated_pair(rng):
    layout = tiny_layout(2)
    n = 4
    data = rng.normal(size=(n, 8))
    data[:, 0] = [1, 2, 3, 4]
    data[:, 1] = [1, 2, 3, 4]
    model = fit_calibration(frames_from_matrix(data), layout)
    g = model.groups["right_shoulder"]
    assert np.allclose(np.abs(g.axis), [1 / math.sqrt(2)] * 2, atol=1e-12)
    assert g.axis[0] > 0  # sign convention: leading component positive
    assert g.explained_variance_ratio == pytest.approx(1.0, abs=1e-12)


def test_isotropic_group_ratio_tends_to_one_over_k(rng):
    k = 6
    layout = tiny_layout(k)
    data = rng.normal(size=(20000, 4 * k))
    model = fit_calibration(frames_from_matrix(data, dt=0.001), layout)
    for name in PC_GROUPS:
        assert model.groups[name].explained_variance_ratio == pytest.approx(
            1.0 / k, rel=0.1)


def test_fit_matches_eigendecomposition_oracle(rng):
    # independent oracle: numpy.cov + eigh on the same samples
    layout = tiny_layout(5)
    mixing = rng.normal(size=(20, 5, 5))
    data = np.concatenate(
        [rng.normal(size=(400, 5)) @ mixing[i % 20] for i in range(4)], axis=1)
    model = fit_calibration(frames_from_matrix(data), layout)
    for gi, name in enumerate(PC_GROUPS):
        block = data[:, layout.groups[name]]
        cov = np.cov(block, rowvar=False)
        evals, evecs = np.linalg.eigh(cov)
        want_axis = evecs[:, -1]
        got = model.groups[name]
        dot = abs(float(np.dot(want_axis, got.axis)))
        assert dot == pytest.approx(1.0, abs=1e-9)
        assert got.explained_variance_ratio == pytest.approx(
            evals[-1] / evals.sum(), rel=1e-9)


def test_bundled_recording_ratios_exceed_claim(model):
    # first PC captures most of each joint group's variance
    for name in PC_GROUPS:
        assert model.groups[name].explained_variance_ratio >= 0.75


def test_projection_matches_dense_oracle(model, bundled_recording, rng):
    layout = model.layout
    dense = np.zeros((4, layout.total_channels))
    mean = np.zeros(layout.total_channels)
    for gi, name in enumerate(PC_GROUPS):
        idx = layout.groups[name]
        dense[gi, idx] = model.groups[name].axis
        mean[idx] = model.groups[name].mean
    for _ in range(50):
        v = rng.normal(loc=1.0, scale=2.0, size=layout.total_channels)
        want = dense @ (v - mean)
        got = model.project_values(v)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_projection_centering_and_unit_axis(model):
    layout = model.layout
    mean_frame = np.zeros(layout.total_channels)
    for name in PC_GROUPS:
        mean_frame[layout.groups[name]] = model.groups[name].mean
    h = model.project_values(mean_frame)
    assert np.allclose(h, 0.0, atol=1e-12)

    for gi, name in enumerate(PC_GROUPS):
        v = mean_frame.copy()
        v[layout.groups[name]] += model.groups[name].axis
        h = model.project_values(v)
        assert h[gi] == pytest.approx(1.0, abs=1e-12)


def test_rotation_invariance_up_to_sign(rng):
    k = 4
    layout = tiny_layout(k)
    base = rng.normal(size=(500, k)) * np.array([3.0, 1.0, 0.5, 0.2])
    data = np.tile(base, (1, 4))
    m1 = fit_calibration(frames_from_matrix(data), layout)

    q, _ = np.linalg.qr(rng.normal(size=(k, k)))
    rotated = data.copy()
    idx = layout.groups["left_elbow"]
    rotated[:, idx] = data[:, idx] @ q.T
    m2 = fit_calibration(frames_from_matrix(rotated), layout)

    a1 = m1.groups["left_elbow"].axis
    a2 = m2.groups["left_elbow"].axis
    assert abs(float(np.dot(q @ a1, a2))) == pytest.approx(1.0, abs=1e-9)
    assert m1.groups["left_elbow"].explained_variance_ratio == pytest.approx(
        m2.groups["left_elbow"].explained_variance_ratio, rel=1e-9)


def test_channel_scaling_scales_projection(rng):
    layout = tiny_layout(3)
    data = rng.normal(size=(300, 12)) @ rng.normal(size=(12, 12))
    m1 = fit_calibration(frames_from_matrix(data), layout)
    c = 3.7
    scaled = data.copy()
    idx = layout.groups["right_elbow"]
    scaled[:, idx] *= c
    m2 = fit_calibration(frames_from_matrix(scaled), layout)
    assert np.allclose(np.abs(m2.groups["right_elbow"].axis),
                       np.abs(m1.groups["right_elbow"].axis), atol=1e-9)
    v = rng.normal(size=12)
    v2 = v.copy()
    v2[idx] = (v[idx] - m1.groups["right_elbow"].mean) * c + m2.groups["right_elbow"].mean
    h1 = m1.project_values(v)[2]
    h2 = m2.project_values(v2)[2]
    assert h2 == pytest.approx(c * h1, rel=1e-9) or h2 == pytest.approx(-c * h1, rel=1e-9)


def test_window_too_short(rng):
    layout = tiny_layout(4)
    data = rng.normal(size=(5, 16))
    with pytest.raises(CalibrationWindowError):
        fit_calibration(frames_from_matrix(data), layout)


def test_zero_variance_group_degenerate(rng):
    layout = tiny_layout(2)
    data = rng.normal(size=(30, 8))
    data[:, layout.groups["left_shoulder"]] = 5.0
    with pytest.raises(DegenerateCalibrationError):
        fit_calibration(frames_from_matrix(data), layout)


def test_dimension_mismatch(model):
    with pytest.raises(DimensionMismatchError):
        model.project_values(np.zeros(13))


def test_near_degenerate_top_eigenvalues_flagged_unstable(rng):
    layout = tiny_layout(2)
    n = 40
    data = rng.normal(size=(n, 8))
    # right_shoulder block: the exact 4-cycle (1,0),(0,1),(-1,0),(0,-1) has a
    # perfectly isotropic covariance, so the top eigengap is zero
    cycle = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    data[:, :2] = np.tile(cycle, (n // 4, 1))
    model = fit_calibration(frames_from_matrix(data), layout)
    assert model.groups["right_shoulder"].unstable
    assert not model.groups["left_elbow"].unstable  # generic data is fine


def test_save_load_round_trip(tmp_path, model, bundled_recording):
    path = tmp_path / "m.bcal"
    save_calibration(path, model)
    back = load_calibration(path)
    frame = bundled_recording.frames[100]
    assert np.array_equal(project(frame, model), project(frame, back))
    assert back.provenance["recording_sha256"] == model.provenance["recording_sha256"]
