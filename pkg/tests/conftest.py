import numpy as np
import pytest

from bodywheel.calibration import fit_calibration
from bodywheel.sensors import ChannelLayout, SignalModelParams
from bodywheel.session import uninstructed_recording


@pytest.fixture(scope="session")
def layout():
    return ChannelLayout()


@pytest.fixture(scope="session")
def quiet_params():
    return SignalModelParams(noise_std=0.0, drift_rate=0.0)


@pytest.fixture(scope="session")
def bundled_recording():
    return uninstructed_recording()


@pytest.fixture(scope="session")
def model(bundled_recording):
    return fit_calibration(bundled_recording)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
