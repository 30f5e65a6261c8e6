"""bodywheel: a body-machine-interface wheelchair training simulator.

Signal chain: synthetic sensor shirt -> per-joint PCA -> rectified-derivative
control mapping -> unicycle kinematics in a walled 2D world -> path-error
scoring, with a live session server and batch CLI on top.
"""

from .calibration import (
    CalibrationModel,
    fit_calibration,
    load_calibration,
    project,
    save_calibration,
)
from .gestures import GestureScript, resolve_script, uninstructed_script
from .kernels import BACKEND as KERNEL_BACKEND
from .kinematics import (
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
from .metrics import MetricReport, area_error, path_length, polyline_intersections
from .pipeline import (
    ControlState,
    PipelineConfig,
    derive_pipeline_config,
    rectified_derivative,
    run_pipeline,
    step_controls,
)
from .recordings import Recording, read_recording, recording_sha256, write_recording
from .sensors import (
    ChannelLayout,
    GestureCommand,
    SensorFrame,
    SignalModelParams,
    SignalSynthesizer,
)
from .session import (
    SessionConfig,
    calibrated_config,
    learning_curve,
    resolve_calibration,
    run_session_trial,
    uninstructed_recording,
)
from .trial import TrialRecord, TrialSession, run_frames_trial, run_scripted_trial
from .worlds import corridor, doorway, open_room, resolve_world

__version__ = "0.1.0"
