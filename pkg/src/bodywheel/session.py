"""Session configuration, reference resolution, and trial-series analysis."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .calibration import CalibrationModel, fit_calibration, load_calibration
from .errors import ConfigError, MalformedHeaderError
from .gestures import resolve_script, uninstructed_script
from .kinematics import VehicleParams, World
from .pipeline import PipelineConfig, derive_pipeline_config
from .recordings import Recording, read_recording
from .sensors import ChannelLayout, SignalModelParams, SignalSynthesizer
from .worlds import resolve_world

MODES = ("scripted", "replay", "live")
PACINGS = ("fast", "realtime", "lockstep")

# Seed of the bundled synthetic uninstructed-movement recording backing
# "builtin:uninstructed" calibration references.
DEFAULT_CALIBRATION_SEED = 101


@dataclass(frozen=True)
class SessionConfig:
    world: str = "builtin:corridor"
    calibration: str = "builtin:uninstructed"
    script: str = ""  # scripted mode: builtin:<name> or .bgest path
    recording: str = ""  # replay mode: .bsr path
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    signal: SignalModelParams = field(default_factory=SignalModelParams)
    dt: float = 0.02
    mode: str = "scripted"
    seed: int = 0
    timeout: float = 60.0
    collision: str = "stop"
    pacing: str = "fast"
    data_dir: str = ""

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if self.timeout <= 0:
            raise ConfigError("timeout must be > 0")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.collision not in ("stop", "slide"):
            raise ConfigError("collision must be stop or slide")
        if self.pacing not in PACINGS:
            raise ConfigError(f"pacing must be one of {PACINGS}")

    def to_dict(self) -> dict:
        return {
            "world": self.world,
            "calibration": self.calibration,
            "script": self.script,
            "recording": self.recording,
            "vehicle": self.vehicle.to_dict(),
            "pipeline": self.pipeline.to_dict(),
            "signal": self.signal.to_dict(),
            "dt": self.dt,
            "mode": self.mode,
            "seed": self.seed,
            "timeout": self.timeout,
            "collision": self.collision,
            "pacing": self.pacing,
            "data_dir": self.data_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        d = dict(d)
        if "vehicle" in d:
            d["vehicle"] = VehicleParams.from_dict(d["vehicle"])
        if "pipeline" in d:
            d["pipeline"] = PipelineConfig.from_dict(d["pipeline"])
        if "signal" in d:
            d["signal"] = SignalModelParams.from_dict(d["signal"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path, **overrides) -> "SessionConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise MalformedHeaderError(f"{path}: not a session config: {e}") from e
        doc.update(overrides)
        return cls.from_dict(doc)

    def replace(self, **kw) -> "SessionConfig":
        import dataclasses

        return dataclasses.replace(self, **kw)


def uninstructed_recording(signal: SignalModelParams = None,
                           layout: ChannelLayout = None,
                           seed: int = DEFAULT_CALIBRATION_SEED,
                           duration: float = 10.0) -> Recording:
    """The bundled synthetic uninstructed-movement recording, generated
    deterministically from the default signal model."""
    signal = signal or SignalModelParams()
    layout = layout or ChannelLayout()
    script = uninstructed_script(duration=duration,
                                 sample_rate=signal.sample_rate, seed=seed)
    synth = SignalSynthesizer(signal, layout, seed=seed)
    frames = synth.synthesize(script.events)
    return Recording(layout=layout, sample_rate=signal.sample_rate,
                     frames=frames, params_hash=signal.content_hash(layout))


_builtin_model_cache = {}


def resolve_calibration(ref, signal: SignalModelParams = None,
                        layout: ChannelLayout = None) -> CalibrationModel:
    """Resolve a calibration reference: a `.bcal` path or
    ``builtin:uninstructed`` (fit on the bundled synthetic recording).

    Builtin fits are cached per process so every consumer of the same
    reference shares one model object (the fit itself involves LAPACK, whose
    low bits are not guaranteed reproducible across separate allocations).
    """
    ref = str(ref)
    if ref == "builtin:uninstructed":
        signal = signal or SignalModelParams()
        layout = layout or ChannelLayout()
        key = (ref, signal.content_hash(layout))
        if key not in _builtin_model_cache:
            rec = uninstructed_recording(signal, layout)
            _builtin_model_cache[key] = fit_calibration(rec)
        return _builtin_model_cache[key]
    if ref.startswith("builtin:"):
        raise ConfigError(f"unknown builtin calibration {ref!r}")
    if not ref:
        raise ConfigError("config needs a calibration reference")
    return load_calibration(ref)


@dataclass
class ResolvedSession:
    config: SessionConfig
    world: World
    model: CalibrationModel


def resolve_session(cfg: SessionConfig) -> ResolvedSession:
    world = resolve_world(cfg.world)
    model = resolve_calibration(cfg.calibration, cfg.signal, None)
    return ResolvedSession(config=cfg, world=world, model=model)


def run_session_trial(cfg: SessionConfig, trial_id: str = "trial",
                      resolved: ResolvedSession = None):
    """Run one batch trial per the config's mode (scripted or replay)."""
    from .trial import run_frames_trial, run_scripted_trial

    rs = resolved or resolve_session(cfg)
    if cfg.mode == "scripted":
        if not cfg.script:
            raise ConfigError("scripted mode needs a script reference")
        script = resolve_script(cfg.script, seed=cfg.seed,
                                sample_rate=cfg.signal.sample_rate)
        return run_scripted_trial(cfg, rs.world, rs.model, script, trial_id=trial_id)
    if cfg.mode == "replay":
        if not cfg.recording:
            raise ConfigError("replay mode needs a recording reference")
        rec = read_recording(cfg.recording)
        return run_frames_trial(cfg, rs.world, rs.model, rec.frames, trial_id=trial_id)
    raise ConfigError(f"mode {cfg.mode!r} has no batch runner; use the server")


def calibrated_config(base: SessionConfig = None, **kw) -> SessionConfig:
    """Config whose pipeline gains/dead-zone are sized from the calibrated
    chain (full-intensity gesture saturates a control in about a second)."""
    cfg = base or SessionConfig()
    if kw:
        cfg = cfg.replace(**kw)
    model = resolve_calibration(cfg.calibration, cfg.signal, None)
    pcfg = derive_pipeline_config(model, cfg.signal)
    return cfg.replace(pipeline=pcfg)


def learning_curve(records) -> list:
    """Per-trial (trial_id, dist, e_diff) series, in the given trial order."""
    records = list(records)
    if not records:
        return []
    worlds = {r.world_id for r in records}
    if len(worlds) > 1:
        raise ConfigError(f"trials span multiple worlds: {sorted(worlds)}")
    out = []
    for r in records:
        if r.metrics is None:
            raise ConfigError(f"trial {r.trial_id} has no stored metrics")
        out.append((r.trial_id, r.metrics.dist, r.metrics.e_diff))
    return out
