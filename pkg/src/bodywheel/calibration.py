"""Per-joint-group PCA: fit first principal components from an uninstructed
recording, project live frames onto the four retained axes."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CalibrationWindowError,
    DegenerateCalibrationError,
    DimensionMismatchError,
    MalformedHeaderError,
    ValidationError,
)
from .recordings import Recording, recording_sha256
from .sensors import PC_GROUPS, ChannelLayout, SensorFrame

# Eigenvalue gap below this fraction of the covariance trace marks the top
# component as unstable (direction ill-determined); fit succeeds but warns.
EIGENGAP_FLOOR = 1e-9


@dataclass
class GroupCalibration:
    mean: np.ndarray
    axis: np.ndarray  # unit L2 norm
    explained_variance_ratio: float
    sign_flipped: bool = False
    unstable: bool = False

    def project(self, group_values: np.ndarray) -> float:
        # explicit left-fold accumulation: BLAS dot kernels pick summation
        # order by memory alignment, which would leak 1-ulp nondeterminism
        # into persisted trial records
        s = 0.0
        a = self.axis
        m = self.mean
        for i in range(len(a)):
            s += float(a[i]) * (float(group_values[i]) - float(m[i]))
        return s


@dataclass
class CalibrationModel:
    layout: ChannelLayout
    groups: dict  # group name -> GroupCalibration, the four PC_GROUPS
    provenance: dict = field(default_factory=dict)

    def project_values(self, values: np.ndarray) -> np.ndarray:
        """Project one frame's channel vector to (h_rs, h_ls, h_re, h_le)."""
        if len(values) != self.layout.total_channels:
            raise DimensionMismatchError(
                f"frame has {len(values)} channels, layout {self.layout.total_channels}")
        out = np.empty(4)
        for k, name in enumerate(PC_GROUPS):
            idx = self.layout.groups[name]
            out[k] = self.groups[name].project(values[idx])
        return out

    def project_frames(self, frames) -> np.ndarray:
        """Per-frame projection of a whole stream, shape (n, 4).

        Deliberately loops frame by frame with vector dots (no matrix-matrix
        product) so batch and live paths consume identical arithmetic.
        """
        out = np.empty((len(frames), 4))
        for i, f in enumerate(frames):
            out[i] = self.project_values(f.values)
        return out


def project(frame: SensorFrame, model: CalibrationModel) -> np.ndarray:
    return model.project_values(frame.values)


def fit_calibration(rec_or_frames, layout: ChannelLayout = None, window=None,
                    reference_segment=None) -> CalibrationModel:
    """Fit each group's first PC on the frames inside ``window`` = (t0, t1).

    The PC axis sign is ambiguous; it is fixed so the projection correlates
    positively with the group's mean-centered signal energy over
    ``reference_segment`` (default: the fit window), falling back to a
    positive leading component when the correlation degenerates.
    """
    if isinstance(rec_or_frames, Recording):
        frames = rec_or_frames.frames
        layout = layout or rec_or_frames.layout
        provenance_hash = recording_sha256(rec_or_frames)
    else:
        frames = list(rec_or_frames)
        if layout is None:
            raise ValidationError("layout required when fitting from raw frames")
        provenance_hash = ""

    if window is None:
        if not frames:
            raise CalibrationWindowError("no frames to fit on")
        window = (frames[0].t, frames[-1].t)
    t0, t1 = float(window[0]), float(window[1])
    sel = [f for f in frames if t0 <= f.t <= t1]
    largest = max(len(layout.groups[g]) for g in PC_GROUPS)
    if len(sel) < 2 * largest:
        raise CalibrationWindowError(
            f"window [{t0}, {t1}] holds {len(sel)} frames; "
            f"need >= {2 * largest} (2x largest group)")

    data = np.stack([f.values for f in sel])
    if reference_segment is None:
        ref = data
    else:
        r0, r1 = reference_segment
        ref = np.stack([f.values for f in sel if r0 <= f.t <= r1]) if any(
            r0 <= f.t <= r1 for f in sel) else data

    groups = {}
    for name in PC_GROUPS:
        idx = layout.groups[name]
        block = data[:, idx]
        mean = block.mean(axis=0)
        centered = block - mean
        cov = centered.T @ centered / (len(sel) - 1)
        trace = float(np.trace(cov))
        if trace <= 0.0:
            raise DegenerateCalibrationError(f"group {name!r} has zero variance")
        evals, evecs = np.linalg.eigh(cov)
        axis = evecs[:, -1]
        top = float(evals[-1])
        gap = top - float(evals[-2]) if len(evals) > 1 else top
        unstable = gap < EIGENGAP_FLOOR * trace

        if reference_segment is not None:
            # correlation of projection with mean-centered signal energy over
            # the rising reference gesture decides the sign
            ref_block = ref[:, idx] - mean
            energy = (ref_block ** 2).sum(axis=1)
            proj = ref_block @ axis
            corr = float(np.dot(proj - proj.mean(), energy - energy.mean()))
        else:
            corr = 0.0
        if corr != 0.0:
            flipped = corr < 0
        else:
            lead = next((float(v) for v in axis if v != 0.0), 1.0)
            flipped = lead < 0
        if flipped:
            axis = -axis
        groups[name] = GroupCalibration(
            mean=mean, axis=axis, explained_variance_ratio=top / trace,
            sign_flipped=flipped, unstable=unstable)

    return CalibrationModel(
        layout=layout, groups=groups,
        provenance={"recording_sha256": provenance_hash, "window": [t0, t1]})


def save_calibration(path, model: CalibrationModel) -> None:
    doc = {
        "format": "bcal",
        "version": 1,
        "layout": model.layout.to_dict(),
        "groups": {
            name: {
                "mean": [float(v) for v in g.mean],
                "axis": [float(v) for v in g.axis],
                "explained_variance_ratio": g.explained_variance_ratio,
                "sign_flipped": g.sign_flipped,
                "unstable": g.unstable,
            }
            for name, g in model.groups.items()
        },
        "provenance": model.provenance,
    }
    tmp = str(path) + ".tmp"
    Path(tmp).write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


def load_calibration(path) -> CalibrationModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedHeaderError(f"{path}: not a calibration file: {e}") from e
    if doc.get("format") != "bcal":
        raise MalformedHeaderError(f"{path}: format field is not 'bcal'")
    layout = ChannelLayout.from_dict(doc["layout"])
    groups = {
        name: GroupCalibration(
            mean=np.array(g["mean"], dtype=float),
            axis=np.array(g["axis"], dtype=float),
            explained_variance_ratio=float(g["explained_variance_ratio"]),
            sign_flipped=bool(g["sign_flipped"]),
            unstable=bool(g["unstable"]),
        )
        for name, g in doc["groups"].items()
    }
    return CalibrationModel(layout=layout, groups=groups,
                            provenance=doc.get("provenance", {}))
