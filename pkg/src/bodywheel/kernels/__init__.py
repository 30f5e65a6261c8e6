"""Hot-loop kernels: compiled extension with a pure-Python fallback.

Both backends expose the same functions and are written to produce
bit-identical doubles (same operation order, no FMA contraction in the
extension build). Selection happens once at import:

* ``BODYWHEEL_KERNELS=native`` require the compiled extension,
* ``BODYWHEEL_KERNELS=pure``   force the fallback,
* unset/``auto``               use the extension when importable.
"""

import os

_requested = os.environ.get("BODYWHEEL_KERNELS", "auto")

if _requested not in ("auto", "native", "pure"):
    raise ImportError(f"BODYWHEEL_KERNELS={_requested!r}; expected auto|native|pure")

if _requested == "pure":
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        from . import _pure as _impl

        BACKEND = "pure"

normalize_angle = _impl.normalize_angle
unicycle_step = _impl.unicycle_step
point_segment_distance = _impl.point_segment_distance
first_contact = _impl.first_contact
step_with_walls = _impl.step_with_walls
simulate = _impl.simulate
pipeline_step = _impl.pipeline_step
pipeline_steps = _impl.pipeline_steps
segment_candidates = _impl.segment_candidates

__all__ = [
    "BACKEND",
    "normalize_angle",
    "unicycle_step",
    "point_segment_distance",
    "first_contact",
    "step_with_walls",
    "simulate",
    "pipeline_step",
    "pipeline_steps",
    "segment_candidates",
]
