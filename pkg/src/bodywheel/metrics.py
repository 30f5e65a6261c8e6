"""Trial scoring: traveled distance and the segmented area error.

The area error splits the region between the prescribed track and the
driven trajectory at their intersection points (augmented with the driven
endpoints projected onto the track), closes each piece into a loop of
track-arc plus reversed trajectory-arc, and sums the absolute shoelace
areas of the loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import SelfIntersectingPathError, ValidationError


@dataclass(frozen=True)
class Intersection:
    point: tuple
    s_a: float  # arc-length position along the first polyline
    s_b: float
    seg_a: int
    ta: float  # local parameter in [0, 1] on segment seg_a
    seg_b: int
    tb: float
    kind: str  # crossing | overlap | touch


@dataclass
class SegmentArea:
    start: tuple  # boundary points on the prescribed track
    end: tuple
    area: float
    ring: list = field(default_factory=list)  # closing loop; not persisted

    def to_list(self):
        return [self.start[0], self.start[1], self.end[0], self.end[1], self.area]


@dataclass
class MetricReport:
    dist: float
    e_diff: float
    segments: list = field(default_factory=list)
    intersection_points: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dist": self.dist,
            "e_diff": self.e_diff,
            "segments": [s.to_list() for s in self.segments],
            "intersection_points": [[p[0], p[1]] for p in self.intersection_points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(
            dist=float(d["dist"]),
            e_diff=float(d["e_diff"]),
            segments=[SegmentArea((s[0], s[1]), (s[2], s[3]), s[4])
                      for s in d.get("segments", [])],
            intersection_points=[(p[0], p[1]) for p in d.get("intersection_points", [])],
        )


def path_length(poly) -> float:
    """Sum of Euclidean segment lengths; a single point has length 0."""
    pts = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValidationError("polyline needs at least 1 point")
    total = 0.0
    for k in range(1, len(pts)):
        total += math.hypot(pts[k, 0] - pts[k - 1, 0], pts[k, 1] - pts[k - 1, 1])
    return total


class _Poly:
    """Deduplicated polyline with arc-length bookkeeping."""

    def __init__(self, poly, tol):
        raw = np.asarray(poly, dtype=float).reshape(-1, 2)
        pts = [tuple(raw[0])]
        for p in raw[1:]:
            if math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) > tol:
                pts.append((float(p[0]), float(p[1])))
        self.pts = pts
        self.segs = np.array(
            [[pts[k][0], pts[k][1], pts[k + 1][0], pts[k + 1][1]]
             for k in range(len(pts) - 1)], dtype=float).reshape(-1, 4)
        self.lens = [math.hypot(s[2] - s[0], s[3] - s[1]) for s in self.segs]
        self.cum = [0.0]
        for ln in self.lens:
            self.cum.append(self.cum[-1] + ln)
        self.total = self.cum[-1]

    def __len__(self):
        return len(self.pts)

    def point_at(self, s: float) -> tuple:
        s = min(max(s, 0.0), self.total)
        k = self._seg_of(s)
        t = (s - self.cum[k]) / self.lens[k] if self.lens[k] > 0 else 0.0
        sg = self.segs[k]
        return (sg[0] + t * (sg[2] - sg[0]), sg[1] + t * (sg[3] - sg[1]))

    def _seg_of(self, s: float) -> int:
        # last segment whose start is <= s
        k = int(np.searchsorted(np.array(self.cum), s, side="right")) - 1
        return min(max(k, 0), len(self.lens) - 1)

    def arc(self, seg: int, t: float) -> float:
        return self.cum[seg] + t * self.lens[seg]

    def sub(self, s0: float, s1: float) -> list:
        """Vertices from arc s0 to s1, in that direction."""
        if s1 < s0:
            return list(reversed(self.sub(s1, s0)))
        out = [self.point_at(s0)]
        k0 = self._seg_of(s0)
        k1 = self._seg_of(s1)
        for k in range(k0 + 1, k1 + 1):
            if s0 < self.cum[k] < s1:
                out.append(self.pts[k])
        out.append(self.point_at(s1))
        return out

    def project(self, p) -> tuple:
        """Closest point on the polyline: (distance, arc position, point)."""
        best = None
        for k in range(len(self.segs)):
            sg = self.segs[k]
            d, cx, cy = kernels.point_segment_distance(
                p[0], p[1], sg[0], sg[1], sg[2], sg[3])
            if best is None or d < best[0]:
                if self.lens[k] > 0:
                    dx = sg[2] - sg[0]
                    dy = sg[3] - sg[1]
                    t = ((cx - sg[0]) * dx + (cy - sg[1]) * dy) / (self.lens[k] ** 2)
                    t = min(1.0, max(0.0, t))
                else:
                    t = 0.0
                best = (d, self.arc(k, t), (cx, cy))
        if best is None:
            raise ValidationError("cannot project onto an empty polyline")
        return best


def shoelace(ring) -> float:
    """Signed area of a closed polygon given as a vertex list."""
    a = 0.0
    n = len(ring)
    for k in range(n):
        x1, y1 = ring[k]
        x2, y2 = ring[(k + 1) % n]
        a += x1 * y2 - x2 * y1
    return 0.5 * a


def _neighbor(pts, start: int, step: int, event, tol: float):
    """First vertex strictly away from the event point walking from index
    ``start`` in direction ``step``; None when the event sits at the end."""
    k = start
    while 0 <= k < len(pts):
        p = pts[k]
        if math.hypot(p[0] - event[0], p[1] - event[1]) > tol:
            return p
        k += step
    return None


def _wedge_side(event, d_in, d_out, p) -> int:
    """Side of the polyline corner at ``event`` that point ``p`` falls on:
    +1 left of travel, -1 right, 0 on the boundary rays."""
    ux, uy = d_out
    wx, wy = (-d_in[0], -d_in[1])
    px, py = (p[0] - event[0], p[1] - event[1])
    cup = ux * py - uy * px
    cpw = px * wy - py * wx
    if cup == 0.0 and ux * px + uy * py > 0.0:
        return 0
    if cpw == 0.0 and wx * px + wy * py > 0.0:
        return 0
    cuw = ux * wy - uy * wx
    if cuw > 0.0:
        return 1 if (cup > 0.0 and cpw > 0.0) else -1
    if cuw < 0.0:
        return 1 if (cup > 0.0 or cpw > 0.0) else -1
    # straight continuation (or reversal): the boundary is the full line
    if cup > 0.0:
        return 1
    if cup < 0.0:
        return -1
    return 0


def _classify(pa: _Poly, seg_a: int, pb: _Poly, seg_b: int, event,
              tol: float) -> str:
    """Crossing (b passes to the other side of a) versus tangential touch."""
    walk_tol = max(8.0 * tol, 1e-12)
    a_back = _neighbor(pa.pts, seg_a, -1, event, walk_tol)
    a_fwd = _neighbor(pa.pts, seg_a + 1, +1, event, walk_tol)
    if a_back is None or a_fwd is None:
        return "touch"  # endpoint of a: nothing to cross
    b_back = _neighbor(pb.pts, seg_b, -1, event, walk_tol)
    b_fwd = _neighbor(pb.pts, seg_b + 1, +1, event, walk_tol)
    if b_back is None or b_fwd is None:
        return "touch"  # endpoint of b rests on a
    d_in = (event[0] - a_back[0], event[1] - a_back[1])
    d_out = (a_fwd[0] - event[0], a_fwd[1] - event[1])
    s1 = _wedge_side(event, d_in, d_out, b_back)
    s2 = _wedge_side(event, d_in, d_out, b_fwd)
    if s1 == 0 or s2 == 0:
        return "touch"
    return "crossing" if s1 != s2 else "touch"


def _raw_events(pa: _Poly, pb: _Poly, tol: float) -> list:
    events = []
    for i, j, kind, t, u in kernels.segment_candidates(pa.segs, pb.segs, tol):
        sg = pa.segs[i]
        point = (sg[0] + t * (sg[2] - sg[0]), sg[1] + t * (sg[3] - sg[1]))
        if kind == 1:
            label = "overlap"
        else:
            label = _classify(pa, i, pb, j, point, tol)
        events.append(Intersection(
            point=point, s_a=pa.arc(i, t), s_b=pb.arc(j, u),
            seg_a=i, ta=t, seg_b=j, tb=u, kind=label))
    return events


_KIND_RANK = {"crossing": 2, "overlap": 1, "touch": 0}


def _merge_events(events: list, merge_eps: float) -> list:
    events = sorted(events, key=lambda e: (e.s_a, e.s_b))
    out = []
    for e in events:
        if (out and abs(e.s_a - out[-1].s_a) <= merge_eps
                and abs(e.s_b - out[-1].s_b) <= merge_eps):
            if _KIND_RANK[e.kind] > _KIND_RANK[out[-1].kind]:
                out[-1] = e
            continue
        out.append(e)
    return out


def polyline_intersections(a, b, tol: float = 1e-9,
                           include_touches: bool = False) -> list:
    """Intersections of two polylines, ordered by arc-length along ``a``.

    Transversal crossings and collinear-overlap bounds are returned;
    tangential touches only when ``include_touches``. Coincident events from
    adjacent segment pairs are merged and reported once.
    """
    pa = _Poly(a, tol)
    pb = _Poly(b, tol)
    if len(pa) < 2 or len(pb) < 2:
        raise ValidationError("polylines need at least 2 distinct points")
    merge_eps = 10.0 * tol + 1e-12 * (pa.total + pb.total)
    events = _merge_events(_raw_events(pa, pb, tol), merge_eps)
    if not include_touches:
        events = [e for e in events if e.kind != "touch"]
    return events


def _check_simple(p: _Poly, tol: float) -> None:
    n = len(p.segs)
    for i, j, kind, t, u in kernels.segment_candidates(p.segs, p.segs, tol):
        if i == j:
            continue
        if abs(i - j) == 1:
            lo, hi = min(i, j), max(i, j)
            tol_t = tol / p.lens[lo] if p.lens[lo] > 0 else 0.0
            tol_u = tol / p.lens[hi] if p.lens[hi] > 0 else 0.0
            at_shared = ((i < j and t >= 1.0 - tol_t and u <= tol_u)
                         or (i > j and t <= tol_t and u >= 1.0 - tol_u))
            if kind == 0 and at_shared:
                continue
            raise SelfIntersectingPathError(
                f"adjacent path segments {lo} and {hi} overlap beyond their shared vertex")
        raise SelfIntersectingPathError(f"path segments {i} and {j} intersect")
    del n


def area_error(prescribed, actual, tol: float = 1e-9) -> MetricReport:
    """Segmented area between the prescribed track and a driven trajectory.

    The driven endpoints are projected onto the track to bound the
    comparison span; every region between consecutive boundaries is closed
    with the two arcs and measured with the shoelace formula.
    """
    pa = _Poly(prescribed, tol)
    if len(pa) < 2:
        raise ValidationError("prescribed path needs at least 2 distinct points")
    _check_simple(pa, tol)
    dist = path_length(actual)

    pb = _Poly(actual, tol)
    if len(pb) < 2:
        # the trajectory never left one spot: no enclosed area is defined
        return MetricReport(dist=dist, e_diff=0.0)

    _, s_p0, _ = pa.project(pb.pts[0])
    _, s_p1, _ = pa.project(pb.pts[-1])

    merge_eps = 10.0 * tol + 1e-12 * (pa.total + pb.total)
    events = [e for e in _merge_events(_raw_events(pb, pa, tol), merge_eps)
              if e.kind != "touch"]

    bounds = [(0.0, s_p0)] + [(e.s_a, e.s_b) for e in events] + [(pb.total, s_p1)]
    cleaned = [bounds[0]]
    for sa, sp in bounds[1:]:
        if abs(sa - cleaned[-1][0]) <= merge_eps and abs(sp - cleaned[-1][1]) <= merge_eps:
            continue
        cleaned.append((sa, sp))
    if len(cleaned) == 1:
        cleaned.append(bounds[-1])

    segments = []
    e_diff = 0.0
    for (sa0, sp0), (sa1, sp1) in zip(cleaned[:-1], cleaned[1:]):
        ring = pa.sub(sp0, sp1)
        ring += list(reversed(pb.sub(sa0, sa1)))
        area = abs(shoelace(ring))
        segments.append(SegmentArea(start=pa.point_at(sp0), end=pa.point_at(sp1),
                                    area=area, ring=ring))
        e_diff += area
    return MetricReport(dist=dist, e_diff=e_diff, segments=segments,
                        intersection_points=[e.point for e in events])
