import math

import numpy as np
import pytest

from bodywheel.errors import SelfIntersectingPathError, ValidationError
from bodywheel.metrics import (
    MetricReport,
    area_error,
    path_length,
    polyline_intersections,
)


def scanline_region_area(prescribed, actual, n_columns=8000):
    """Independent oracle: even-odd scanline integration of the region
    enclosed by prescribed + reversed(actual). Exact in y, discretized in x.
    """
    ring = np.array(list(prescribed) + list(reversed(list(actual))), dtype=float)
    x1 = ring[:, 0]
    y1 = ring[:, 1]
    x2 = np.roll(ring[:, 0], -1)
    y2 = np.roll(ring[:, 1], -1)
    lo, hi = ring[:, 0].min(), ring[:, 0].max()
    width = (hi - lo) / n_columns
    cols = lo + (np.arange(n_columns) + 0.5) * width
    fwd = (x1[:, None] <= cols) & (cols < x2[:, None])
    bwd = (x2[:, None] <= cols) & (cols < x1[:, None])
    hitting = fwd | bwd
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (cols - x1[:, None]) / (x2 - x1)[:, None]
        ys = y1[:, None] + t * (y2 - y1)[:, None]
    ys = np.where(hitting, ys, np.nan)
    ys = np.sort(ys, axis=0)  # NaNs sort last
    count = hitting.sum(axis=0)
    assert np.all(count % 2 == 0), "open crossing parity; ring is not closed"
    signs = np.where(np.arange(ys.shape[0]) % 2 == 0, -1.0, 1.0)
    measure = np.nansum(ys * signs[:, None], axis=0)
    return float(np.sum(measure) * width)


def smooth_deviation_pair(seed):
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 10.0, 60)
    base = 0.8 * np.sin(0.25 * xs + rng.uniform(0, 2 * np.pi))
    prescribed = np.column_stack([xs, base])

    s = np.linspace(0.0, 1.0, 400)
    xa = 10.0 * s
    ya = np.interp(xa, xs, base)
    offset = np.zeros_like(s)
    for m in range(1, 6):
        offset += rng.normal(0, 0.4 / m) * np.sin(math.pi * m * s)
    actual = np.column_stack([xa, ya + offset])
    return prescribed, actual


def test_path_length_cases(rng):
    assert path_length([(3.0, 4.0)]) == 0.0
    assert path_length([(0, 0), (3, 4)]) == 5.0
    pts = rng.normal(size=(100, 2))
    oracle = math.fsum(math.hypot(*(pts[k + 1] - pts[k])) for k in range(99))
    assert path_length(pts) == pytest.approx(oracle, rel=1e-12)
    with pytest.raises(ValidationError):
        path_length([])


def test_parallel_lines_no_intersections():
    a = [(0.0, 0.0), (10.0, 0.0)]
    b = [(0.0, 1.0), (10.0, 1.0)]
    assert polyline_intersections(a, b) == []


def test_perpendicular_cross_single_point():
    hits = polyline_intersections([(0, -1), (0, 1)], [(-1, 0), (1, 0)])
    assert len(hits) == 1
    assert hits[0].kind == "crossing"
    assert hits[0].point == pytest.approx((0.0, 0.0), abs=1e-12)


def test_tangential_touch_not_reported_by_default():
    a = [(0.0, 1.0), (2.0, 0.0), (4.0, 1.0)]
    b = [(-1.0, 0.0), (5.0, 0.0)]
    assert polyline_intersections(a, b) == []
    touches = polyline_intersections(a, b, include_touches=True)
    assert len(touches) == 1
    assert touches[0].kind == "touch"
    assert touches[0].point == pytest.approx((2.0, 0.0), abs=1e-9)


def test_intersections_match_bruteforce_oracle(rng):
    def brute(a, b):
        pts = []
        for i in range(len(a) - 1):
            for j in range(len(b) - 1):
                p, r = np.array(a[i]), np.array(a[i + 1]) - np.array(a[i])
                q, s = np.array(b[j]), np.array(b[j + 1]) - np.array(b[j])
                denom = r[0] * s[1] - r[1] * s[0]
                if denom == 0:
                    continue
                t = ((q - p)[0] * s[1] - (q - p)[1] * s[0]) / denom
                u = ((q - p)[0] * r[1] - (q - p)[1] * r[0]) / denom
                if 0 <= t <= 1 and 0 <= u <= 1:
                    pts.append(tuple(p + t * r))
        return pts

    for trial in range(20):
        a = rng.uniform(-5, 5, size=(12, 2)).tolist()
        b = rng.uniform(-5, 5, size=(9, 2)).tolist()
        got = polyline_intersections(a, b)
        want = brute(a, b)
        assert len(got) == len(want)
        got_sorted = sorted(e.point for e in got)
        for g, w in zip(got_sorted, sorted(want)):
            assert g == pytest.approx(w, abs=1e-9)
        # ordered along a
        s_list = [e.s_a for e in got]
        assert s_list == sorted(s_list)


def test_identical_polylines_zero_error():
    poly = [(0.0, 0.0), (2.0, 1.0), (5.0, -1.0), (8.0, 0.5)]
    rep = area_error(poly, poly)
    assert rep.e_diff == 0.0
    assert rep.dist == pytest.approx(path_length(poly))


def test_reparameterized_copy_zero_error():
    xs = np.linspace(0, 10, 11)
    prescribed = np.column_stack([xs, 0.3 * xs])
    dense = np.linspace(0, 10, 157)
    actual = np.column_stack([dense, 0.3 * dense])
    rep = area_error(prescribed, actual)
    assert rep.e_diff < 1e-9


def test_rectangle_detour_is_two_exactly():
    prescribed = [(0.0, 0.0), (4.0, 0.0)]
    actual = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (3.0, 1.0), (3.0, 0.0), (4.0, 0.0)]
    rep = area_error(prescribed, actual)
    assert rep.e_diff == 2.0
    assert rep.dist == 6.0
    assert sum(s.area for s in rep.segments) == rep.e_diff


def test_matches_scanline_oracle_on_smooth_deviations():
    for seed in range(20):
        prescribed, actual = smooth_deviation_pair(seed)
        rep = area_error(prescribed, actual)
        oracle = scanline_region_area(prescribed, actual)
        assert rep.e_diff == pytest.approx(oracle, rel=0.01), seed
        assert rep.e_diff == pytest.approx(sum(s.area for s in rep.segments), rel=1e-12)


def test_symmetry_when_endpoints_shared():
    prescribed, actual = smooth_deviation_pair(3)
    ab = area_error(prescribed, actual).e_diff
    ba = area_error(actual, prescribed).e_diff if _is_simple(actual) else None
    if ba is not None:
        assert ab == pytest.approx(ba, rel=1e-9)


def _is_simple(poly):
    try:
        area_error(poly, poly)
        return True
    except SelfIntersectingPathError:
        return False


def test_rigid_motion_invariance():
    prescribed, actual = smooth_deviation_pair(5)
    base = area_error(prescribed, actual).e_diff
    ang, tx, ty = 0.83, 12.0, -7.0
    c, s = math.cos(ang), math.sin(ang)

    def xf(poly):
        return [(c * x - s * y + tx, s * x + c * y + ty) for x, y in poly]

    moved = area_error(xf(prescribed), xf(actual)).e_diff
    assert moved == pytest.approx(base, rel=1e-9)


def test_quadratic_scaling():
    prescribed, actual = smooth_deviation_pair(9)
    base = area_error(prescribed, actual).e_diff
    c = 3.5
    scaled = area_error(prescribed * c, actual * c).e_diff
    assert scaled == pytest.approx(c * c * base, rel=1e-9)


def test_self_intersecting_prescribed_rejected():
    figure_eight = [(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)]
    with pytest.raises(SelfIntersectingPathError):
        area_error(figure_eight, [(0.0, 0.0), (1.0, 1.0)])


def test_doubling_back_prescribed_rejected():
    with pytest.raises(SelfIntersectingPathError):
        area_error([(0.0, 0.0), (4.0, 0.0), (2.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)])


def test_point_trajectory_scores_zero():
    rep = area_error([(0, 0), (5, 0)], [(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)])
    assert rep.e_diff == 0.0
    assert rep.dist == 0.0


def test_report_round_trip():
    prescribed, actual = smooth_deviation_pair(2)
    rep = area_error(prescribed, actual)
    back = MetricReport.from_dict(rep.to_dict())
    assert back.dist == rep.dist
    assert back.e_diff == rep.e_diff
    assert len(back.segments) == len(rep.segments)
