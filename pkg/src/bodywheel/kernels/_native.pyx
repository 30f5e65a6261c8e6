# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirror of ``_pure.py`` operation for operation; compiled with
-ffp-contract=off so both backends produce bit-identical doubles.
"""

import numpy as np

from libc.math cimport cos, fmod, sin, sqrt

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586

MODE_STOP = 0
MODE_SLIDE = 1
STOP_END = 0
STOP_GOAL = 1


cdef inline double _normalize_angle(double a) noexcept nogil:
    a = fmod(a, TWO_PI)
    if a <= -PI:
        a += TWO_PI
    elif a > PI:
        a -= TWO_PI
    return a


def normalize_angle(double a):
    """Wrap into (-pi, pi]."""
    return _normalize_angle(a)


cdef inline void _unicycle_step(double x, double y, double theta,
                                double u1, double u2, double vf, double vr,
                                double dt, double *out) noexcept nogil:
    cdef double v = u1 * vf
    cdef double w = u2 * vr
    out[0] = x + v * cos(theta) * dt
    out[1] = y + v * sin(theta) * dt
    out[2] = _normalize_angle(theta + w * dt)


def unicycle_step(double x, double y, double theta, double u1, double u2,
                  double vf, double vr, double dt):
    """One discrete unicycle step; heading advances after the translation."""
    cdef double out[3]
    _unicycle_step(x, y, theta, u1, u2, vf, vr, dt, out)
    return out[0], out[1], out[2]


cdef inline double _pt_seg(double px, double py, double x1, double y1,
                           double x2, double y2, double *cx, double *cy) noexcept nogil:
    cdef double dx = x2 - x1
    cdef double dy = y2 - y1
    cdef double l2 = dx * dx + dy * dy
    cdef double t, ex, ey
    if l2 == 0.0:
        cx[0] = x1
        cy[0] = y1
    else:
        t = ((px - x1) * dx + (py - y1) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx[0] = x1 + t * dx
        cy[0] = y1 + t * dy
    ex = px - cx[0]
    ey = py - cy[0]
    return sqrt(ex * ex + ey * ey)


def point_segment_distance(double px, double py, double x1, double y1,
                           double x2, double y2):
    """Distance from a point to a closed segment; returns (dist, cx, cy)."""
    cdef double cx = 0.0, cy = 0.0
    cdef double d = _pt_seg(px, py, x1, y1, x2, y2, &cx, &cy)
    return d, cx, cy


cdef inline int _first_contact(double px, double py, double radius,
                               double[:, ::1] walls, double *cx, double *cy,
                               double *dist) noexcept nogil:
    cdef Py_ssize_t i, n = walls.shape[0]
    cdef double d
    for i in range(n):
        d = _pt_seg(px, py, walls[i, 0], walls[i, 1], walls[i, 2], walls[i, 3],
                    cx, cy)
        if d <= radius:
            dist[0] = d
            return <int> i
    return -1


cdef double[:, ::1] _as_walls(object walls):
    if walls is None or len(walls) == 0:
        return np.zeros((0, 4))
    return np.ascontiguousarray(walls, dtype=np.float64).reshape(len(walls), 4)


def first_contact(double px, double py, double radius, object walls):
    """First wall (list order) within ``radius`` of the point, or None."""
    cdef double[:, ::1] w = _as_walls(walls)
    cdef double cx = 0.0, cy = 0.0, dist = 0.0
    cdef int i = _first_contact(px, py, radius, w, &cx, &cy, &dist)
    if i < 0:
        return None
    return i, cx, cy, dist


cdef inline void _slide(double x, double y, double x2, double y2,
                        double[:, ::1] walls, double radius, int wall_index,
                        double *sx, double *sy) noexcept nogil:
    cdef double wx = walls[wall_index, 2] - walls[wall_index, 0]
    cdef double wy = walls[wall_index, 3] - walls[wall_index, 1]
    cdef double ln = sqrt(wx * wx + wy * wy)
    cdef double tx, ty, mx, my, dot, cx, cy, dist
    if ln == 0.0:
        sx[0] = x
        sy[0] = y
        return
    tx = wx / ln
    ty = wy / ln
    mx = x2 - x
    my = y2 - y
    dot = mx * tx + my * ty
    sx[0] = x + dot * tx
    sy[0] = y + dot * ty
    if _first_contact(sx[0], sy[0], radius, walls, &cx, &cy, &dist) >= 0:
        sx[0] = x
        sy[0] = y


cdef inline int _step_walls(double x, double y, double theta, double u1,
                            double u2, double vf, double vr, double dt,
                            double[:, ::1] walls, double radius, int mode,
                            double *nx, double *ny, double *nth,
                            double *cx, double *cy) noexcept nogil:
    cdef double out[3]
    cdef double dist = 0.0
    cdef int hit
    _unicycle_step(x, y, theta, u1, u2, vf, vr, dt, out)
    nx[0] = out[0]
    ny[0] = out[1]
    nth[0] = out[2]
    if walls.shape[0] == 0:
        return -1
    hit = _first_contact(out[0], out[1], radius, walls, cx, cy, &dist)
    if hit < 0:
        return -1
    if mode == 0:  # stop: the whole step reverts
        nx[0] = x
        ny[0] = y
        nth[0] = theta
    else:  # slide: keep the heading change and tangential translation
        _slide(x, y, out[0], out[1], walls, radius, hit, nx, ny)
    return hit


def step_with_walls(double x, double y, double theta, double u1, double u2,
                    double vf, double vr, double dt, object walls,
                    double radius, int mode):
    """Unicycle step plus collision resolution; see the pure backend."""
    cdef double[:, ::1] w = _as_walls(walls)
    cdef double nx = 0.0, ny = 0.0, nth = 0.0, cx = 0.0, cy = 0.0
    cdef int hit = _step_walls(x, y, theta, u1, u2, vf, vr, dt, w, radius,
                               mode, &nx, &ny, &nth, &cx, &cy)
    if hit < 0:
        return nx, ny, nth, -1, 0.0, 0.0
    return nx, ny, nth, hit, cx, cy


def simulate(double x0, double y0, double th0, object u1s_obj, object u2s_obj,
             double vf, double vr, double dt, object walls, double radius,
             int mode, object goal, double t0=0.0):
    """Fixed-step trial loop over a precomputed control stream."""
    cdef double[::1] u1s = np.ascontiguousarray(u1s_obj, dtype=np.float64)
    cdef double[::1] u2s = np.ascontiguousarray(u2s_obj, dtype=np.float64)
    cdef double[:, ::1] w = _as_walls(walls)
    cdef Py_ssize_t n = u1s.shape[0]
    ts_arr = np.empty(n + 1)
    xs_arr = np.empty(n + 1)
    ys_arr = np.empty(n + 1)
    ths_arr = np.empty(n + 1)
    cdef double[::1] ts = ts_arr
    cdef double[::1] xs = xs_arr
    cdef double[::1] ys = ys_arr
    cdef double[::1] ths = ths_arr
    ts[0] = t0
    xs[0] = x0
    ys[0] = y0
    ths[0] = th0
    contacts = []
    cdef double x = x0, y = y0, th = th0
    cdef double nx = 0.0, ny = 0.0, nth = 0.0, cx = 0.0, cy = 0.0
    cdef double gx = 0.0, gy = 0.0, gr = 0.0, dx, dy
    cdef bint has_goal = goal is not None
    if has_goal:
        gx, gy, gr = goal
    cdef int stop = STOP_END
    cdef Py_ssize_t k, steps = 0
    cdef int hit
    for k in range(n):
        hit = _step_walls(x, y, th, u1s[k], u2s[k], vf, vr, dt, w, radius,
                          mode, &nx, &ny, &nth, &cx, &cy)
        x = nx
        y = ny
        th = nth
        if hit >= 0:
            contacts.append((k + 1, hit, cx, cy))
        steps = k + 1
        ts[steps] = t0 + steps * dt
        xs[steps] = x
        ys[steps] = y
        ths[steps] = th
        if has_goal:
            dx = x - gx
            dy = y - gy
            if dx * dx + dy * dy <= gr * gr:
                stop = STOP_GOAL
                break
    cdef Py_ssize_t m = steps + 1
    return (ts_arr[:m], xs_arr[:m], ys_arr[:m], ths_arr[:m], contacts, stop,
            steps)


cdef inline double _rect(double h_prev, double h_curr, double dt,
                         double dead_zone) noexcept nogil:
    cdef double d = (h_curr - h_prev) / dt
    cdef double out = d - dead_zone
    if out > 0.0:
        return out
    return 0.0


def pipeline_step(double u1, double u2, object prev, double prev_t, list buf,
                  double h0, double h1, double h2, double h3, double t,
                  double dead_zone, int window, double u1_gain, double u2_gain,
                  double u1_leak, double clamp):
    """One rectified-derivative pipeline update; see the pure backend."""
    buf.append((h0, h1, h2, h3))
    if len(buf) > window:
        buf.pop(0)
    cdef Py_ssize_t m = len(buf)
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef double dm = <double> m
    for b in buf:
        s0 += <double> b[0]
        s1 += <double> b[1]
        s2 += <double> b[2]
        s3 += <double> b[3]
    cdef double sm0 = s0 / dm, sm1 = s1 / dm, sm2 = s2 / dm, sm3 = s3 / dm
    cdef double dt, r_rs, r_ls, r_re, r_le, a1
    if prev is None:
        u2 = 0.0
    else:
        dt = t - prev_t
        r_rs = _rect(<double> prev[0], sm0, dt, dead_zone)
        r_ls = _rect(<double> prev[1], sm1, dt, dead_zone)
        r_re = _rect(<double> prev[2], sm2, dt, dead_zone)
        r_le = _rect(<double> prev[3], sm3, dt, dead_zone)
        a1 = r_re - r_le
        u1 = u1 * (1.0 - u1_leak * dt) + u1_gain * a1 * dt
        if u1 > clamp:
            u1 = clamp
        elif u1 < -clamp:
            u1 = -clamp
        u2 = u2_gain * (r_rs - r_ls)
        if u2 > clamp:
            u2 = clamp
        elif u2 < -clamp:
            u2 = -clamp
    return u1, u2, (sm0, sm1, sm2, sm3), t, buf


def pipeline_steps(object pcs_obj, object ts_obj, double dead_zone, int window,
                   double u1_gain, double u2_gain, double u1_leak, double clamp,
                   double u1=0.0, double u2=0.0):
    """Run the pipeline over a whole PC stream from a fresh filter state."""
    cdef double[:, ::1] pcs = np.ascontiguousarray(pcs_obj, dtype=np.float64)
    cdef double[::1] ts = np.ascontiguousarray(ts_obj, dtype=np.float64)
    cdef Py_ssize_t n = ts.shape[0]
    u1s_arr = np.empty(n)
    u2s_arr = np.empty(n)
    cdef double[::1] u1s = u1s_arr
    cdef double[::1] u2s = u2s_arr
    # ring buffer, summed oldest -> newest exactly like the list fallback
    ring_arr = np.zeros((window, 4))
    cdef double[:, ::1] ring = ring_arr
    cdef Py_ssize_t head = 0, count = 0, k, j, idx
    cdef double s0, s1, s2, s3, dm
    cdef double sm0 = 0.0, sm1 = 0.0, sm2 = 0.0, sm3 = 0.0
    cdef double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0
    cdef bint has_prev = False
    cdef double prev_t = 0.0, t, dt, r_rs, r_ls, r_re, r_le, a1
    for k in range(n):
        if count < window:
            idx = (head + count) % window
            count += 1
        else:
            idx = head
            head = (head + 1) % window
        ring[idx, 0] = pcs[k, 0]
        ring[idx, 1] = pcs[k, 1]
        ring[idx, 2] = pcs[k, 2]
        ring[idx, 3] = pcs[k, 3]
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        s3 = 0.0
        for j in range(count):
            idx = (head + j) % window
            s0 += ring[idx, 0]
            s1 += ring[idx, 1]
            s2 += ring[idx, 2]
            s3 += ring[idx, 3]
        dm = <double> count
        sm0 = s0 / dm
        sm1 = s1 / dm
        sm2 = s2 / dm
        sm3 = s3 / dm
        t = ts[k]
        if not has_prev:
            u2 = 0.0
            has_prev = True
        else:
            dt = t - prev_t
            r_rs = _rect(p0, sm0, dt, dead_zone)
            r_ls = _rect(p1, sm1, dt, dead_zone)
            r_re = _rect(p2, sm2, dt, dead_zone)
            r_le = _rect(p3, sm3, dt, dead_zone)
            a1 = r_re - r_le
            u1 = u1 * (1.0 - u1_leak * dt) + u1_gain * a1 * dt
            if u1 > clamp:
                u1 = clamp
            elif u1 < -clamp:
                u1 = -clamp
            u2 = u2_gain * (r_rs - r_ls)
            if u2 > clamp:
                u2 = clamp
            elif u2 < -clamp:
                u2 = -clamp
        p0 = sm0
        p1 = sm1
        p2 = sm2
        p3 = sm3
        prev_t = t
        u1s[k] = u1
        u2s[k] = u2
    return u1s_arr, u2s_arr


def segment_candidates(object a_obj, object b_obj, double tol):
    """Raw intersection candidates between two segment sets; semantics match
    the pure backend exactly."""
    cdef double[:, ::1] a_segs = np.ascontiguousarray(
        a_obj, dtype=np.float64).reshape(len(a_obj), 4)
    cdef double[:, ::1] b_segs = np.ascontiguousarray(
        b_obj, dtype=np.float64).reshape(len(b_obj), 4)
    out = []
    cdef Py_ssize_t na = a_segs.shape[0], nb = b_segs.shape[0]
    if na == 0 or nb == 0:
        return out
    b_arr = np.asarray(b_segs)
    bminx_arr = np.minimum(b_arr[:, 0], b_arr[:, 2]) - tol
    bmaxx_arr = np.maximum(b_arr[:, 0], b_arr[:, 2]) + tol
    bminy_arr = np.minimum(b_arr[:, 1], b_arr[:, 3]) - tol
    bmaxy_arr = np.maximum(b_arr[:, 1], b_arr[:, 3]) + tol
    cdef double[::1] bminx = np.ascontiguousarray(bminx_arr)
    cdef double[::1] bmaxx = np.ascontiguousarray(bmaxx_arr)
    cdef double[::1] bminy = np.ascontiguousarray(bminy_arr)
    cdef double[::1] bmaxy = np.ascontiguousarray(bmaxy_arr)
    cdef Py_ssize_t i, j
    cdef double ax1, ay1, ax2, ay2, aminx, amaxx, aminy, amaxy
    cdef double rx, ry, rlen, bx1, by1, bx2, by2, sx, sy, slen
    cdef double qx, qy, denom, absdenom, d1, d2, rl2, t1, t2, lo, hi
    cdef double tol_t, tol_u, t, u, px, py, uu, tt
    cdef int kind
    for i in range(na):
        ax1 = a_segs[i, 0]
        ay1 = a_segs[i, 1]
        ax2 = a_segs[i, 2]
        ay2 = a_segs[i, 3]
        aminx = ax1 if ax1 < ax2 else ax2
        amaxx = ax1 if ax1 > ax2 else ax2
        aminy = ay1 if ay1 < ay2 else ay2
        amaxy = ay1 if ay1 > ay2 else ay2
        rx = ax2 - ax1
        ry = ay2 - ay1
        rlen = sqrt(rx * rx + ry * ry)
        if rlen == 0.0:
            continue
        for j in range(nb):
            if (amaxx < bminx[j] or aminx > bmaxx[j]
                    or amaxy < bminy[j] or aminy > bmaxy[j]):
                continue
            bx1 = b_segs[j, 0]
            by1 = b_segs[j, 1]
            bx2 = b_segs[j, 2]
            by2 = b_segs[j, 3]
            sx = bx2 - bx1
            sy = by2 - by1
            slen = sqrt(sx * sx + sy * sy)
            if slen == 0.0:
                continue
            qx = bx1 - ax1
            qy = by1 - ay1
            denom = rx * sy - ry * sx
            absdenom = denom if denom >= 0.0 else -denom
            if absdenom <= 1e-12 * rlen * slen:
                d1 = qx * ry - qy * rx
                if d1 < 0.0:
                    d1 = -d1
                d1 = d1 / rlen
                d2 = (bx2 - ax1) * ry - (by2 - ay1) * rx
                if d2 < 0.0:
                    d2 = -d2
                d2 = d2 / rlen
                if d1 > tol or d2 > tol:
                    continue
                rl2 = rx * rx + ry * ry
                t1 = (qx * rx + qy * ry) / rl2
                t2 = ((bx2 - ax1) * rx + (by2 - ay1) * ry) / rl2
                lo = t1 if t1 < t2 else t2
                hi = t1 if t1 > t2 else t2
                tol_t = tol / rlen
                if lo < 0.0:
                    lo = 0.0
                if hi > 1.0:
                    hi = 1.0
                if hi < lo - tol_t:
                    continue
                if hi <= lo:
                    hi = lo
                kind = 1 if hi > lo + tol_t else 0
                tt = lo
                px = ax1 + tt * rx
                py = ay1 + tt * ry
                uu = ((px - bx1) * sx + (py - by1) * sy) / (slen * slen)
                if uu > 1.0:
                    uu = 1.0
                if uu < 0.0:
                    uu = 0.0
                out.append((i, j, kind, tt, uu))
                if kind == 1:
                    tt = hi
                    px = ax1 + tt * rx
                    py = ay1 + tt * ry
                    uu = ((px - bx1) * sx + (py - by1) * sy) / (slen * slen)
                    if uu > 1.0:
                        uu = 1.0
                    if uu < 0.0:
                        uu = 0.0
                    out.append((i, j, kind, tt, uu))
            else:
                t = (qx * sy - qy * sx) / denom
                u = (qx * ry - qy * rx) / denom
                tol_t = tol / rlen
                tol_u = tol / slen
                if -tol_t <= t <= 1.0 + tol_t and -tol_u <= u <= 1.0 + tol_u:
                    if t > 1.0:
                        t = 1.0
                    if t < 0.0:
                        t = 0.0
                    if u > 1.0:
                        u = 1.0
                    if u < 0.0:
                        u = 0.0
                    out.append((i, j, 0, t, u))
    return out
