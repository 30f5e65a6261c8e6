"""Pure-Python kernel backend.

Reference implementation of the hot loops. The compiled backend in
``_native.pyx`` mirrors this file operation for operation; any change here
must be replicated there to preserve bit-identical results.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi

# collision modes
MODE_STOP = 0
MODE_SLIDE = 1

# stop reasons
STOP_END = 0
STOP_GOAL = 1


def normalize_angle(a):
    """Wrap into (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


def unicycle_step(x, y, theta, u1, u2, vf, vr, dt):
    """One discrete unicycle step; heading advances after the translation."""
    v = u1 * vf
    w = u2 * vr
    x2 = x + v * math.cos(theta) * dt
    y2 = y + v * math.sin(theta) * dt
    th2 = normalize_angle(theta + w * dt)
    return x2, y2, th2


def point_segment_distance(px, py, x1, y1, x2, y2):
    """Distance from a point to a closed segment; returns (dist, cx, cy)."""
    dx = x2 - x1
    dy = y2 - y1
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        cx = x1
        cy = y1
    else:
        t = ((px - x1) * dx + (py - y1) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx = x1 + t * dx
        cy = y1 + t * dy
    ex = px - cx
    ey = py - cy
    return math.sqrt(ex * ex + ey * ey), cx, cy


def first_contact(px, py, radius, walls):
    """First wall (list order) within ``radius`` of the point, or None.

    Returns (wall_index, cx, cy, dist) with the closest point on the wall.
    """
    n = 0 if walls is None else len(walls)
    for i in range(n):
        w = walls[i]
        d, cx, cy = point_segment_distance(px, py, float(w[0]), float(w[1]),
                                           float(w[2]), float(w[3]))
        if d <= radius:
            return i, cx, cy, d
    return None


def _slide(x, y, x2, y2, walls, radius, wall_index):
    # Keep only the translation component tangent to the contacted wall;
    # reject the slide if the slid position still touches anything.
    w = walls[wall_index]
    wx = float(w[2]) - float(w[0])
    wy = float(w[3]) - float(w[1])
    ln = math.sqrt(wx * wx + wy * wy)
    if ln == 0.0:
        return x, y
    tx = wx / ln
    ty = wy / ln
    mx = x2 - x
    my = y2 - y
    dot = mx * tx + my * ty
    sx = x + dot * tx
    sy = y + dot * ty
    if first_contact(sx, sy, radius, walls) is None:
        return sx, sy
    return x, y


def step_with_walls(x, y, theta, u1, u2, vf, vr, dt, walls, radius, mode):
    """Unicycle step plus collision resolution.

    Returns (x2, y2, th2, wall_index, cx, cy); wall_index is -1 when free.
    Mode 0 (stop) reverts the whole step on contact; mode 1 (slide) keeps the
    heading change and the wall-tangential translation component.
    """
    x2, y2, th2 = unicycle_step(x, y, theta, u1, u2, vf, vr, dt)
    contact = first_contact(x2, y2, radius, walls)
    if contact is None:
        return x2, y2, th2, -1, 0.0, 0.0
    i, cx, cy, _ = contact
    if mode == MODE_STOP:
        return x, y, theta, i, cx, cy
    sx, sy = _slide(x, y, x2, y2, walls, radius, i)
    return sx, sy, th2, i, cx, cy


def simulate(x0, y0, th0, u1s, u2s, vf, vr, dt, walls, radius, mode,
             goal, t0=0.0):
    """Fixed-step trial loop over a precomputed control stream.

    ``goal`` is (gx, gy, gr) or None. Returns (ts, xs, ys, ths, contacts,
    stop_reason, steps) where row k is the state after step k (row 0 is the
    start), contacts is a list of (step, wall_index, cx, cy), stop_reason is
    STOP_GOAL or STOP_END, and steps is the number of rows minus one.
    """
    n = len(u1s)
    ts = np.empty(n + 1)
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    ths = np.empty(n + 1)
    ts[0] = t0
    xs[0] = x0
    ys[0] = y0
    ths[0] = th0
    contacts = []
    x = x0
    y = y0
    th = th0
    stop = STOP_END
    steps = 0
    has_goal = goal is not None
    if has_goal:
        gx, gy, gr = goal
    for k in range(n):
        x, y, th, wall, cx, cy = step_with_walls(
            x, y, th, float(u1s[k]), float(u2s[k]), vf, vr, dt, walls, radius, mode)
        if wall >= 0:
            contacts.append((k + 1, wall, cx, cy))
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
    m = steps + 1
    return ts[:m], xs[:m], ys[:m], ths[:m], contacts, stop, steps


def _rect(h_prev, h_curr, dt, dead_zone):
    d = (h_curr - h_prev) / dt
    out = d - dead_zone
    if out > 0.0:
        return out
    return 0.0


def pipeline_step(u1, u2, prev, prev_t, buf, h0, h1, h2, h3, t,
                  dead_zone, window, u1_gain, u2_gain, u1_leak, clamp):
    """One rectified-derivative pipeline update.

    ``prev`` is the previous smoothed PC 4-tuple or None, ``buf`` the
    moving-average buffer (list of 4-tuples, oldest first; mutated in place).
    PC order is (h_rs, h_ls, h_re, h_le): shoulders feed the instantaneous
    turn command u2, elbows feed the integrated speed command u1.

    Returns (u1, u2, smoothed, t, buf).
    """
    buf.append((h0, h1, h2, h3))
    if len(buf) > window:
        buf.pop(0)
    m = len(buf)
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    for b in buf:
        s0 += b[0]
        s1 += b[1]
        s2 += b[2]
        s3 += b[3]
    sm = (s0 / m, s1 / m, s2 / m, s3 / m)
    if prev is None:
        u2 = 0.0
    else:
        dt = t - prev_t
        r_rs = _rect(prev[0], sm[0], dt, dead_zone)
        r_ls = _rect(prev[1], sm[1], dt, dead_zone)
        r_re = _rect(prev[2], sm[2], dt, dead_zone)
        r_le = _rect(prev[3], sm[3], dt, dead_zone)
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
    return u1, u2, sm, t, buf


def pipeline_steps(pcs, ts, dead_zone, window, u1_gain, u2_gain, u1_leak,
                   clamp, u1=0.0, u2=0.0):
    """Run the pipeline over a whole PC stream from a fresh filter state."""
    n = len(ts)
    u1s = np.empty(n)
    u2s = np.empty(n)
    buf = []
    prev = None
    prev_t = 0.0
    for k in range(n):
        u1, u2, prev, prev_t, buf = pipeline_step(
            u1, u2, prev, prev_t, buf,
            float(pcs[k, 0]), float(pcs[k, 1]), float(pcs[k, 2]), float(pcs[k, 3]),
            float(ts[k]), dead_zone, window, u1_gain, u2_gain, u1_leak, clamp)
        u1s[k] = u1
        u2s[k] = u2
    return u1s, u2s


def segment_candidates(a_segs, b_segs, tol):
    """Raw intersection candidates between two segment sets.

    ``a_segs``/``b_segs`` are (n, 4) arrays of (x1, y1, x2, y2). Yields
    tuples (i, j, kind, t, u) with local parameters on each segment; kind 0
    is a point intersection, kind 1 a collinear-overlap bound (overlaps
    produce two bounds). Bounding boxes padded by ``tol`` prune the scan.
    """
    out = []
    na = len(a_segs)
    nb = len(b_segs)
    if na == 0 or nb == 0:
        return out
    bminx = np.minimum(b_segs[:, 0], b_segs[:, 2]) - tol
    bmaxx = np.maximum(b_segs[:, 0], b_segs[:, 2]) + tol
    bminy = np.minimum(b_segs[:, 1], b_segs[:, 3]) - tol
    bmaxy = np.maximum(b_segs[:, 1], b_segs[:, 3]) + tol
    for i in range(na):
        ax1 = float(a_segs[i, 0])
        ay1 = float(a_segs[i, 1])
        ax2 = float(a_segs[i, 2])
        ay2 = float(a_segs[i, 3])
        aminx = min(ax1, ax2)
        amaxx = max(ax1, ax2)
        aminy = min(ay1, ay2)
        amaxy = max(ay1, ay2)
        rx = ax2 - ax1
        ry = ay2 - ay1
        rlen = math.sqrt(rx * rx + ry * ry)
        if rlen == 0.0:
            continue
        for j in range(nb):
            if (amaxx < bminx[j] or aminx > bmaxx[j]
                    or amaxy < bminy[j] or aminy > bmaxy[j]):
                continue
            bx1 = float(b_segs[j, 0])
            by1 = float(b_segs[j, 1])
            bx2 = float(b_segs[j, 2])
            by2 = float(b_segs[j, 3])
            sx = bx2 - bx1
            sy = by2 - by1
            slen = math.sqrt(sx * sx + sy * sy)
            if slen == 0.0:
                continue
            qx = bx1 - ax1
            qy = by1 - ay1
            denom = rx * sy - ry * sx
            if abs(denom) <= 1e-12 * rlen * slen:
                # parallel: collinear iff both b endpoints sit on a's line
                d1 = abs(qx * ry - qy * rx) / rlen
                d2 = abs((bx2 - ax1) * ry - (by2 - ay1) * rx) / rlen
                if d1 > tol or d2 > tol:
                    continue
                rl2 = rx * rx + ry * ry
                t1 = (qx * rx + qy * ry) / rl2
                t2 = ((bx2 - ax1) * rx + (by2 - ay1) * ry) / rl2
                lo = min(t1, t2)
                hi = max(t1, t2)
                tol_t = tol / rlen
                lo = max(lo, 0.0)
                hi = min(hi, 1.0)
                if hi < lo - tol_t:
                    continue
                if hi <= lo:
                    hi = lo
                for tt in ((lo, hi) if hi > lo + tol_t else (lo,)):
                    px = ax1 + tt * rx
                    py = ay1 + tt * ry
                    uu = ((px - bx1) * sx + (py - by1) * sy) / (slen * slen)
                    uu = min(1.0, max(0.0, uu))
                    kind = 1 if hi > lo + tol_t else 0
                    out.append((i, j, kind, tt, uu))
            else:
                t = (qx * sy - qy * sx) / denom
                u = (qx * ry - qy * rx) / denom
                tol_t = tol / rlen
                tol_u = tol / slen
                if -tol_t <= t <= 1.0 + tol_t and -tol_u <= u <= 1.0 + tol_u:
                    t = min(1.0, max(0.0, t))
                    u = min(1.0, max(0.0, u))
                    out.append((i, j, 0, t, u))
    return out
