"""Independent straight-loop reference implementations used as test oracles.

Everything here is deliberately written as plain Python loops over plain
Python data, separately from the package code, so that the two routes can
disagree. Do not import wcs modules here.

Conventions match the package's interchange model: frames are 1-indexed in
formulas, boxes are (x0, y0, x1, y1), a track is a list of per-frame boxes
with None for invisible frames.
"""

import math


def ref_persistence_ratio(boxes, frame_count):
    t_start = next(t for t, b in enumerate(boxes, start=1) if b is not None)
    present = 0
    for t in range(t_start, frame_count + 1):
        if boxes[t - 1] is not None:
            present += 1
    return present / (frame_count - t_start + 1)


def ref_op(tracks, frame_count, exempt_ids=()):
    """Mean persistence ratio over objects; exempt objects contribute 1.0."""
    if not tracks:
        return 1.0
    total = 0.0
    for object_id, boxes in tracks:
        if object_id in exempt_ids:
            total += 1.0
        else:
            total += ref_persistence_ratio(boxes, frame_count)
    return total / len(tracks)


def _centroid(b):
    return ((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0)


def _diag(b):
    return math.hypot(b[2] - b[0], b[3] - b[1])


def _dist(a, b):
    ca, cb = _centroid(a), _centroid(b)
    return math.hypot(ca[0] - cb[0], ca[1] - cb[1])


def _touch(a, b):
    return (min(a[2], b[2]) - max(a[0], b[0]) >= 0
            and min(a[3], b[3]) - max(a[1], b[1]) >= 0)


def ref_pair_event_frames(boxes_i, boxes_j, frame_count, tau_jump):
    """Frames (1-indexed) at which any abrupt relation change fires for one pair,
    plus the number of transitions where both objects are visible at t-1 and t."""
    event_frames = set()
    transitions = 0
    for t in range(2, frame_count + 1):
        a0, b0 = boxes_i[t - 2], boxes_j[t - 2]
        a1, b1 = boxes_i[t - 1], boxes_j[t - 1]
        if a0 is None or b0 is None or a1 is None or b1 is None:
            continue
        transitions += 1
        d_prev = _dist(a0, b0)
        d_cur = _dist(a1, b1)
        s = (_diag(a1) + _diag(b1)) / 2.0
        fired = abs(d_cur - d_prev) > tau_jump * s
        ca0, ca1 = _centroid(a0), _centroid(a1)
        cb0, cb1 = _centroid(b0), _centroid(b1)
        disp_i = math.hypot(ca1[0] - ca0[0], ca1[1] - ca0[1])
        disp_j = math.hypot(cb1[0] - cb0[0], cb1[1] - cb0[1])
        slow = disp_i < _diag(a1) and disp_j < _diag(b1)
        if slow and (ca0[0] < cb0[0]) != (ca1[0] < cb1[0]):
            fired = True
        if slow and (ca0[1] < cb0[1]) != (ca1[1] < cb1[1]):
            fired = True
        if slow and _touch(a0, b0) != _touch(a1, b1):
            fired = True
        if fired:
            event_frames.add(t)
    return event_frames, transitions


def ref_rs(tracks, frame_count, tau_jump=1.0):
    """tracks: list of (object_id, boxes)."""
    fractions = []
    for i in range(len(tracks)):
        for j in range(i + 1, len(tracks)):
            boxes_i, boxes_j = tracks[i][1], tracks[j][1]
            coexist = sum(
                1 for t in range(frame_count)
                if boxes_i[t] is not None and boxes_j[t] is not None
            )
            if coexist < 2:
                continue
            events, transitions = ref_pair_event_frames(boxes_i, boxes_j, frame_count, tau_jump)
            fractions.append(len(events) / transitions if transitions > 0 else 0.0)
    if not fractions:
        return 1.0
    rs = 1.0 - sum(fractions) / len(fractions)
    return min(1.0, max(0.0, rs))


def ref_kinematics(boxes, frame_count):
    """Per-frame (velocity, acceleration, speed) tuples, None where undefined."""
    vel = [None] * frame_count
    acc = [None] * frame_count
    runs = []
    start = None
    for t in range(frame_count):
        if boxes[t] is not None and start is None:
            start = t
        if (boxes[t] is None or t == frame_count - 1) and start is not None:
            end = t if boxes[t] is not None else t - 1
            runs.append((start, end))
            start = None
    for a, b in runs:
        if b - a + 1 < 2:
            continue
        for t in range(a, b + 1):
            p = _centroid(boxes[t])
            if t == a:
                q = _centroid(boxes[t + 1])
                vel[t] = (q[0] - p[0], q[1] - p[1])
            elif t == b:
                q = _centroid(boxes[t - 1])
                vel[t] = (p[0] - q[0], p[1] - q[1])
            else:
                q0 = _centroid(boxes[t - 1])
                q1 = _centroid(boxes[t + 1])
                vel[t] = ((q1[0] - q0[0]) / 2.0, (q1[1] - q0[1]) / 2.0)
            if a < t < b:
                q0 = _centroid(boxes[t - 1])
                q1 = _centroid(boxes[t + 1])
                acc[t] = (q1[0] - 2 * p[0] + q0[0], q1[1] - 2 * p[1] + q0[1])
    speed = [math.hypot(*v) if v is not None else None for v in vel]
    return vel, acc, speed


def ref_cc(tracks, frame_count, classes=None, v_min=0.5, alpha_max=0.5,
           w_cause=3, w_effect=5, p_near_frac=0.1, agent_classes=("person", "animal")):
    """Straight-loop causal compliance. tracks: list of (object_id, boxes);
    classes: dict object_id -> class_label."""
    classes = classes or {}
    kin = {oid: ref_kinematics(boxes, frame_count) for oid, boxes in tracks}
    boxes_of = dict(tracks)

    events = []  # (kind, oid, partner, t)
    for oid, boxes in tracks:
        vel, acc, speed = kin[oid]
        for t in range(2, frame_count + 1):
            if speed[t - 2] is None or speed[t - 1] is None:
                continue
            was = speed[t - 2] > v_min
            now = speed[t - 1] > v_min
            if not was and now:
                events.append(("motion_onset", oid, None, t))
            elif was and not now:
                events.append(("motion_stop", oid, None, t))
            elif acc[t - 1] is not None:
                mag = math.hypot(*acc[t - 1])
                if mag > alpha_max * _diag(boxes[t - 1]):
                    events.append(("sudden_velocity_change", oid, None, t))
    for i in range(len(tracks)):
        for j in range(i + 1, len(tracks)):
            oi, bi = tracks[i]
            oj, bj = tracks[j]
            for t in range(2, frame_count + 1):
                a0, b0 = bi[t - 2], bj[t - 2]
                a1, b1 = bi[t - 1], bj[t - 1]
                if a0 is None or b0 is None or a1 is None or b1 is None:
                    continue
                if _touch(a0, b0) or not _touch(a1, b1):
                    continue
                if _dist(a0, b0) - _dist(a1, b1) > v_min:
                    events.append(("collision", oi, oj, t))

    def gap(a, b):
        gx = max(0.0, max(a[0], b[0]) - min(a[2], b[2]))
        gy = max(0.0, max(a[1], b[1]) - min(a[3], b[3]))
        return math.hypot(gx, gy)

    violations = 0
    for kind, oid, partner, t in events:
        if kind in ("motion_onset", "sudden_velocity_change"):
            if classes.get(oid) in agent_classes:
                continue
            explained = False
            boxes = boxes_of[oid]
            for tau in range(max(1, t - w_cause), t + 1):
                mine = boxes[tau - 1]
                if mine is None:
                    continue
                for other_id, other_boxes in tracks:
                    if other_id == oid:
                        continue
                    ob = other_boxes[tau - 1]
                    if ob is not None and gap(mine, ob) <= p_near_frac * _diag(mine):
                        explained = True
            if not explained:
                violations += 1
        elif kind == "collision":
            _, _, speed_i = kin[oid]
            _, _, speed_j = kin[partner]
            for sid, speeds in ((oid, speed_i), (partner, speed_j)):
                pre = speeds[t - 2]
                if pre is None or pre > v_min:
                    continue
                reacted = False
                for tau in range(t, min(frame_count, t + w_effect) + 1):
                    s = speeds[tau - 1]
                    if s is not None and s >= v_min:
                        reacted = True
                if not reacted:
                    violations += 1
                break  # at most one violation per event
    if not events:
        return 1.0, 0, 0
    return 1.0 - violations / len(events), len(events), violations


def ref_warp_bilinear(src, flow):
    """Backward warp with bilinear sampling; plain loops.

    src: list of rows of integers; flow: [H][W][2] list. Returns (pred, valid)
    as nested lists; invalid where the sample point leaves the image.
    """
    h = len(src)
    w = len(src[0])
    pred = [[0.0] * w for _ in range(h)]
    valid = [[False] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            sx = x - flow[y][x][0]
            sy = y - flow[y][x][1]
            if sx < 0 or sy < 0 or sx > w - 1 or sy > h - 1:
                continue
            x0 = min(int(math.floor(sx)), w - 2) if w > 1 else 0
            y0 = min(int(math.floor(sy)), h - 2) if h > 1 else 0
            fx = sx - x0
            fy = sy - y0
            p00 = float(src[y0][x0])
            p01 = float(src[y0][min(x0 + 1, w - 1)])
            p10 = float(src[min(y0 + 1, h - 1)][x0])
            p11 = float(src[min(y0 + 1, h - 1)][min(x0 + 1, w - 1)])
            top = (1.0 - fx) * p00 + fx * p01
            bot = (1.0 - fx) * p10 + fx * p11
            pred[y][x] = (1.0 - fy) * top + fy * bot
            valid[y][x] = True
    return pred, valid


def ref_fp(frames, flow, c_max=0.5, tau_cut=0.6, cut_exclusion=True):
    """Mean robust flow-warp residual over transitions; no static-region masking."""
    t_count = len(frames)
    residuals = []
    for t in range(t_count - 1):
        pred, valid = ref_warp_bilinear(frames[t], flow[t])
        actual = frames[t + 1]
        num = 0.0
        raw_num = 0.0
        den = 0.0
        for y in range(len(actual)):
            for x in range(len(actual[0])):
                if not valid[y][x]:
                    continue
                diff = abs(float(actual[y][x]) - pred[y][x])
                raw_num += diff
                num += min(diff, c_max * 255.0)
                den += abs(float(actual[y][x]))
        if den == 0.0:
            residuals.append((0.0, 0.0))
        else:
            residuals.append((min(1.0, num / den), raw_num / den))
    kept = [e for e, raw in residuals if not (cut_exclusion and raw > tau_cut)]
    if not kept:
        return 0.0, residuals
    return sum(kept) / len(kept), residuals


def ref_pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def ref_average_ranks(xs):
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def ref_spearman(xs, ys):
    return ref_pearson(ref_average_ranks(xs), ref_average_ranks(ys))


def ref_nnls_enumerate(X, y, n_constrained):
    """Exhaustive active-set search: try every subset of constrained variables
    clamped to zero, solve the free least-squares problem on the rest, keep the
    feasible solution with the lowest SSE. X, y are lists; returns the coefficient
    list (length = columns of X)."""
    import itertools

    import numpy as np

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1]
    best = None
    best_sse = None
    for clamped in itertools.chain.from_iterable(
        itertools.combinations(range(n_constrained), k) for k in range(n_constrained + 1)
    ):
        keep = [c for c in range(p) if c not in clamped]
        sol, _, _, _ = np.linalg.lstsq(X[:, keep], y, rcond=None)
        z = np.zeros(p)
        z[keep] = sol
        if any(z[c] < -1e-12 for c in range(n_constrained)):
            continue
        z[:n_constrained] = np.maximum(z[:n_constrained], 0.0)
        sse = float(np.sum((X @ z - y) ** 2))
        if best_sse is None or sse < best_sse - 1e-15:
            best, best_sse = z, sse
    return best
