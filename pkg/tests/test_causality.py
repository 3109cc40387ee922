import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcs.causality import (
    CausalityParams,
    EventKind,
    ViolationKind,
    compute_cc,
    compute_kinematics,
    detect_motion_events,
)
from wcs.interchange import TrackSet

from conftest import box_at, linear_boxes, make_meta, make_track
from reference import ref_cc


def kin_of(ts, oid, params=CausalityParams()):
    return compute_kinematics(ts, params).objects[oid]


def test_uniform_motion_kinematics():
    meta = make_meta(frame_count=4)
    boxes = [box_at(10 + 2 * t, 50) for t in range(4)]
    ts = TrackSet(meta=meta, tracks=[make_track(1, boxes)])
    k = kin_of(ts, 1)
    assert [v[0] for v in k.velocity] == [2, 2, 2, 2]
    assert k.acceleration[0] is None and k.acceleration[3] is None
    assert k.acceleration[1] == (0, 0) and k.acceleration[2] == (0, 0)


def test_second_difference_acceleration():
    # x positions (0, 0, 4, 8): second difference 4 at t=2
    meta = make_meta(frame_count=4)
    boxes = [box_at(10, 50), box_at(10, 50), box_at(14, 50), box_at(18, 50)]
    ts = TrackSet(meta=meta, tracks=[make_track(1, boxes)])
    k = kin_of(ts, 1)
    assert k.acceleration[1] == (4.0, 0.0)


def test_stationary_never_moving():
    meta = make_meta(frame_count=6)
    ts = TrackSet(meta=meta, tracks=[make_track(1, linear_boxes((40, 40), (0, 0), 6))])
    k = kin_of(ts, 1)
    assert all(m is False for m in k.moving)


def test_rest_then_move_one_onset():
    meta = make_meta(frame_count=10)
    boxes = [box_at(20, 50)] * 5 + [box_at(20 + 3 * k, 50) for k in range(1, 6)]
    ts = TrackSet(meta=meta, tracks=[make_track(1, boxes)])
    events = detect_motion_events(compute_kinematics(ts), ts)
    onsets = [e for e in events if e.kind is EventKind.MOTION_ONSET]
    assert len(onsets) == 1


def test_constant_velocity_no_events():
    meta = make_meta(frame_count=8)
    ts = TrackSet(meta=meta, tracks=[make_track(1, linear_boxes((10, 50), (3, 0), 8))])
    assert detect_motion_events(compute_kinematics(ts), ts) == []


def test_collision_detected_at_contact_frame():
    # boxes approach at 3 px/frame and first touch at t=7
    meta = make_meta(frame_count=10)
    a = [box_at(20 + 3 * t, 50, 10, 10) for t in range(10)]
    b = [box_at(53, 50, 10, 10)] * 10
    # contact when gap = 53-5 - (20+3t+5) = 23 - 3t <= 0 -> t >= 7.67 -> frame index 8 (t=8, 0-based 7)
    ts = TrackSet(meta=meta, tracks=[make_track(1, a), make_track(2, b)])
    events = detect_motion_events(compute_kinematics(ts), ts)
    collisions = [e for e in events if e.kind is EventKind.COLLISION]
    assert len(collisions) == 1
    first_touch = next(
        t + 1 for t in range(10)
        if a[t][2] >= b[t][0] and a[t][0] <= b[t][2]
    )
    assert collisions[0].frame == first_touch
    assert collisions[0].partner_id == 2


def test_push_is_explained():
    # Q slides into resting P; P starts moving right after the contact
    meta = make_meta(frame_count=12)
    q, p = push_pair_boxes(12)
    ts = TrackSet(meta=meta, tracks=[make_track(1, q), make_track(2, p)])
    report = compute_cc(ts)
    assert report.n_events > 0
    assert report.violations == []
    assert report.cc == 1.0


def test_spontaneous_acceleration_in_empty_scene():
    meta = make_meta(frame_count=12)
    boxes = [box_at(50, 50)] * 6 + [box_at(50 + 4 * k, 50) for k in range(1, 7)]
    ts = TrackSet(meta=meta, tracks=[make_track(1, boxes)])
    report = compute_cc(ts)
    assert report.n_events == 1
    assert report.violations[0].violation_kind is ViolationKind.EFFECT_WITHOUT_CAUSE
    assert report.cc == 0.0


def test_agent_class_motion_is_self_caused():
    meta = make_meta(frame_count=12)
    boxes = [box_at(50, 50)] * 6 + [box_at(50 + 4 * k, 50) for k in range(1, 7)]
    ts = TrackSet(meta=meta, tracks=[make_track(1, boxes, class_label="person")])
    report = compute_cc(ts)
    assert report.cc == 1.0


def test_frozen_reaction_is_cause_without_effect():
    # A collides into resting B; B never moves afterwards
    meta = make_meta(frame_count=14)
    a, b = [], []
    for t in range(14):
        ax = 20 + 3 * t if t <= 6 else 38
        a.append(box_at(ax, 50, 10, 10))
        b.append(box_at(48, 50, 10, 10))
    ts = TrackSet(meta=meta, tracks=[make_track(1, a), make_track(2, b)])
    report = compute_cc(ts)
    kinds = {v.violation_kind for v in report.violations}
    assert ViolationKind.CAUSE_WITHOUT_EFFECT in kinds


def push_pair_boxes(frame_count=12):
    """Q slides right at 2 px/frame, touches resting P at frame 7 (x1 meets x0),
    stops; P carries the motion on. Yields collision + onset + stop, all benign."""
    q, p = [], []
    for t in range(frame_count):
        qx = 10 + 2 * min(t, 6)
        px = 30 if t <= 6 else 30 + 2 * (t - 6)
        q.append(box_at(qx, 50, 8, 6))
        p.append(box_at(px, 50, 8, 6))
    return q, p


def test_four_events_one_violation():
    # push scenario (collision + onset + stop, all fine) plus one spontaneous mover
    meta = make_meta(frame_count=12, height=200, width=200)
    q, p = push_pair_boxes(12)
    r = [box_at(100 if t <= 7 else 100 + 4 * (t - 7), 150, 8, 6) for t in range(12)]
    ts = TrackSet(meta=meta, tracks=[make_track(1, q), make_track(2, p), make_track(3, r)])
    report = compute_cc(ts)
    assert report.n_events == 4
    assert len(report.violations) == 1
    assert report.violations[0].object_id == 3
    assert report.cc == 0.75


def test_zero_events_scores_one():
    meta = make_meta(frame_count=6)
    ts = TrackSet(meta=meta, tracks=[make_track(1, linear_boxes((30, 30), (0, 0), 6))])
    report = compute_cc(ts)
    assert report.n_events == 0 and report.cc == 1.0


def test_motion_energy_constant_for_uniform_motion():
    meta = make_meta(frame_count=8, height=200, width=200)
    ts = TrackSet(meta=meta, tracks=[make_track(1, linear_boxes((20, 50), (3, 1), 8))])
    report = compute_cc(ts)
    assert report.motion_energy == pytest.approx([10.0] * 8)


def test_adding_unexplained_onset_decreases_cc():
    meta = make_meta(frame_count=12, height=300, width=300)
    q, p = push_pair_boxes(12)
    base = [make_track(1, q), make_track(2, p)]
    cc_before = compute_cc(TrackSet(meta=meta, tracks=base)).cc
    assert cc_before == 1.0
    extra = make_track(3, [box_at(250, 250)] * 6 + [box_at(250 + 3 * k, 250) for k in range(1, 7)])
    cc_after = compute_cc(TrackSet(meta=meta, tracks=base + [extra])).cc
    assert cc_after < cc_before


@st.composite
def random_motion_scenes(draw):
    t = draw(st.integers(min_value=4, max_value=10))
    n = draw(st.integers(min_value=1, max_value=3))
    tracks = []
    for i in range(n):
        kind = draw(st.sampled_from(["still", "uniform", "onset", "jumpy", "gappy"]))
        speed = draw(st.floats(0.0, 4.0, allow_nan=False))
        cx = draw(st.floats(20, 120, allow_nan=False))
        cy = draw(st.floats(20, 120, allow_nan=False))
        boxes = []
        for k in range(t):
            if kind == "still":
                boxes.append(box_at(cx, cy))
            elif kind == "uniform":
                boxes.append(box_at(cx + speed * k, cy))
            elif kind == "onset":
                half = t // 2
                boxes.append(box_at(cx + speed * max(0, k - half), cy))
            elif kind == "jumpy":
                boxes.append(box_at(cx + draw(st.floats(-8, 8, allow_nan=False)), cy))
            else:
                if draw(st.booleans()):
                    boxes.append(box_at(cx + speed * k, cy))
                else:
                    boxes.append(None)
        if not any(b is not None for b in boxes):
            boxes[0] = box_at(cx, cy)
        tracks.append((i + 1, boxes))
    return t, tracks


@settings(max_examples=60, deadline=None)
@given(random_motion_scenes())
def test_cc_matches_straight_loop_reference(scene):
    t, raw = scene
    meta = make_meta(frame_count=t, height=200, width=200)
    ts = TrackSet(meta=meta, tracks=[make_track(i, b) for i, b in raw])
    report = compute_cc(ts)
    ref = ref_cc(raw, t)
    assert 0.0 <= report.cc <= 1.0
    assert report.n_events == ref[1]
    assert len(report.violations) == ref[2]
    assert abs(report.cc - ref[0]) < 1e-12
