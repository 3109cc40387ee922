"""Causal compliance: motion-state changes must have causes, collisions must have effects.

Kinematics come from finite differences of box centroids. Four event kinds are
counted: motion onset, motion stop, sudden velocity change, and collision. An
onset or sudden change is unexplained when no other object came near the mover
in the preceding window and the mover is not an agent class; a collision into
a resting object that never starts moving within the following window is a
missing reaction. The score is one minus the violation fraction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .geometry import box_gap, boxes_touch, centroid, centroid_distance, diagonal
from .interchange import TrackSet


class EventKind(enum.Enum):
    MOTION_ONSET = "motion_onset"
    MOTION_STOP = "motion_stop"
    SUDDEN_VELOCITY_CHANGE = "sudden_velocity_change"
    COLLISION = "collision"


class ViolationKind(enum.Enum):
    NONE = "none"
    EFFECT_WITHOUT_CAUSE = "effect_without_cause"
    CAUSE_WITHOUT_EFFECT = "cause_without_effect"


@dataclass(frozen=True)
class CausalityParams:
    v_min: float = 0.5        # px/frame below which an object counts as resting
    alpha_max: float = 0.5    # acceleration threshold, fraction of box diagonal per frame^2
    w_cause: int = 3          # frames before an event searched for a cause
    w_effect: int = 5         # frames after a collision searched for a reaction
    p_near_frac: float = 0.1  # near-contact margin, fraction of the mover's diagonal
    agent_classes: tuple[str, ...] = ("person", "animal")


@dataclass
class EventRecord:
    kind: EventKind
    object_id: int
    frame: int  # 1-indexed
    partner_id: int | None = None
    explained: bool = True
    violation_kind: ViolationKind = ViolationKind.NONE


@dataclass
class ObjectKinematics:
    """Finite-difference series for one object; None where undefined.

    Velocities use central differences on run interiors and one-sided ones at
    run boundaries; accelerations (second differences) exist only on interiors,
    so a run must span 3+ frames to have any.
    """

    object_id: int
    position: list[tuple[float, float] | None]
    velocity: list[tuple[float, float] | None]
    acceleration: list[tuple[float, float] | None]
    speed: list[float | None]
    moving: list[bool | None]


@dataclass
class KinematicsSeries:
    objects: dict[int, ObjectKinematics] = field(default_factory=dict)


@dataclass
class CausalReport:
    cc: float
    n_events: int
    events: list[EventRecord]
    violations: list[EventRecord]
    motion_energy: list[float]


def _visible_runs(boxes) -> list[tuple[int, int]]:
    runs = []
    start = None
    for t, b in enumerate(boxes):
        if b is not None and start is None:
            start = t
        if b is None and start is not None:
            runs.append((start, t - 1))
            start = None
    if start is not None:
        runs.append((start, len(boxes) - 1))
    return runs


def compute_kinematics(tracks: TrackSet, params: CausalityParams = CausalityParams()) -> KinematicsSeries:
    series = KinematicsSeries()
    frame_count = tracks.meta.frame_count
    for track in tracks.tracks:
        pos: list[tuple[float, float] | None] = [
            centroid(b) if b is not None else None for b in track.boxes
        ]
        vel: list[tuple[float, float] | None] = [None] * frame_count
        acc: list[tuple[float, float] | None] = [None] * frame_count
        for a, b in _visible_runs(track.boxes):
            if b - a + 1 < 2:
                continue
            for t in range(a, b + 1):
                if t == a:
                    vel[t] = (pos[t + 1][0] - pos[t][0], pos[t + 1][1] - pos[t][1])
                elif t == b:
                    vel[t] = (pos[t][0] - pos[t - 1][0], pos[t][1] - pos[t - 1][1])
                else:
                    vel[t] = ((pos[t + 1][0] - pos[t - 1][0]) / 2.0,
                              (pos[t + 1][1] - pos[t - 1][1]) / 2.0)
                if a < t < b:
                    acc[t] = (pos[t + 1][0] - 2 * pos[t][0] + pos[t - 1][0],
                              pos[t + 1][1] - 2 * pos[t][1] + pos[t - 1][1])
        speed = [math.hypot(*v) if v is not None else None for v in vel]
        moving = [s > params.v_min if s is not None else None for s in speed]
        series.objects[track.object_id] = ObjectKinematics(
            object_id=track.object_id,
            position=pos, velocity=vel, acceleration=acc, speed=speed, moving=moving,
        )
    return series


def detect_motion_events(
    kin: KinematicsSeries,
    tracks: TrackSet,
    params: CausalityParams = CausalityParams(),
) -> list[EventRecord]:
    """Raw events, not yet cause-checked. At most one per object per frame:
    an onset/stop flip wins over a plain acceleration spike."""
    events = []
    frame_count = tracks.meta.frame_count
    for track in tracks.tracks:
        k = kin.objects[track.object_id]
        for t in range(2, frame_count + 1):
            was, now = k.moving[t - 2], k.moving[t - 1]
            if was is None or now is None:
                continue
            if not was and now:
                events.append(EventRecord(EventKind.MOTION_ONSET, track.object_id, t))
            elif was and not now:
                events.append(EventRecord(EventKind.MOTION_STOP, track.object_id, t))
            elif k.acceleration[t - 1] is not None:
                mag = math.hypot(*k.acceleration[t - 1])
                if mag > params.alpha_max * diagonal(track.boxes[t - 1]):
                    events.append(EventRecord(EventKind.SUDDEN_VELOCITY_CHANGE, track.object_id, t))
    ts = tracks.tracks
    for a in range(len(ts)):
        for b in range(a + 1, len(ts)):
            ti, tj = ts[a], ts[b]
            for t in range(2, frame_count + 1):
                a0, b0 = ti.boxes[t - 2], tj.boxes[t - 2]
                a1, b1 = ti.boxes[t - 1], tj.boxes[t - 1]
                if a0 is None or b0 is None or a1 is None or b1 is None:
                    continue
                if boxes_touch(a0, b0) or not boxes_touch(a1, b1):
                    continue
                closing = centroid_distance(a0, b0) - centroid_distance(a1, b1)
                if closing > params.v_min:
                    events.append(EventRecord(
                        EventKind.COLLISION, ti.object_id, t, partner_id=tj.object_id,
                    ))
    return events


def _near_cause_exists(track, tracks: TrackSet, t: int, params: CausalityParams) -> bool:
    for tau in range(max(1, t - params.w_cause), t + 1):
        mine = track.boxes[tau - 1]
        if mine is None:
            continue
        margin = params.p_near_frac * diagonal(mine)
        for other in tracks.tracks:
            if other.object_id == track.object_id:
                continue
            ob = other.boxes[tau - 1]
            if ob is not None and box_gap(mine, ob) <= margin:
                return True
    return False


def check_causes(
    events: list[EventRecord],
    tracks: TrackSet,
    kin: KinematicsSeries,
    params: CausalityParams = CausalityParams(),
) -> list[EventRecord]:
    """Finalize events: mark unexplained onsets and missing collision reactions."""
    frame_count = tracks.meta.frame_count
    for ev in events:
        if ev.kind in (EventKind.MOTION_ONSET, EventKind.SUDDEN_VELOCITY_CHANGE):
            track = tracks.track_by_id(ev.object_id)
            if track.class_label in params.agent_classes:
                continue
            if not _near_cause_exists(track, tracks, ev.frame, params):
                ev.explained = False
                ev.violation_kind = ViolationKind.EFFECT_WITHOUT_CAUSE
        elif ev.kind is EventKind.COLLISION:
            # find a struck member that was resting just before impact
            for oid in (ev.object_id, ev.partner_id):
                speeds = kin.objects[oid].speed
                pre = speeds[ev.frame - 2]
                if pre is None or pre > params.v_min:
                    continue
                window = range(ev.frame, min(frame_count, ev.frame + params.w_effect) + 1)
                reacted = any(
                    speeds[tau - 1] is not None and speeds[tau - 1] >= params.v_min
                    for tau in window
                )
                if not reacted:
                    ev.explained = False
                    ev.violation_kind = ViolationKind.CAUSE_WITHOUT_EFFECT
                break
    return events


def compute_cc(tracks: TrackSet, params: CausalityParams = CausalityParams()) -> CausalReport:
    kin = compute_kinematics(tracks, params)
    events = check_causes(detect_motion_events(kin, tracks, params), tracks, kin, params)
    violations = [e for e in events if e.violation_kind is not ViolationKind.NONE]
    cc = 1.0 - len(violations) / len(events) if events else 1.0
    energy = []
    for t in range(tracks.meta.frame_count):
        total = 0.0
        for k in kin.objects.values():
            if k.speed[t] is not None:
                total += k.speed[t] ** 2
        energy.append(total)
    return CausalReport(cc=cc, n_events=len(events), events=events,
                        violations=violations, motion_energy=energy)
