"""Relation stability: abrupt changes in pairwise spatial relations.

For each unordered pair of objects that coexist in at least two frames we
track centroid distance, left/right and above/below ordering, and box contact.
An abrupt change at frame t is one of: a distance jump larger than the mean
box diagonal (scaled by ``tau_jump``), an ordering flip, or a contact flip,
where the flips only count when neither object moved far enough in one frame
to make the change a legitimate fast crossing.

The score is one minus the mean per-pair fraction of coexisting transitions
that contain at least one event.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .geometry import boxes_touch, centroid, centroid_distance, diagonal
from .interchange import TrackSet


class RelationEventKind(enum.Enum):
    ORDER_FLIP_X = "order_flip_x"
    ORDER_FLIP_Y = "order_flip_y"
    CONTACT_CHANGE = "contact_change"
    DISTANCE_JUMP = "distance_jump"


@dataclass(frozen=True)
class RelationParams:
    tau_jump: float = 1.0  # distance jump threshold, in units of mean box diagonal


@dataclass
class RelationEvent:
    pair: tuple[int, int]
    frame: int  # 1-indexed; always >= 2
    kind: RelationEventKind
    magnitude: float


@dataclass
class RelationSeries:
    """Per-frame relation features for one object pair; entries are None where
    either object is invisible."""

    pair: tuple[int, int]
    distance: list[float | None]
    i_left_of_j: list[bool | None]
    i_above_j: list[bool | None]
    contact: list[bool | None]
    # raw boxes kept for the per-event motion gate
    boxes_i: list = field(repr=False, default_factory=list)
    boxes_j: list = field(repr=False, default_factory=list)

    def coexist_count(self) -> int:
        return sum(1 for d in self.distance if d is not None)

    def transitions(self) -> list[int]:
        """1-indexed frames t >= 2 with both objects visible at t-1 and t."""
        return [
            t for t in range(2, len(self.distance) + 1)
            if self.distance[t - 2] is not None and self.distance[t - 1] is not None
        ]


def build_relation_series(tracks: TrackSet) -> list[RelationSeries]:
    """One series per unordered pair coexisting in at least two frames."""
    series = []
    ts = tracks.tracks
    frame_count = tracks.meta.frame_count
    for a in range(len(ts)):
        for b in range(a + 1, len(ts)):
            ti, tj = ts[a], ts[b]
            distance: list[float | None] = [None] * frame_count
            left: list[bool | None] = [None] * frame_count
            above: list[bool | None] = [None] * frame_count
            contact: list[bool | None] = [None] * frame_count
            n = 0
            for t in range(frame_count):
                bi, bj = ti.boxes[t], tj.boxes[t]
                if bi is None or bj is None:
                    continue
                n += 1
                ci, cj = centroid(bi), centroid(bj)
                distance[t] = math.hypot(ci[0] - cj[0], ci[1] - cj[1])
                left[t] = ci[0] < cj[0]
                above[t] = ci[1] < cj[1]
                contact[t] = boxes_touch(bi, bj)
            if n >= 2:
                series.append(RelationSeries(
                    pair=(ti.object_id, tj.object_id),
                    distance=distance,
                    i_left_of_j=left,
                    i_above_j=above,
                    contact=contact,
                    boxes_i=ti.boxes,
                    boxes_j=tj.boxes,
                ))
    return series


def detect_relation_events(series: RelationSeries, params: RelationParams = RelationParams()) -> list[RelationEvent]:
    events = []
    for t in series.transitions():
        bi0, bi1 = series.boxes_i[t - 2], series.boxes_i[t - 1]
        bj0, bj1 = series.boxes_j[t - 2], series.boxes_j[t - 1]
        d_prev = series.distance[t - 2]
        d_cur = series.distance[t - 1]
        delta_d = abs(d_cur - d_prev)
        scale = (diagonal(bi1) + diagonal(bj1)) / 2.0
        if delta_d > params.tau_jump * scale:
            events.append(RelationEvent(series.pair, t, RelationEventKind.DISTANCE_JUMP, delta_d))
        disp_i = centroid_distance(bi0, bi1)
        disp_j = centroid_distance(bj0, bj1)
        # a fast legitimate crossing moves at least one object by its own diagonal
        slow = disp_i < diagonal(bi1) and disp_j < diagonal(bj1)
        if not slow:
            continue
        magnitude = max(disp_i, disp_j)
        if series.i_left_of_j[t - 2] != series.i_left_of_j[t - 1]:
            events.append(RelationEvent(series.pair, t, RelationEventKind.ORDER_FLIP_X, magnitude))
        if series.i_above_j[t - 2] != series.i_above_j[t - 1]:
            events.append(RelationEvent(series.pair, t, RelationEventKind.ORDER_FLIP_Y, magnitude))
        if series.contact[t - 2] != series.contact[t - 1]:
            events.append(RelationEvent(series.pair, t, RelationEventKind.CONTACT_CHANGE, magnitude))
    return events


def compute_rs(tracks: TrackSet, params: RelationParams = RelationParams()) -> tuple[float, list[RelationEvent]]:
    """Relation stability score plus the detected events.

    Each pair contributes the fraction of its coexisting transitions that host
    at least one event (several events at the same frame collapse into one).
    Pairs never coexisting on consecutive frames contribute 0. No pairs at all
    scores 1.0.
    """
    all_series = build_relation_series(tracks)
    all_events = []
    fractions = []
    for series in all_series:
        events = detect_relation_events(series, params)
        all_events.extend(events)
        transitions = series.transitions()
        event_frames = {e.frame for e in events}
        fractions.append(len(event_frames) / len(transitions) if transitions else 0.0)
    if not fractions:
        return 1.0, []
    rs = 1.0 - sum(fractions) / len(fractions)
    return min(1.0, max(0.0, rs)), all_events
