"""Object permanence: how long objects stay present after they first appear.

An object's persistence ratio is the fraction of frames it is visible from its
first appearance to the end of the video. Disappearances with a plausible
explanation are exempt: drifting out through a frame edge, being covered by
another object, or dropping out only on the final frame. Exempt objects count
as fully persistent so the score does not jump when an exemption flips.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .geometry import area, centroid, overlap_area
from .interchange import Track, TrackSet, VideoMeta


class Exemption(enum.Enum):
    NONE = "none"
    BOUNDARY_EXIT = "boundary_exit"
    OCCLUDED = "occluded"
    LAST_FRAME_EXIT = "last_frame_exit"


@dataclass(frozen=True)
class PermanenceParams:
    k_exit: int = 3           # trailing visible frames checked for edge-bound motion
    m_edge_frac: float = 0.03  # margin band width as a fraction of min(H, W), floor 2 px
    theta_occ: float = 0.9     # coverage fraction that counts as full occlusion

    def margin_px(self, meta: VideoMeta) -> float:
        return max(2.0, self.m_edge_frac * min(meta.height, meta.width))


@dataclass
class ObjectPermanence:
    object_id: int
    persistence_ratio: float
    exemption: Exemption


@dataclass
class PermanenceReport:
    op: float
    per_object: list[ObjectPermanence]


def object_persistence(track: Track, meta: VideoMeta) -> float:
    """Visible-frame fraction from first appearance to the end of the video."""
    t_start = track.t_start
    present = sum(1 for b in track.boxes[t_start - 1:] if b is not None)
    return present / (meta.frame_count - t_start + 1)


def _edge_distances(cx: float, cy: float, meta: VideoMeta) -> dict[str, float]:
    return {
        "left": cx,
        "right": meta.width - cx,
        "top": cy,
        "bottom": meta.height - cy,
    }


def _box_in_margin(box, edge: str, margin: float, meta: VideoMeta) -> bool:
    x0, y0, x1, y1 = box
    if edge == "left":
        return x0 <= margin
    if edge == "right":
        return x1 >= meta.width - margin
    if edge == "top":
        return y0 <= margin
    return y1 >= meta.height - margin


def classify_disappearance(
    track: Track,
    occluders: TrackSet,
    meta: VideoMeta,
    params: PermanenceParams = PermanenceParams(),
) -> Exemption:
    """Decide whether a track's disappearance looks legitimate.

    Checked in order: edge exit (centroid heading monotonically toward an edge
    over the last ``k_exit`` visible frames and the final box inside the margin
    band at that edge), full occlusion at the last visible frame, absence only
    on the final frame.
    """
    visible = [t for t, b in enumerate(track.boxes, start=1) if b is not None]
    tail = visible[-params.k_exit:]
    margin = params.margin_px(meta)
    tail_dists = []
    for t in tail:
        cx, cy = centroid(track.boxes[t - 1])
        tail_dists.append(_edge_distances(cx, cy, meta))
    last_box = track.boxes[visible[-1] - 1]
    for edge in ("left", "right", "top", "bottom"):
        ds = [d[edge] for d in tail_dists]
        monotone = all(b <= a for a, b in zip(ds, ds[1:]))
        approaching = len(ds) < 2 or (monotone and ds[-1] < ds[0])
        if approaching and _box_in_margin(last_box, edge, margin, meta):
            return Exemption.BOUNDARY_EXIT

    t_last = visible[-1]
    own_area = area(last_box)
    for other in occluders.tracks:
        if other.object_id == track.object_id:
            continue
        ob = other.boxes[t_last - 1]
        if ob is not None and overlap_area(ob, last_box) >= params.theta_occ * own_area:
            return Exemption.OCCLUDED

    t_start = track.t_start
    absent = [t for t in range(t_start, meta.frame_count + 1) if track.boxes[t - 1] is None]
    if absent == [meta.frame_count]:
        return Exemption.LAST_FRAME_EXIT
    return Exemption.NONE


def compute_op(tracks: TrackSet, params: PermanenceParams = PermanenceParams()) -> PermanenceReport:
    """Mean persistence over all objects; exempt objects contribute 1.0.

    An empty track set scores 1.0 (nothing to lose track of).
    """
    per_object = []
    total = 0.0
    for track in tracks.tracks:
        ratio = object_persistence(track, tracks.meta)
        if ratio < 1.0:
            exemption = classify_disappearance(track, tracks, tracks.meta, params)
        else:
            exemption = Exemption.NONE
        per_object.append(ObjectPermanence(track.object_id, ratio, exemption))
        total += 1.0 if exemption is not Exemption.NONE else ratio
    n = len(tracks.tracks)
    return PermanenceReport(op=total / n if n else 1.0, per_object=per_object)
