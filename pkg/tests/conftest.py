import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from fractions import Fraction

import pytest

from wcs.interchange import Track, TrackSet, VideoMeta


def make_meta(frame_count=10, height=100, width=100, video_id="vid", frame_rate=Fraction(12)):
    return VideoMeta(video_id=video_id, frame_count=frame_count,
                     height=height, width=width, frame_rate=frame_rate)


def make_track(object_id, boxes, class_label="box"):
    return Track(object_id=object_id, class_label=class_label, boxes=list(boxes))


def box_at(cx, cy, w=8.0, h=6.0):
    return (cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def linear_boxes(start, vel, frame_count, w=8.0, h=6.0, visible=None):
    """Boxes moving linearly; ``visible`` is an optional set of 1-indexed frames."""
    boxes = []
    for t in range(frame_count):
        if visible is not None and (t + 1) not in visible:
            boxes.append(None)
        else:
            boxes.append(box_at(start[0] + vel[0] * t, start[1] + vel[1] * t, w, h))
    return boxes


@pytest.fixture
def simple_trackset():
    meta = make_meta(frame_count=6)
    tracks = [
        make_track(1, linear_boxes((20, 20), (2, 0), 6)),
        make_track(2, linear_boxes((60, 60), (0, 0), 6)),
    ]
    return TrackSet(meta=meta, tracks=tracks)
