"""Axis-aligned box helpers shared by the submetric modules and the simulator.

Boxes are (x0, y0, x1, y1) with x0 < x1 and y0 < y1, pixel coordinates, y down.
"""

from __future__ import annotations

import math

Box = tuple[float, float, float, float]


def centroid(b: Box) -> tuple[float, float]:
    return ((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0)


def diagonal(b: Box) -> float:
    return math.hypot(b[2] - b[0], b[3] - b[1])


def area(b: Box) -> float:
    return (b[2] - b[0]) * (b[3] - b[1])


def overlap_area(a: Box, b: Box) -> float:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    return w * h if w > 0 and h > 0 else 0.0


def boxes_touch(a: Box, b: Box) -> bool:
    """True when the boxes overlap or share an edge/corner (closed intervals)."""
    return (min(a[2], b[2]) - max(a[0], b[0]) >= 0
            and min(a[3], b[3]) - max(a[1], b[1]) >= 0)


def box_gap(a: Box, b: Box) -> float:
    """Euclidean distance between the boxes; 0 when they touch or overlap."""
    gx = max(0.0, max(a[0], b[0]) - min(a[2], b[2]))
    gy = max(0.0, max(a[1], b[1]) - min(a[3], b[3]))
    return math.hypot(gx, gy)


def centroid_distance(a: Box, b: Box) -> float:
    ca, cb = centroid(a), centroid(b)
    return math.hypot(ca[0] - cb[0], ca[1] - cb[1])
