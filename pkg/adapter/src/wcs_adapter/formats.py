"""Writers (and readers, for round-trip checks) for the WCS interchange formats.

The formats are the contract with the scoring engine, reimplemented here so the
adapter stays a pure client of the published byte layout:

    tracks.txt   "meta <video_id> <T> <H> <W> <fps>" then one line per object:
                 "<object_id> <class_label> s1 ... sT", slot "-" or "x0,y0,x1,y1"
    frames.wcsf  b"WCSF" + u32le T, H, W + T*H*W u8 row-major
    flow.wcsw    b"WCSW" + u32le T-1, H, W + (T-1)*H*W*2 f32le (dx, dy per pixel,
                 expressed at destination pixels, mapping frame t to t+1)
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

TRACKS_FILENAME = "tracks.txt"
FRAMES_FILENAME = "frames.wcsf"
FLOW_FILENAME = "flow.wcsw"


def _atomic_write(path, data: bytes):
    d = os.path.dirname(str(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tracks(path, video_id: str, frame_count: int, height: int, width: int,
                 frame_rate: str, tracks: list[tuple[int, str, list]]):
    """tracks: (object_id, class_label, per-frame box-or-None) tuples."""
    lines = [f"meta {video_id} {frame_count} {height} {width} {frame_rate}"]
    for object_id, label, boxes in tracks:
        slots = []
        for b in boxes:
            slots.append("-" if b is None else ",".join(repr(float(v)) for v in b))
        lines.append(f"{object_id} {label} " + " ".join(slots))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_tracks(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    meta = lines[0].split()
    assert meta[0] == "meta", "not a tracks file"
    video_id, t, h, w, fps = meta[1], int(meta[2]), int(meta[3]), int(meta[4]), meta[5]
    tracks = []
    for line in lines[1:]:
        fields = line.split()
        boxes = []
        for slot in fields[2:]:
            boxes.append(None if slot == "-" else tuple(float(x) for x in slot.split(",")))
        tracks.append((int(fields[0]), fields[1], boxes))
    return video_id, t, h, w, fps, tracks


def write_frames(path, frames: np.ndarray):
    frames = np.ascontiguousarray(frames, dtype=np.uint8)
    t, h, w = frames.shape
    _atomic_write(path, b"WCSF" + np.array([t, h, w], dtype="<u4").tobytes()
                  + frames.tobytes())


def read_frames(path):
    with open(path, "rb") as fh:
        data = fh.read()
    assert data[:4] == b"WCSF", "bad magic"
    t, h, w = np.frombuffer(data, dtype="<u4", count=3, offset=4)
    return np.frombuffer(data, dtype=np.uint8, offset=16).reshape(int(t), int(h), int(w)).copy()


def write_flow(path, flow: np.ndarray):
    flow = np.ascontiguousarray(flow, dtype="<f4")
    n, h, w, _ = flow.shape
    _atomic_write(path, b"WCSW" + np.array([n, h, w], dtype="<u4").tobytes()
                  + flow.tobytes())


def read_flow(path):
    with open(path, "rb") as fh:
        data = fh.read()
    assert data[:4] == b"WCSW", "bad magic"
    n, h, w = np.frombuffer(data, dtype="<u4", count=3, offset=4)
    return np.frombuffer(data, dtype="<f4", offset=16).reshape(int(n), int(h), int(w), 2).copy()
