"""Data model and on-disk formats for track/frame/flow bundles, scores, weights, and reports.

A *bundle* is a directory holding a tracks file (required) plus optional frame
and flow tensors:

    tracks.txt    line-delimited text; first line ``meta <video_id> <T> <H> <W> <fps>``,
                  then one line per object: ``<object_id> <class_label>
                  [action=<label>] s1 ... sT`` where each slot is ``-`` (not
                  visible) or ``x0,y0,x1,y1``. The action token is a reserved
                  informational column.
    frames.wcsf   magic ``WCSF``, little-endian u32 T, H, W, then T*H*W raw u8, row-major.
    flow.wcsw     magic ``WCSW``, little-endian u32 T-1, H, W, then (T-1)*H*W*2 f32
                  (dx, dy interleaved per pixel), mapping frame t to t+1.

Everything round-trips exactly: floats are written with ``repr`` (tracks/CSV) or
17 significant digits (JSON), both of which reparse to the identical double.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

TRACKS_FILENAME = "tracks.txt"
FRAMES_FILENAME = "frames.wcsf"
FLOW_FILENAME = "flow.wcsw"

FRAMES_MAGIC = b"WCSF"
FLOW_MAGIC = b"WCSW"


class ParseError(Exception):
    """A file could not be decoded. Carries the path and the byte offset of the problem."""

    def __init__(self, path, offset, message):
        self.path = str(path)
        self.offset = int(offset)
        self.message = str(message)
        super().__init__(f"{self.path}: byte {self.offset}: {message}")

    def __reduce__(self):
        return (ParseError, (self.path, self.offset, self.message))


class ValidationError(Exception):
    """A structure parsed fine but violates an invariant."""


Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    frame_count: int
    height: int
    width: int
    frame_rate: Fraction = Fraction(12)

    def validate(self):
        if not self.video_id or any(c.isspace() for c in self.video_id):
            raise ValidationError("video_id must be nonempty and contain no whitespace")
        if self.frame_count < 2:
            raise ValidationError(f"frame_count must be >= 2, got {self.frame_count}")
        if self.height < 1 or self.width < 1:
            raise ValidationError("height and width must be >= 1")
        if self.frame_rate <= 0:
            raise ValidationError("frame_rate must be positive")


@dataclass
class Track:
    """One object's per-frame presence. ``boxes[t]`` is None when not visible at frame t+1.

    ``action_label`` is a reserved informational column (written as an
    ``action=<label>`` token): producers may attach a recognized action, the
    core carries it through untouched.
    """

    object_id: int
    class_label: str
    boxes: list[Box | None]
    action_label: str | None = None

    @property
    def visibility(self) -> list[bool]:
        return [b is not None for b in self.boxes]

    @property
    def t_start(self) -> int:
        """First visible frame, 1-indexed."""
        return next(i + 1 for i, b in enumerate(self.boxes) if b is not None)

    @property
    def t_end(self) -> int:
        """Last visible frame, 1-indexed."""
        return len(self.boxes) - next(i for i, b in enumerate(reversed(self.boxes)) if b is not None)

    def validate(self, meta: VideoMeta):
        if len(self.boxes) != meta.frame_count:
            raise ValidationError(
                f"track {self.object_id}: {len(self.boxes)} slots for {meta.frame_count} frames"
            )
        if not any(b is not None for b in self.boxes):
            raise ValidationError(f"track {self.object_id}: no visible frame")
        if not self.class_label or any(c.isspace() for c in self.class_label):
            raise ValidationError(f"track {self.object_id}: bad class_label {self.class_label!r}")
        if self.action_label is not None and (
                not self.action_label or any(c.isspace() for c in self.action_label)):
            raise ValidationError(f"track {self.object_id}: bad action_label {self.action_label!r}")
        for t, b in enumerate(self.boxes):
            if b is None:
                continue
            x0, y0, x1, y1 = b
            if not all(math.isfinite(v) for v in b):
                raise ValidationError(f"track {self.object_id}, frame {t + 1}: non-finite box")
            if not (0 <= x0 < x1 <= meta.width and 0 <= y0 < y1 <= meta.height):
                raise ValidationError(
                    f"track {self.object_id}, frame {t + 1}: box {b} violates "
                    f"0 <= x0 < x1 <= {meta.width}, 0 <= y0 < y1 <= {meta.height}"
                )


@dataclass
class TrackSet:
    meta: VideoMeta
    tracks: list[Track] = field(default_factory=list)

    def validate(self):
        self.meta.validate()
        ids = [t.object_id for t in self.tracks]
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate object_id in track set")
        for t in self.tracks:
            t.validate(self.meta)

    def track_by_id(self, object_id: int) -> Track:
        for t in self.tracks:
            if t.object_id == object_id:
                return t
        raise KeyError(object_id)


@dataclass
class Bundle:
    tracks: TrackSet
    frames: np.ndarray | None = None  # (T, H, W) u8
    flow: np.ndarray | None = None  # (T-1, H, W, 2) f32

    @property
    def has_pixels(self) -> bool:
        return self.frames is not None and self.flow is not None


def _fmt_float(x: float) -> str:
    # repr of a Python float is the shortest string that reparses to the same double
    return repr(float(x))


# ---------------------------------------------------------------------------
# tracks file

def _fraction_to_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _parse_fraction(s: str) -> Fraction:
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(s)


def write_tracks(ts: TrackSet, path) -> None:
    ts.validate()
    m = ts.meta
    lines = [f"meta {m.video_id} {m.frame_count} {m.height} {m.width} {_fraction_to_str(m.frame_rate)}"]
    for tr in ts.tracks:
        slots = []
        for b in tr.boxes:
            if b is None:
                slots.append("-")
            else:
                slots.append(",".join(_fmt_float(v) for v in b))
        action = f" action={tr.action_label}" if tr.action_label is not None else ""
        lines.append(f"{tr.object_id} {tr.class_label}{action} " + " ".join(slots))
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_tracks(path) -> TrackSet:
    with open(path, "rb") as fh:
        data = fh.read()
    offset = 0
    lines = data.split(b"\n")
    meta = None
    tracks = []
    for raw in lines:
        line = raw.decode("utf-8", errors="replace").strip()
        if not line:
            offset += len(raw) + 1
            continue
        fields = line.split()
        if meta is None:
            if fields[0] != "meta" or len(fields) != 6:
                raise ParseError(path, offset, "expected 'meta <video_id> <T> <H> <W> <fps>'")
            try:
                meta = VideoMeta(
                    video_id=fields[1],
                    frame_count=int(fields[2]),
                    height=int(fields[3]),
                    width=int(fields[4]),
                    frame_rate=_parse_fraction(fields[5]),
                )
            except (ValueError, ZeroDivisionError) as e:
                raise ParseError(path, offset, f"bad meta line: {e}") from e
        else:
            action_label = None
            head = 2
            if len(fields) > 2 and fields[2].startswith("action="):
                action_label = fields[2][len("action="):]
                head = 3
            if len(fields) != head + meta.frame_count:
                raise ParseError(
                    path, offset,
                    f"track line has {len(fields) - head} slots, expected {meta.frame_count}",
                )
            try:
                object_id = int(fields[0])
            except ValueError as e:
                raise ParseError(path, offset, f"bad object_id {fields[0]!r}") from e
            boxes: list[Box | None] = []
            for slot in fields[head:]:
                if slot == "-":
                    boxes.append(None)
                    continue
                parts = slot.split(",")
                if len(parts) != 4:
                    raise ParseError(path, offset, f"box slot {slot!r} is not 4 comma-separated values")
                try:
                    boxes.append(tuple(float(p) for p in parts))
                except ValueError as e:
                    raise ParseError(path, offset, f"bad box slot {slot!r}") from e
            tracks.append(Track(object_id=object_id, class_label=fields[1],
                                boxes=boxes, action_label=action_label))
        offset += len(raw) + 1
    if meta is None:
        raise ParseError(path, 0, "empty tracks file")
    ts = TrackSet(meta=meta, tracks=tracks)
    ts.validate()
    return ts


# ---------------------------------------------------------------------------
# binary tensors

def write_frames(frames: np.ndarray, path) -> None:
    frames = np.asarray(frames)
    if frames.ndim != 3 or frames.dtype != np.uint8:
        raise ValidationError(f"frames must be (T, H, W) uint8, got {frames.shape} {frames.dtype}")
    t, h, w = frames.shape
    buf = io.BytesIO()
    buf.write(FRAMES_MAGIC)
    buf.write(np.array([t, h, w], dtype="<u4").tobytes())
    buf.write(np.ascontiguousarray(frames).tobytes())
    _atomic_write_bytes(path, buf.getvalue())


def read_frames(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != FRAMES_MAGIC:
        raise ParseError(path, 0, f"bad magic {data[:4]!r}, expected {FRAMES_MAGIC!r}")
    if len(data) < 16:
        raise ParseError(path, len(data), "truncated header")
    t, h, w = np.frombuffer(data, dtype="<u4", count=3, offset=4)
    expected = 16 + int(t) * int(h) * int(w)
    if len(data) != expected:
        raise ParseError(path, min(len(data), expected), f"file is {len(data)} bytes, expected {expected}")
    return np.frombuffer(data, dtype=np.uint8, offset=16).reshape(int(t), int(h), int(w)).copy()


def write_flow(flow: np.ndarray, path) -> None:
    flow = np.asarray(flow)
    if flow.ndim != 4 or flow.shape[-1] != 2 or flow.dtype != np.float32:
        raise ValidationError(f"flow must be (T-1, H, W, 2) float32, got {flow.shape} {flow.dtype}")
    if not np.all(np.isfinite(flow)):
        raise ValidationError("flow contains non-finite values")
    n, h, w, _ = flow.shape
    buf = io.BytesIO()
    buf.write(FLOW_MAGIC)
    buf.write(np.array([n, h, w], dtype="<u4").tobytes())
    buf.write(np.ascontiguousarray(flow.astype("<f4")).tobytes())
    _atomic_write_bytes(path, buf.getvalue())


def read_flow(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != FLOW_MAGIC:
        raise ParseError(path, 0, f"bad magic {data[:4]!r}, expected {FLOW_MAGIC!r}")
    if len(data) < 16:
        raise ParseError(path, len(data), "truncated header")
    n, h, w = np.frombuffer(data, dtype="<u4", count=3, offset=4)
    expected = 16 + int(n) * int(h) * int(w) * 2 * 4
    if len(data) != expected:
        raise ParseError(path, min(len(data), expected), f"file is {len(data)} bytes, expected {expected}")
    flow = np.frombuffer(data, dtype="<f4", offset=16).reshape(int(n), int(h), int(w), 2)
    flow = flow.astype(np.float32, copy=True)
    if not np.all(np.isfinite(flow)):
        raise ValidationError("flow contains non-finite values")
    return flow


# ---------------------------------------------------------------------------
# bundle

def read_bundle(directory) -> Bundle:
    """Read and cross-validate a bundle directory. Frames/flow are optional together."""
    tracks_path = os.path.join(directory, TRACKS_FILENAME)
    if not os.path.exists(tracks_path):
        raise ValidationError(f"bundle {directory} has no {TRACKS_FILENAME}")
    ts = read_tracks(tracks_path)
    meta = ts.meta

    frames = flow = None
    frames_path = os.path.join(directory, FRAMES_FILENAME)
    flow_path = os.path.join(directory, FLOW_FILENAME)
    if os.path.exists(frames_path):
        frames = read_frames(frames_path)
        if frames.shape != (meta.frame_count, meta.height, meta.width):
            raise ValidationError(
                f"frames shape {frames.shape} does not match meta "
                f"({meta.frame_count}, {meta.height}, {meta.width})"
            )
    if os.path.exists(flow_path):
        flow = read_flow(flow_path)
        if flow.shape != (meta.frame_count - 1, meta.height, meta.width, 2):
            raise ValidationError(
                f"flow shape {flow.shape} does not match meta "
                f"({meta.frame_count - 1}, {meta.height}, {meta.width}, 2)"
            )
    return Bundle(tracks=ts, frames=frames, flow=flow)


def write_bundle(bundle: Bundle, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    write_tracks(bundle.tracks, os.path.join(directory, TRACKS_FILENAME))
    if bundle.frames is not None:
        write_frames(bundle.frames, os.path.join(directory, FRAMES_FILENAME))
    if bundle.flow is not None:
        write_flow(bundle.flow, os.path.join(directory, FLOW_FILENAME))


# ---------------------------------------------------------------------------
# human scores CSV

@dataclass(frozen=True)
class HumanScoreRecord:
    video_id: str
    score: float


def write_scores_csv(records: list[HumanScoreRecord], path) -> None:
    seen = set()
    for r in records:
        if not math.isfinite(r.score):
            raise ValidationError(f"{r.video_id}: non-finite score")
        if r.video_id in seen:
            raise ValidationError(f"duplicate video_id {r.video_id!r}")
        seen.add(r.video_id)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["video_id", "score"])
    for r in records:
        w.writerow([r.video_id, _fmt_float(r.score)])
    _atomic_write_bytes(path, buf.getvalue().encode("utf-8"))


def read_scores_csv(path) -> list[HumanScoreRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["video_id", "score"]:
        raise ParseError(path, 0, "expected header 'video_id,score'")
    records = []
    seen = set()
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(path, 0, f"row {row!r} does not have 2 columns")
        vid, score_s = row
        try:
            score = float(score_s)
        except ValueError as e:
            raise ParseError(path, 0, f"bad score {score_s!r}") from e
        if not math.isfinite(score):
            raise ValidationError(f"{vid}: non-finite score")
        if vid in seen:
            raise ValidationError(f"duplicate video_id {vid!r}")
        seen.add(vid)
        records.append(HumanScoreRecord(video_id=vid, score=score))
    return records


# ---------------------------------------------------------------------------
# canonical JSON (reports, weight files)

def _format_json_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValidationError("non-finite float in report")
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if v is None:
        return "null"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_format_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        items = []
        for k in sorted(v):
            if not isinstance(k, str):
                raise ValidationError(f"non-string report key {k!r}")
            items.append(json.dumps(k, ensure_ascii=False) + ":" + _format_json_value(v[k]))
        return "{" + ",".join(items) + "}"
    raise ValidationError(f"unserializable value of type {type(v).__name__}")


def canonical_json(obj) -> str:
    """Serialize with sorted keys and 17-significant-digit floats: byte-stable and lossless."""
    return _format_json_value(obj) + "\n"


def write_report(report: dict, path) -> None:
    _atomic_write_bytes(path, canonical_json(report).encode("utf-8"))


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.pos, e.msg) from e


def _atomic_write_bytes(path, data: bytes) -> None:
    path = str(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
