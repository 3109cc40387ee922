"""Video -> interchange bundle: decode, detect, track, estimate flow, write.

Default models are the classical OpenCV ones so the adapter runs offline:
median-background subtraction for detection, greedy IoU association for
tracking, and Farneback dense optical flow. Grayscale conversion is ITU-R 601
luma (OpenCV's BGR2GRAY), so flicker values are comparable across adapters.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import cv2
import numpy as np

from .config import AdapterConfig
from . import formats

MIN_COMPONENT_AREA = 9      # px, below this a blob is noise
BG_DIFF_THRESHOLD = 20      # gray levels against the median background
IOU_MATCH_THRESHOLD = 0.1
TRACK_MAX_AGE = 5           # frames a track survives without a detection
TRACK_MIN_HITS = 2          # tracks with fewer detections are dropped
REID_PATCH = 16             # crop embedding resolution


class ExtractionError(Exception):
    pass


@dataclass
class Detection:
    box: tuple[float, float, float, float]
    confidence: float


def decode_video(path: str, stride: int = 1) -> np.ndarray:
    """Grayscale frame stack (T, H, W) u8, subsampled by stride."""
    cap = cv2.VideoCapture(str(path))
    if not cap.isOpened():
        raise ExtractionError(f"cannot decode video {path}")
    frames = []
    index = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        if index % stride == 0:
            frames.append(cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY))
        index += 1
    cap.release()
    if len(frames) < 2:
        raise ExtractionError(f"{path}: decoded {len(frames)} frames, need at least 2")
    return np.stack(frames)


def detect_bgsub(frames: np.ndarray, confidence_threshold: float) -> list[list[Detection]]:
    """Median-background subtraction plus connected components per frame."""
    background = np.median(frames, axis=0).astype(np.uint8)
    per_frame = []
    for frame in frames:
        diff = cv2.absdiff(frame, background)
        mask = (diff > BG_DIFF_THRESHOLD).astype(np.uint8)
        n_labels, _, stats, _ = cv2.connectedComponentsWithStats(mask, connectivity=8)
        detections = []
        for label in range(1, n_labels):
            x, y, w, h, area = stats[label]
            if area < MIN_COMPONENT_AREA or w < 1 or h < 1:
                continue
            confidence = area / (area + 2.0 * MIN_COMPONENT_AREA)
            if confidence < confidence_threshold:
                continue
            detections.append(Detection(box=(float(x), float(y), float(x + w), float(y + h)),
                                         confidence=float(confidence)))
        per_frame.append(detections)
    return per_frame


def _iou(a, b) -> float:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    if w <= 0 or h <= 0:
        return 0.0
    inter = w * h
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


@dataclass
class _TrackState:
    track_id: int
    boxes: list  # per-frame box or None
    last_seen: int
    hits: int


def track_iou(per_frame: list[list[Detection]], frame_count: int) -> list[tuple[int, list]]:
    """Greedy IoU association, highest-overlap pairs first; misses keep the
    slot empty and a track dies quietly after TRACK_MAX_AGE missed frames."""
    active: list[_TrackState] = []
    finished: list[_TrackState] = []
    next_id = 1
    for t in range(frame_count):
        detections = per_frame[t]
        pairs = []
        for ti, tr in enumerate(active):
            last_box = next(b for b in reversed(tr.boxes) if b is not None)
            for di, det in enumerate(detections):
                iou = _iou(last_box, det.box)
                if iou >= IOU_MATCH_THRESHOLD:
                    pairs.append((iou, ti, di))
        pairs.sort(key=lambda p: (-p[0], p[1], p[2]))
        used_tracks, used_dets = set(), set()
        for iou, ti, di in pairs:
            if ti in used_tracks or di in used_dets:
                continue
            used_tracks.add(ti)
            used_dets.add(di)
            active[ti].boxes.append(detections[di].box)
            active[ti].last_seen = t
            active[ti].hits += 1
        for ti, tr in enumerate(active):
            if ti not in used_tracks:
                tr.boxes.append(None)
        for di, det in enumerate(detections):
            if di not in used_dets:
                boxes = [None] * t + [det.box]
                active.append(_TrackState(track_id=next_id, boxes=boxes, last_seen=t, hits=1))
                next_id += 1
        survivors = []
        for tr in active:
            if t - tr.last_seen > TRACK_MAX_AGE:
                finished.append(tr)
            else:
                survivors.append(tr)
        active = survivors
    finished.extend(active)
    out = []
    for tr in sorted(finished, key=lambda s: s.track_id):
        if tr.hits < TRACK_MIN_HITS:
            continue
        boxes = tr.boxes + [None] * (frame_count - len(tr.boxes))
        out.append((tr.track_id, boxes))
    return out


def flow_farneback(frames: np.ndarray) -> np.ndarray:
    """Dense flow mapping frame t to t+1, expressed at destination pixels.

    Farneback gives forward flow at source pixels; estimating next->prev and
    negating yields the destination-anchored field the scoring engine warps by.
    """
    t_count, h, w = frames.shape
    flow = np.zeros((t_count - 1, h, w, 2), dtype=np.float32)
    for t in range(t_count - 1):
        backward = cv2.calcOpticalFlowFarneback(
            frames[t + 1], frames[t], None,
            pyr_scale=0.5, levels=3, winsize=15, iterations=3,
            poly_n=5, poly_sigma=1.2, flags=0,
        )
        flow[t] = -backward
    return flow


def _crop_embedding(frame: np.ndarray, box) -> np.ndarray:
    x0, y0, x1, y1 = (int(round(v)) for v in box)
    crop = frame[max(0, y0):max(0, y1), max(0, x0):max(0, x1)]
    if crop.size == 0:
        return np.zeros(REID_PATCH * REID_PATCH)
    patch = cv2.resize(crop, (REID_PATCH, REID_PATCH)).astype(np.float64).ravel()
    norm = np.linalg.norm(patch)
    return patch / norm if norm > 0 else patch


def merge_reid(tracks: list[tuple[int, list]], frames: np.ndarray,
               similarity: float, max_gap: int) -> list[tuple[int, list]]:
    """Merge identities whose crop embeddings match across a short gap: the
    later fragment is folded into the earlier track."""
    def endpoints(boxes):
        vis = [t for t, b in enumerate(boxes) if b is not None]
        return vis[0], vis[-1]

    merged = [list(t) for t in tracks]
    changed = True
    while changed:
        changed = False
        for i in range(len(merged)):
            for j in range(len(merged)):
                if i == j:
                    continue
                id_a, boxes_a = merged[i]
                id_b, boxes_b = merged[j]
                a_start, a_end = endpoints(boxes_a)
                b_start, b_end = endpoints(boxes_b)
                if not (0 < b_start - a_end <= max_gap):
                    continue
                emb_a = _crop_embedding(frames[a_end], boxes_a[a_end])
                emb_b = _crop_embedding(frames[b_start], boxes_b[b_start])
                if float(emb_a @ emb_b) < similarity:
                    continue
                fused = [bb if bb is not None else ba
                         for ba, bb in zip(boxes_a, boxes_b)]
                merged[i] = [id_a, fused]
                del merged[j]
                changed = True
                break
            if changed:
                break
    return [(i, b) for i, b in merged]


def _clamp_boxes(tracks, height, width):
    """Enforce the interchange invariants: boxes inside the image, no
    sub-pixel slivers, at least one visible slot per track."""
    cleaned = []
    for track_id, boxes in tracks:
        out = []
        for b in boxes:
            if b is None:
                out.append(None)
                continue
            x0 = min(max(b[0], 0.0), float(width))
            y0 = min(max(b[1], 0.0), float(height))
            x1 = min(max(b[2], 0.0), float(width))
            y1 = min(max(b[3], 0.0), float(height))
            if x1 - x0 < 1.0 or y1 - y0 < 1.0:
                out.append(None)
            else:
                out.append((x0, y0, x1, y1))
        if any(b is not None for b in out):
            cleaned.append((track_id, out))
    return cleaned


def extract(video_path: str, out_dir: str, config: AdapterConfig = AdapterConfig(),
            video_id: str | None = None) -> str:
    """Run the full pipeline and write the bundle; returns the bundle path."""
    config.validate()
    frames = decode_video(video_path, config.stride)
    t_count, height, width = frames.shape

    detections = detect_bgsub(frames, config.confidence_threshold)
    tracks = track_iou(detections, t_count)
    if config.reid:
        tracks = merge_reid(tracks, frames, config.reid_similarity, config.reid_max_gap)
    tracks = _clamp_boxes(tracks, height, width)
    # renumber consecutively so ids stay small and unique after merges/drops
    tracks = [(i + 1, boxes) for i, (_, boxes) in enumerate(tracks)]
    flow = flow_farneback(frames)

    if video_id is None:
        video_id = os.path.splitext(os.path.basename(str(video_path)))[0] or "video"
    os.makedirs(out_dir, exist_ok=True)
    formats.write_tracks(
        os.path.join(out_dir, formats.TRACKS_FILENAME),
        video_id=video_id, frame_count=t_count, height=height, width=width,
        frame_rate="12", tracks=[(i, "object", boxes) for i, boxes in tracks],
    )
    formats.write_frames(os.path.join(out_dir, formats.FRAMES_FILENAME), frames)
    formats.write_flow(os.path.join(out_dir, formats.FLOW_FILENAME), flow)
    # sidecar: which models produced this bundle and how the tracker behaves
    # around occlusion, so scores stay interpretable across adapters
    metadata = {
        "adapter": "wcs-adapter",
        "config": asdict(config),
        "tracker_occlusion_behavior": (
            f"no occlusion prediction; a track survives up to {TRACK_MAX_AGE} "
            "missed frames and its slots stay empty while undetected"
        ),
        "grayscale": "ITU-R 601 luma",
    }
    with open(os.path.join(out_dir, "adapter.json"), "w", encoding="utf-8") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out_dir
