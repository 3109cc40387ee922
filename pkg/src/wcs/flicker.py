"""Flicker penalty: pixel change not explained by motion.

Each frame is warped forward by the dense flow to predict its successor; the
normalized L1 gap between prediction and the actual next frame is the
per-transition residual. Per-pixel differences are clamped before summation
so a single blown-out region cannot dominate, transitions whose raw residual
exceeds ``tau_cut`` are treated as shot cuts and can be excluded, and when
tracks are available the residual can be restricted to static regions
(outside boxes of objects that moved).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import centroid
from .interchange import TrackSet, ValidationError
from .kernels import KERNEL_BACKEND, warp_backward_u8

# an object is "moving" across a transition when its centroid shifts more than this
_STATIC_EPS_PX = 0.5
# static-region boxes are dilated by this many pixels before exclusion
_BOX_DILATE_PX = 2


@dataclass(frozen=True)
class FlickerParams:
    c_max: float = 0.5          # per-pixel difference clamp, fraction of 255
    tau_cut: float = 0.6        # raw residual above this flags a shot cut
    static_region_mode: bool = True
    cut_exclusion: bool = True


@dataclass
class FlickerSeries:
    residuals: list[float]           # clamped residual per transition, in [0, 1]
    raw_residuals: list[float]       # unclamped, may exceed 1
    static_coverage: list[float]     # fraction of warp-valid pixels kept per transition
    cut_flags: list[bool]
    degenerate_flags: list[bool]     # all-zero denominators
    fp: float = 0.0
    excluded_as_cuts: int = 0
    kernel_backend: str = field(default=KERNEL_BACKEND)


def warp_frame(frame: np.ndarray, flow: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Backward-warp one grayscale frame by a flow map expressed at destination
    pixels: predicted(x, y) samples the frame at (x - dx, y - dy) bilinearly.
    Returns (prediction float64, validity mask); out-of-bounds samples are invalid."""
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    flow = np.ascontiguousarray(flow, dtype=np.float32)
    if frame.ndim != 2 or flow.shape != frame.shape + (2,):
        raise ValidationError(f"shape mismatch: frame {frame.shape}, flow {flow.shape}")
    return warp_backward_u8(frame, flow)


def flicker_residual(
    actual: np.ndarray,
    predicted: np.ndarray,
    valid_mask: np.ndarray,
    c_max: float = 0.5,
) -> tuple[float, float, bool]:
    """Normalized L1 residual over valid pixels: (clamped, raw, degenerate).

    The clamped residual caps per-pixel differences at ``c_max * 255`` and the
    total at 1. A zero denominator (all-black masked frame) yields 0 with the
    degenerate flag set.
    """
    actual_f = actual.astype(np.float64)
    diff = np.abs(actual_f - predicted)
    denom = float(np.sum(actual_f[valid_mask]))
    if denom == 0.0:
        return 0.0, 0.0, True
    raw = float(np.sum(diff[valid_mask])) / denom
    clamped = float(np.sum(np.minimum(diff[valid_mask], c_max * 255.0))) / denom
    return min(1.0, clamped), raw, False


def _moving_boxes_mask(tracks: TrackSet, t: int, shape: tuple[int, int]) -> np.ndarray:
    """True wherever an object that moved (or appeared/disappeared) across the
    transition t -> t+1 covers the image, boxes dilated by a couple pixels."""
    h, w = shape
    mask = np.zeros(shape, dtype=bool)
    for track in tracks.tracks:
        b0, b1 = track.boxes[t], track.boxes[t + 1]
        if b0 is None and b1 is None:
            continue
        if b0 is not None and b1 is not None:
            c0, c1 = centroid(b0), centroid(b1)
            if abs(c1[0] - c0[0]) <= _STATIC_EPS_PX and abs(c1[1] - c0[1]) <= _STATIC_EPS_PX:
                continue
        for b in (b0, b1):
            if b is None:
                continue
            x0 = max(0, int(np.floor(b[0])) - _BOX_DILATE_PX)
            y0 = max(0, int(np.floor(b[1])) - _BOX_DILATE_PX)
            x1 = min(w, int(np.ceil(b[2])) + _BOX_DILATE_PX)
            y1 = min(h, int(np.ceil(b[3])) + _BOX_DILATE_PX)
            mask[y0:y1, x0:x1] = True
    return mask


def compute_fp(
    frames: np.ndarray,
    flow: np.ndarray,
    tracks: TrackSet | None = None,
    params: FlickerParams = FlickerParams(),
) -> FlickerSeries:
    """Mean residual over transitions, skipping those flagged as cuts when
    cut exclusion is on. If every transition is excluded the penalty is 0."""
    frames = np.asarray(frames)
    flow = np.asarray(flow)
    if flow.shape != (frames.shape[0] - 1,) + frames.shape[1:] + (2,):
        raise ValidationError(f"flow shape {flow.shape} does not match frames {frames.shape}")
    residuals, raws, coverage, cuts, degenerates = [], [], [], [], []
    for t in range(frames.shape[0] - 1):
        pred, valid = warp_frame(frames[t], flow[t])
        mask = valid
        cov = 1.0
        if params.static_region_mode and tracks is not None:
            static = valid & ~_moving_boxes_mask(tracks, t, frames.shape[1:])
            n_valid = int(valid.sum())
            cov = static.sum() / n_valid if n_valid else 0.0
            if static.any():
                mask = static
        eps, raw, degenerate = flicker_residual(frames[t + 1], pred, mask, params.c_max)
        residuals.append(eps)
        raws.append(raw)
        coverage.append(float(cov))
        degenerates.append(degenerate)
        cuts.append(raw > params.tau_cut)
    if params.cut_exclusion:
        kept = [e for e, c in zip(residuals, cuts) if not c]
    else:
        kept = residuals
    fp = sum(kept) / len(kept) if kept else 0.0
    return FlickerSeries(
        residuals=residuals,
        raw_residuals=raws,
        static_coverage=coverage,
        cut_flags=cuts,
        degenerate_flags=degenerates,
        fp=fp,
        excluded_as_cuts=len(residuals) - len(kept) if params.cut_exclusion else 0,
    )
