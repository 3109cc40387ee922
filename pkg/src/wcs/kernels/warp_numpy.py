"""Pure-numpy backward-warp fallback, bit-identical to the Cython kernel.

The bilinear blend is evaluated in the same order and precision (float64,
(1-fx)*p00 + fx*p01 per row, then blended by fy) so either backend produces
the same bytes.
"""

from __future__ import annotations

import numpy as np


def warp_backward_u8(src: np.ndarray, flow: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h, w = src.shape
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    sx = xs - flow[:, :, 0].astype(np.float64)
    sy = ys - flow[:, :, 1].astype(np.float64)
    valid = (sx >= 0.0) & (sy >= 0.0) & (sx <= w - 1) & (sy <= h - 1)

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    np.clip(x0, 0, max(w - 2, 0), out=x0)
    np.clip(y0, 0, max(h - 2, 0), out=y0)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    # out-of-bounds lanes still index the array; their results are masked below
    ix0 = np.where(valid, x0, 0)
    iy0 = np.where(valid, y0, 0)
    ix1 = np.where(valid, x1, 0)
    iy1 = np.where(valid, y1, 0)

    fx = sx - x0
    fy = sy - y0
    srcf = src.astype(np.float64)
    top = (1.0 - fx) * srcf[iy0, ix0] + fx * srcf[iy0, ix1]
    bot = (1.0 - fx) * srcf[iy1, ix0] + fx * srcf[iy1, ix1]
    pred = (1.0 - fy) * top + fy * bot
    pred = np.where(valid, pred, 0.0)
    return pred, valid
