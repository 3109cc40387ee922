# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython backward-warp kernel. Semantics must match kernels.warp_numpy exactly:
same sample-point formula, same bilinear blend order, so results are bit-identical."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def warp_backward_u8(cnp.uint8_t[:, ::1] src, cnp.float32_t[:, :, ::1] flow):
    """Backward-warp ``src`` by ``flow`` (expressed at destination pixels).

    predicted(x, y) samples src at (x - dx, y - dy) bilinearly; samples outside
    the image are marked invalid. Returns (pred float64, valid bool).
    """
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    pred_arr = np.zeros((h, w), dtype=np.float64)
    valid_arr = np.zeros((h, w), dtype=np.uint8)
    cdef double[:, ::1] pred = pred_arr
    cdef cnp.uint8_t[:, ::1] valid = valid_arr
    cdef Py_ssize_t y, x, x0, y0, x1, y1
    cdef double sx, sy, fx, fy, top, bot

    for y in range(h):
        for x in range(w):
            sx = x - <double>flow[y, x, 0]
            sy = y - <double>flow[y, x, 1]
            if sx < 0.0 or sy < 0.0 or sx > w - 1 or sy > h - 1:
                continue
            x0 = <Py_ssize_t>floor(sx)
            y0 = <Py_ssize_t>floor(sy)
            if x0 > w - 2:
                x0 = w - 2
            if y0 > h - 2:
                y0 = h - 2
            if x0 < 0:
                x0 = 0
            if y0 < 0:
                y0 = 0
            x1 = x0 + 1 if x0 + 1 < w else w - 1
            y1 = y0 + 1 if y0 + 1 < h else h - 1
            fx = sx - x0
            fy = sy - y0
            top = (1.0 - fx) * <double>src[y0, x0] + fx * <double>src[y0, x1]
            bot = (1.0 - fx) * <double>src[y1, x0] + fx * <double>src[y1, x1]
            pred[y, x] = (1.0 - fy) * top + fy * bot
            valid[y, x] = 1
    return pred_arr, valid_arr.view(np.bool_)
