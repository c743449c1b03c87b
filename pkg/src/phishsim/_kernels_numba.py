"""Numba-jitted resampling kernels.

Same arithmetic, in the same order, as ``_kernels_numpy``; the two must stay
byte-identical. Compiled lazily on first call, cached on disk.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def bilinear_downscale_u8(src, dw, dh):
    sh, sw, nc = src.shape
    out = np.empty((dh, dw, nc), dtype=np.uint8)
    for y in range(dh):
        sy = (y + 0.5) * sh / dh - 0.5
        y0 = int(np.floor(sy))
        fy = sy - y0
        y1 = y0 + 1
        if y1 > sh - 1:
            y1 = sh - 1
        for x in range(dw):
            sx = (x + 0.5) * sw / dw - 0.5
            x0 = int(np.floor(sx))
            fx = sx - x0
            x1 = x0 + 1
            if x1 > sw - 1:
                x1 = sw - 1
            for c in range(nc):
                p00 = src[y0, x0, c]
                p10 = src[y0, x1, c]
                p01 = src[y1, x0, c]
                p11 = src[y1, x1, c]
                top = (1.0 - fx) * p00 + fx * p10
                bot = (1.0 - fx) * p01 + fx * p11
                val = (1.0 - fy) * top + fy * bot
                q = int(np.floor(val + 0.5))
                if q < 0:
                    q = 0
                elif q > 255:
                    q = 255
                out[y, x, c] = q
    return out


@njit(cache=True)
def nn_upscale_u8(src, w, h):
    sh, sw, nc = src.shape
    out = np.empty((h, w, nc), dtype=np.uint8)
    for y in range(h):
        sy = (y * sh) // h
        for x in range(w):
            sx = (x * sw) // w
            for c in range(nc):
                out[y, x, c] = src[sy, sx, c]
    return out
