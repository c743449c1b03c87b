"""Pure-numpy resampling kernels.

Arithmetic is written with the exact same per-element expression shape as the
numba loops in ``_kernels_numba`` so both backends produce byte-identical
output. Keep the two files in sync.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def bilinear_downscale_u8(src: np.ndarray, dw: int, dh: int) -> np.ndarray:
    """Center-aligned bilinear resample of (H, W, C) uint8 down to (dh, dw, C).

    Each output sample is the distance-weighted average of the four nearest
    source pixels, accumulated in float64 and rounded half-up to 8 bits.
    """
    sh, sw = src.shape[0], src.shape[1]
    sx = (np.arange(dw, dtype=np.float64) + 0.5) * sw / dw - 0.5
    sy = (np.arange(dh, dtype=np.float64) + 0.5) * sh / dh - 0.5
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = (sx - x0)[None, :, None]
    fy = (sy - y0)[:, None, None]
    x1 = np.minimum(x0 + 1, sw - 1)
    y1 = np.minimum(y0 + 1, sh - 1)

    p00 = src[y0[:, None], x0[None, :], :].astype(np.float64)
    p10 = src[y0[:, None], x1[None, :], :].astype(np.float64)
    p01 = src[y1[:, None], x0[None, :], :].astype(np.float64)
    p11 = src[y1[:, None], x1[None, :], :].astype(np.float64)

    top = (1.0 - fx) * p00 + fx * p10
    bot = (1.0 - fx) * p01 + fx * p11
    val = (1.0 - fy) * top + fy * bot
    out = np.floor(val + 0.5)
    np.clip(out, 0.0, 255.0, out=out)
    return out.astype(np.uint8)


def nn_upscale_u8(src: np.ndarray, w: int, h: int) -> np.ndarray:
    """Nearest-neighbor upscale: out[y, x] = src[y*sh//h, x*sw//w]."""
    sh, sw = src.shape[0], src.shape[1]
    ys = (np.arange(h, dtype=np.int64) * sh) // h
    xs = (np.arange(w, dtype=np.int64) * sw) // w
    return np.ascontiguousarray(src[ys[:, None], xs[None, :], :])
