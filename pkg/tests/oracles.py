"""Brute-force reference implementations used to check the fast kernels.

Everything here is plain Python over nested lists: no numpy, no shared code
with the package under test. Slow on purpose.
"""

import math


def to_lists(arr):
    """Convert an (H, W, C) array-like into nested Python lists of ints."""
    return [[[int(c) for c in px] for px in row] for row in arr]


def bilinear_downscale_ref(pixels, dw, dh):
    """Center-aligned bilinear resample of pixels (H x W x C lists) to dh x dw.

    Each output sample is the distance-weighted average of the four nearest
    source pixels, computed in float and rounded half-up per channel.
    """
    sh = len(pixels)
    sw = len(pixels[0])
    nc = len(pixels[0][0])
    out = []
    for y in range(dh):
        sy = (y + 0.5) * sh / dh - 0.5
        y0 = math.floor(sy)
        fy = sy - y0
        y1 = min(y0 + 1, sh - 1)
        y0 = max(y0, 0)
        row = []
        for x in range(dw):
            sx = (x + 0.5) * sw / dw - 0.5
            x0 = math.floor(sx)
            fx = sx - x0
            x1 = min(x0 + 1, sw - 1)
            x0 = max(x0, 0)
            px = []
            for c in range(nc):
                p00 = pixels[y0][x0][c]
                p10 = pixels[y0][x1][c]
                p01 = pixels[y1][x0][c]
                p11 = pixels[y1][x1][c]
                top = p00 * (1.0 - fx) + p10 * fx
                bot = p01 * (1.0 - fx) + p11 * fx
                val = top * (1.0 - fy) + bot * fy
                px.append(min(255, max(0, math.floor(val + 0.5))))
            row.append(px)
        out.append(row)
    return out


def nn_upscale_ref(pixels, w, h):
    """Nearest-neighbor upscale: out(x, y) = src(floor(x*sw/w), floor(y*sh/h))."""
    sh = len(pixels)
    sw = len(pixels[0])
    return [[list(pixels[(y * sh) // h][(x * sw) // w]) for x in range(w)]
            for y in range(h)]


def pixelate_ref(pixels, n):
    """Downscale by 1/n (ceiling dims) then duplicate back into n x n blocks."""
    if n == 1:
        return [[list(px) for px in row] for row in pixels]
    sh = len(pixels)
    sw = len(pixels[0])
    dw = -(-sw // n)
    dh = -(-sh // n)
    small = bilinear_downscale_ref(pixels, dw, dh)
    return nn_upscale_ref(small, sw, sh)


def curtain_ref(pixels, v, fill):
    """Keep the top floor(v*h) rows, replace everything below with fill."""
    h = len(pixels)
    keep = math.floor(v * h)
    out = []
    for y in range(h):
        if y < keep:
            out.append([list(px) for px in pixels[y]])
        else:
            out.append([list(fill) for _ in pixels[y]])
    return out


def composite_ref(width, height, fill, layers):
    """Painter's-algorithm compositing.

    layers: iterable of (pixels, x, y, z). Painted in ascending z (stable);
    a source pixel lands only when its alpha is exactly 255.
    """
    out = [[list(fill) for _ in range(width)] for _ in range(height)]
    for pixels, x, y, _z in sorted(layers, key=lambda t: t[3]):
        for dy, row in enumerate(pixels):
            for dx, px in enumerate(row):
                if px[3] == 255:
                    out[y + dy][x + dx] = list(px)
    return out


def luma_ref(px):
    """Integer Rec.601 luma of one RGBA pixel."""
    return (299 * px[0] + 587 * px[1] + 114 * px[2] + 500) // 1000


def dhash_ref(pixels, grid):
    """Horizontal difference hash: grid*grid bits over a (grid+1) x grid resample."""
    gray = [[[luma_ref(px)] for px in row] for row in pixels]
    small = bilinear_downscale_ref(gray, grid + 1, grid)
    bits = []
    for y in range(grid):
        for x in range(grid):
            bits.append(1 if small[y][x][0] > small[y][x + 1][0] else 0)
    return bits


def similarity_ref(b1, b2):
    ham = sum(1 for a, b in zip(b1, b2) if a != b)
    return 1.0 - ham / len(b1)
