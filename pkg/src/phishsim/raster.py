"""RGBA raster type and the geometric transforms the attacks are built from.

All pixel data is row-major (height, width, 4) uint8, RGBA channel order.
Every operation returns a new raster; nothing mutates in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from . import kernels

RGBA = tuple[int, int, int, int]

WHITE: RGBA = (255, 255, 255, 255)
TRANSPARENT: RGBA = (0, 0, 0, 0)


def _check_color(color: Sequence[int]) -> RGBA:
    if len(color) != 4 or not all(isinstance(c, int) and 0 <= c <= 255 for c in color):
        raise ValueError(f"color must be four ints in 0..255, got {color!r}")
    return tuple(color)  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class Raster:
    """Immutable RGBA image. ``array`` is (height, width, 4) uint8."""

    array: np.ndarray

    def __post_init__(self) -> None:
        a = self.array
        if not isinstance(a, np.ndarray) or a.ndim != 3 or a.shape[2] != 4:
            raise ValueError("raster array must have shape (h, w, 4)")
        if a.dtype != np.uint8:
            raise ValueError(f"raster dtype must be uint8, got {a.dtype}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"raster dimensions must be positive, got {a.shape[:2]}")
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        object.__setattr__(self, "array", a)

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @classmethod
    def filled(cls, width: int, height: int, color: Sequence[int]) -> "Raster":
        c = _check_color(color)
        arr = np.empty((height, width, 4), dtype=np.uint8)
        arr[:, :] = c
        return cls(arr)

    def crop(self, x: int, y: int, w: int, h: int) -> "Raster":
        if x < 0 or y < 0 or w < 1 or h < 1 or x + w > self.width or y + h > self.height:
            raise ValueError(f"crop ({x},{y},{w},{h}) outside {self.width}x{self.height}")
        return Raster(self.array[y:y + h, x:x + w].copy())

    def same_pixels(self, other: "Raster") -> bool:
        return bool(np.array_equal(self.array, other.array))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Raster) and self.same_pixels(other)

    def __repr__(self) -> str:
        return f"Raster({self.width}x{self.height})"


def bilinear_downscale(src: Raster, dst_width: int, dst_height: int) -> Raster:
    """Resample down to dst_width x dst_height with center-aligned bilinear weights.

    Args:
        src: source raster.
        dst_width: target width, 1 <= dst_width <= src.width.
        dst_height: target height, 1 <= dst_height <= src.height.

    Returns:
        The resampled raster. Channel values are rounded half-up.
    """
    if not (1 <= dst_width <= src.width and 1 <= dst_height <= src.height):
        raise ValueError(
            f"downscale target {dst_width}x{dst_height} outside 1..{src.width}x{src.height}")
    return Raster(kernels.bilinear_downscale_u8(src.array, dst_width, dst_height))


def nn_upscale(src: Raster, dst_width: int, dst_height: int) -> Raster:
    """Nearest-neighbor upscale; out(x, y) = src(x*sw//W, y*sh//H)."""
    if dst_width < src.width or dst_height < src.height:
        raise ValueError(
            f"upscale target {dst_width}x{dst_height} smaller than {src.width}x{src.height}")
    return Raster(kernels.nn_upscale_u8(src.array, dst_width, dst_height))


def pixelate(src: Raster, block: int) -> Raster:
    """Pixelate into block x block cells.

    Downscales by 1/block (ceiling dimensions) with bilinear weights, then
    duplicates each sample back up with nearest-neighbor. block=1 is identity.
    """
    if not isinstance(block, int) or block < 1:
        raise ValueError(f"block size must be a positive int, got {block!r}")
    if block == 1:
        return src
    dw = -(-src.width // block)
    dh = -(-src.height // block)
    small = kernels.bilinear_downscale_u8(src.array, dw, dh)
    return Raster(kernels.nn_upscale_u8(small, src.width, src.height))


def curtain_visible_rows(visible_fraction: float, height: int) -> int:
    """Number of top rows kept by a curtain at the given visible fraction."""
    if not 0.0 <= visible_fraction <= 1.0:
        raise ValueError(f"visible fraction must be in [0, 1], got {visible_fraction}")
    return int(math.floor(visible_fraction * height))


def curtain_mask(src: Raster, visible_fraction: float, fill: Sequence[int]) -> Raster:
    """Keep the top floor(v*h) rows of src; fill every row below."""
    c = _check_color(fill)
    keep = curtain_visible_rows(visible_fraction, src.height)
    out = src.array.copy()
    out[keep:, :] = c
    return Raster(out)


def composite(width: int, height: int, fill: Sequence[int],
              layers: Iterable[tuple[Raster, int, int, int]]) -> Raster:
    """Paint layers onto a filled canvas in ascending z order.

    Args:
        width, height: canvas dimensions.
        fill: canvas RGBA fill.
        layers: (raster, x, y, z) tuples. Equal z keeps input order. Blending
            is opaque-over: a source pixel lands only when its alpha is 255.

    Returns:
        The composited canvas.
    """
    c = _check_color(fill)
    if width < 1 or height < 1:
        raise ValueError(f"canvas dimensions must be positive, got {width}x{height}")
    canvas = np.empty((height, width, 4), dtype=np.uint8)
    canvas[:, :] = c
    for raster, x, y, _z in sorted(layers, key=lambda t: t[3]):
        if x < 0 or y < 0 or x + raster.width > width or y + raster.height > height:
            raise ValueError(
                f"layer {raster.width}x{raster.height} at ({x},{y}) exceeds canvas")
        region = canvas[y:y + raster.height, x:x + raster.width]
        src = raster.array
        opaque = src[:, :, 3] == 255
        region[opaque] = src[opaque]
    return Raster(canvas)


def load_png(path) -> Raster:
    """Read a PNG file as an RGBA raster."""
    with Image.open(path) as im:
        return Raster(np.asarray(im.convert("RGBA"), dtype=np.uint8))


def save_png(raster: Raster, path) -> None:
    """Write a raster as an 8-bit RGBA PNG (non-interlaced)."""
    Image.fromarray(raster.array, mode="RGBA").save(path, format="PNG")


def png_bytes(raster: Raster) -> bytes:
    """PNG-encode a raster in memory."""
    import io

    buf = io.BytesIO()
    Image.fromarray(raster.array, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def raster_from_png_bytes(data: bytes) -> Raster:
    import io

    with Image.open(io.BytesIO(data)) as im:
        return Raster(np.asarray(im.convert("RGBA"), dtype=np.uint8))
