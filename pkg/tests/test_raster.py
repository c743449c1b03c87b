import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phishsim import kernels
from phishsim.raster import (TRANSPARENT, WHITE, Raster, bilinear_downscale,
                             composite, curtain_mask, curtain_visible_rows,
                             nn_upscale, pixelate, png_bytes,
                             raster_from_png_bytes)

from .conftest import random_raster
from .oracles import (composite_ref, curtain_ref, nn_upscale_ref,
                      pixelate_ref, to_lists)

CURTAIN_STOPS = (0.0, 0.25, 0.5, 0.75, 1.0)


def as_array(lists) -> np.ndarray:
    return np.array(lists, dtype=np.int32)


def test_raster_validation_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Raster(np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        Raster(np.zeros((4, 4, 4), dtype=np.uint16))
    with pytest.raises(ValueError):
        Raster(np.zeros((0, 4, 4), dtype=np.uint8))


def test_raster_is_immutable():
    r = Raster.filled(3, 3, WHITE)
    with pytest.raises(ValueError):
        r.array[0, 0, 0] = 0


def test_crop_bounds_checked():
    r = Raster.filled(8, 8, WHITE)
    assert r.crop(2, 2, 4, 4).width == 4
    with pytest.raises(ValueError):
        r.crop(5, 5, 4, 4)
    with pytest.raises(ValueError):
        r.crop(-1, 0, 2, 2)


def test_pixelate_block_one_is_identity():
    rng = np.random.default_rng(7)
    r = random_raster(rng)
    assert pixelate(r, 1) == r


def test_pixelate_rejects_bad_block():
    r = Raster.filled(4, 4, WHITE)
    with pytest.raises(ValueError):
        pixelate(r, 0)


def test_pixelate_constant_raster_is_fixed_point():
    r = Raster.filled(10, 7, (30, 60, 90, 255))
    for n in range(1, 6):
        assert pixelate(r, n) == r


def test_pixelate_matches_oracle_within_one():
    rng = np.random.default_rng(2024)
    for _ in range(25):
        r = random_raster(rng, max_side=48)
        for n in range(1, 6):
            got = pixelate(r, n).array.astype(np.int32)
            want = as_array(pixelate_ref(to_lists(r.array), n))
            assert got.shape == want.shape
            assert int(np.abs(got - want).max()) <= 1


def test_curtain_matches_oracle_exactly():
    rng = np.random.default_rng(99)
    fill = (1, 2, 3, 255)
    for _ in range(25):
        r = random_raster(rng, max_side=48)
        for v in CURTAIN_STOPS:
            got = curtain_mask(r, v, fill).array.astype(np.int32)
            want = as_array(curtain_ref(to_lists(r.array), v, fill))
            assert np.array_equal(got, want)


def test_curtain_visible_rows_floors():
    assert curtain_visible_rows(0.0, 100) == 0
    assert curtain_visible_rows(1.0, 100) == 100
    assert curtain_visible_rows(0.25, 102) == 25
    assert curtain_visible_rows(0.999, 10) == 9


def test_curtain_extremes():
    rng = np.random.default_rng(5)
    r = random_raster(rng)
    assert curtain_mask(r, 1.0, WHITE) == r
    hidden = curtain_mask(r, 0.0, WHITE)
    assert np.all(hidden.array == np.array(WHITE, dtype=np.uint8))


def test_curtain_rejects_out_of_range_fraction():
    r = Raster.filled(4, 4, WHITE)
    with pytest.raises(ValueError):
        curtain_mask(r, -0.1, WHITE)
    with pytest.raises(ValueError):
        curtain_mask(r, 1.1, WHITE)


# frozen from the oracle: bilinear downscale of a fixed luminance ramp
_RAMP_DOWN_FROZEN = [[11, 51, 91, 131], [13, 53, 93, 133]]


def test_bilinear_downscale_frozen_value():
    ramp = np.zeros((4, 8, 4), dtype=np.uint8)
    for y in range(4):
        for x in range(8):
            ramp[y, x] = (x * 20 + y, x * 20 + y, x * 20 + y, 255)
    got = bilinear_downscale(Raster(ramp), 4, 2).array[:, :, 0]
    assert got.tolist() == _RAMP_DOWN_FROZEN


def test_nn_upscale_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(10):
        r = random_raster(rng, max_side=16)
        w = int(rng.integers(r.width, 4 * r.width + 1))
        h = int(rng.integers(r.height, 4 * r.height + 1))
        got = nn_upscale(r, w, h).array.astype(np.int32)
        want = as_array(nn_upscale_ref(to_lists(r.array), w, h))
        assert np.array_equal(got, want)


def test_composite_matches_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        layers = []
        for i in range(4):
            layer = random_raster(rng, max_side=8)
            # force a mix of opaque and non-opaque pixels
            arr = layer.array.copy()
            arr[:, :, 3] = rng.choice([255, 254, 0], size=arr.shape[:2])
            layer = Raster(arr)
            x = int(rng.integers(0, 24))
            y = int(rng.integers(0, 24))
            layers.append((layer, x, y, int(rng.integers(-5, 6))))
        fill = (9, 9, 9, 255)
        got = composite(32, 32, fill,
                        [(r, x, y, z) for r, x, y, z in layers]).array
        want = as_array(composite_ref(
            32, 32, fill,
            [(to_lists(r.array), x, y, z) for r, x, y, z in layers]))
        assert np.array_equal(got.astype(np.int32), want)


def test_composite_rejects_out_of_canvas_layer():
    layer = Raster.filled(8, 8, WHITE)
    with pytest.raises(ValueError):
        composite(10, 10, WHITE, [(layer, 5, 5, 0)])


def test_png_round_trip():
    rng = np.random.default_rng(13)
    r = random_raster(rng)
    assert raster_from_png_bytes(png_bytes(r)) == r


def test_backends_agree_exactly():
    numpy_impl = pytest.importorskip("phishsim._kernels_numpy")
    numba_impl = pytest.importorskip("phishsim._kernels_numba")
    rng = np.random.default_rng(42)
    for _ in range(8):
        h = int(rng.integers(2, 40))
        w = int(rng.integers(2, 40))
        src = rng.integers(0, 256, size=(h, w, 4), dtype=np.uint8)
        dw = int(rng.integers(1, w + 1))
        dh = int(rng.integers(1, h + 1))
        assert np.array_equal(numpy_impl.bilinear_downscale_u8(src, dw, dh),
                              numba_impl.bilinear_downscale_u8(src, dw, dh))
        uw = int(rng.integers(w, 3 * w))
        uh = int(rng.integers(h, 3 * h))
        assert np.array_equal(numpy_impl.nn_upscale_u8(src, uw, uh),
                              numba_impl.nn_upscale_u8(src, uw, uh))


def test_selected_backend_is_exposed():
    assert kernels.BACKEND in ("numpy", "numba")
    kernels.warmup()


@st.composite
def rasters(draw, max_side=24):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    data = draw(st.binary(min_size=h * w * 4, max_size=h * w * 4))
    arr = np.frombuffer(data, dtype=np.uint8).reshape(h, w, 4).copy()
    return Raster(arr)


@settings(max_examples=40, deadline=None)
@given(rasters(), st.integers(1, 5))
def test_pixelate_preserves_shape_and_caps_detail(r, n):
    out = pixelate(r, n)
    assert (out.width, out.height) == (r.width, r.height)
    # every output row/column replicates one sample of the small image
    distinct_rows = {out.array[y].tobytes() for y in range(out.height)}
    distinct_cols = {out.array[:, x].tobytes() for x in range(out.width)}
    assert len(distinct_rows) <= -(-r.height // n)
    assert len(distinct_cols) <= -(-r.width // n)
    if r.width % n == 0 and r.height % n == 0:
        for by in range(0, r.height, n):
            for bx in range(0, r.width, n):
                block = out.array[by:by + n, bx:bx + n]
                assert (block == block[0, 0]).all()


@settings(max_examples=40, deadline=None)
@given(rasters(), st.floats(0.0, 1.0))
def test_curtain_splits_at_floor_boundary(r, v):
    out = curtain_mask(r, v, TRANSPARENT).array
    keep = curtain_visible_rows(v, r.height)
    assert np.array_equal(out[:keep], r.array[:keep])
    assert (out[keep:] == np.array(TRANSPARENT, dtype=np.uint8)).all()


@settings(max_examples=30, deadline=None)
@given(rasters(max_side=16), st.integers(1, 5))
def test_pixelate_is_idempotent_on_aligned_sizes(r, n):
    # sizes that are multiples of n make the second pass average constant
    # blocks, which reproduces them
    if r.width % n or r.height % n:
        return
    once = pixelate(r, n)
    assert pixelate(once, n) == once
