import numpy as np
import pytest

from phishsim.pagespec import AssetStore, ElementSpec, PageSpec
from phishsim.raster import Raster, curtain_mask, pixelate
from phishsim.render import (WHITE, CaptureConfig, RenderError, capture,
                             capture_sequence, element_raster, full_render,
                             render_at, static_perturb)
from phishsim.schedule import (EffectState, curtain_schedule, none_script,
                               pixelation_schedule)


def make_assets() -> AssetStore:
    rng = np.random.default_rng(7)
    store = AssetStore()
    store.add("logo.png", Raster(rng.integers(0, 256, (20, 40, 4),
                                              dtype=np.uint8) | [0, 0, 0, 255]))
    store.add("bg.png", Raster(rng.integers(0, 256, (90, 120, 4),
                                            dtype=np.uint8) | [0, 0, 0, 255]))
    return store


def make_page() -> PageSpec:
    return PageSpec(
        page_id="p0",
        brand="acme",
        hosting_domain="acme-login.example",
        canvas_width=120,
        canvas_height=90,
        canvas_fill=(250, 250, 250, 255),
        normal_render_time_ms=600,
        elements=(
            ElementSpec("bg", "background", 0, 0, 120, 90, 0, 0,
                        asset_ref="bg.png"),
            ElementSpec("logo", "logo", 30, 10, 40, 20, 2, 400,
                        asset_ref="logo.png"),
            ElementSpec("form", "form", 20, 40, 80, 40, 1, 200,
                        color=(230, 230, 230, 255)),
            ElementSpec("late", "text", 5, 70, 30, 10, 3, 550,
                        color=(10, 10, 10, 255)),
        ),
    )


def test_capture_config_validation():
    CaptureConfig()
    with pytest.raises(ValueError):
        CaptureConfig(capture_time_ms=-1)
    with pytest.raises(ValueError):
        CaptureConfig(initial_delay_ms=-5)
    with pytest.raises(ValueError):
        CaptureConfig(num_screenshots=0)
    with pytest.raises(ValueError):
        CaptureConfig(interval_ms=0)


def test_render_rejects_negative_time():
    with pytest.raises(ValueError):
        render_at(make_page(), make_assets(), none_script(), -1)


def test_untargeted_elements_appear_atomically():
    page, assets = make_page(), make_assets()
    before = render_at(page, assets, none_script(), 549)
    after = render_at(page, assets, none_script(), 550)
    region_before = before.array[70:80, 5:35]
    region_after = after.array[70:80, 5:35]
    assert not np.array_equal(region_before, region_after)
    assert (region_after == [10, 10, 10, 255]).all()


def test_curtain_start_hides_the_logo_entirely():
    page, assets = make_page(), make_assets()
    script = curtain_schedule(4000, "logo")
    hidden = render_at(page, assets, script, page.normal_render_time_ms)
    bare = render_at(page.without_element("logo"), assets, none_script(),
                     page.normal_render_time_ms)
    assert hidden == bare


def test_partial_curtain_reveals_top_rows_only():
    page, assets = make_page(), make_assets()
    script = curtain_schedule(4000, "logo")
    frame = render_at(page, assets, script, 1500)
    logo = assets.get("logo.png")
    assert np.array_equal(frame.array[10:15, 30:70], logo.array[:5])
    bare = render_at(page.without_element("logo"), assets, none_script(), 1500)
    assert np.array_equal(frame.array[15:30, 30:70], bare.array[15:30, 30:70])


def test_pixelation_paints_the_pixelated_asset_in_place():
    page, assets = make_page(), make_assets()
    script = pixelation_schedule(4000, "logo")
    frame = render_at(page, assets, script, 0)
    expected = pixelate(assets.get("logo.png"), 5)
    assert np.array_equal(frame.array[10:30, 30:70], expected.array)


def test_targeted_elements_ignore_their_appear_time():
    # the attack owns the logo from t=0 even though it normally appears late
    page, assets = make_page(), make_assets()
    script = pixelation_schedule(4000, "logo")
    frame = render_at(page, assets, script, 0)
    assert np.array_equal(frame.array[10:30, 30:70],
                          pixelate(assets.get("logo.png"), 5).array)


def test_after_schedule_end_equals_full_render():
    page, assets = make_page(), make_assets()
    finished = full_render(page, assets)
    for script in (curtain_schedule(700, "logo"),
                   pixelation_schedule(700, "background"),
                   none_script()):
        t = max(script.total_ms, page.normal_render_time_ms)
        assert render_at(page, assets, script, t) == finished
        assert render_at(page, assets, script, t + 5000) == finished


def test_capture_takes_the_configured_instant():
    page, assets = make_page(), make_assets()
    shot = capture(page, assets, none_script(), CaptureConfig(capture_time_ms=550))
    assert shot.capture_time_ms == 550
    assert shot.page_id == "p0"
    assert shot.variant_id == "none"
    assert shot.raster == render_at(page, assets, none_script(), 550)


def test_capture_sequence_timing_and_determinism():
    page, assets = make_page(), make_assets()
    cfg = CaptureConfig(num_screenshots=5, interval_ms=1000, initial_delay_ms=250)
    script = curtain_schedule(4000, "logo")
    shots = capture_sequence(page, assets, script, cfg)
    assert [s.capture_time_ms for s in shots] == [250, 1250, 2250, 3250, 4250]
    again = capture_sequence(page, assets, script, cfg)
    assert all(a.raster == b.raster for a, b in zip(shots, again))


def test_static_perturb_matches_manual_composition():
    page, assets = make_page(), make_assets()
    shot = capture(page, assets, none_script(), CaptureConfig())
    state = EffectState(0.4, 3)
    out = static_perturb(shot, state)
    assert out.variant_id == "none__static_v0.4_N3"
    manual = curtain_mask(pixelate(shot.raster, 3), 0.4, WHITE)
    assert out.raster == manual
    assert out.page_id == shot.page_id
    assert out.capture_time_ms == shot.capture_time_ms


def test_static_perturb_identity_is_a_no_op_on_pixels():
    page, assets = make_page(), make_assets()
    shot = capture(page, assets, none_script(), CaptureConfig())
    out = static_perturb(shot, EffectState(1.0, 1))
    assert out.raster == shot.raster
    assert out.variant_id == "none__static_v1_N1"


def test_element_raster_sources():
    assets = make_assets()
    block = element_raster(
        ElementSpec("b", "form", 0, 0, 8, 4, 0, 0, color=(1, 2, 3, 255)),
        assets)
    assert (block.array == [1, 2, 3, 255]).all()
    with pytest.raises(RenderError, match="dangling"):
        element_raster(
            ElementSpec("l", "logo", 0, 0, 8, 4, 0, 0, asset_ref="nope.png"),
            assets)
    with pytest.raises(RenderError, match="bbox wants"):
        element_raster(
            ElementSpec("l", "logo", 0, 0, 8, 4, 0, 0, asset_ref="logo.png"),
            assets)


def test_paint_respects_z_order():
    # the form (z=1) sits under the logo (z=2); overlap shows the logo
    page, assets = make_page(), make_assets()
    overlapped = PageSpec(
        page_id="p1", brand="acme", hosting_domain="x.example",
        canvas_width=120, canvas_height=90, canvas_fill=(250, 250, 250, 255),
        normal_render_time_ms=600,
        elements=(
            ElementSpec("form", "form", 30, 10, 40, 20, 1, 0,
                        color=(0, 255, 0, 255)),
            ElementSpec("logo", "logo", 30, 10, 40, 20, 2, 0,
                        asset_ref="logo.png"),
        ),
    )
    frame = full_render(overlapped, assets)
    assert np.array_equal(frame.array[10:30, 30:70],
                          assets.get("logo.png").array)


def test_transparent_pixels_let_the_underlay_show():
    assets = AssetStore()
    art = np.zeros((4, 4, 4), dtype=np.uint8)
    art[:2] = [200, 0, 0, 255]
    assets.add("half.png", Raster(art))
    page = PageSpec(
        page_id="p2", brand="acme", hosting_domain="x.example",
        canvas_width=4, canvas_height=4, canvas_fill=(9, 9, 9, 255),
        normal_render_time_ms=0,
        elements=(ElementSpec("l", "logo", 0, 0, 4, 4, 0, 0,
                              asset_ref="half.png"),),
    )
    frame = full_render(page, assets)
    assert (frame.array[:2] == [200, 0, 0, 255]).all()
    assert (frame.array[2:] == [9, 9, 9, 255]).all()
