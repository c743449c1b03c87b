"""Deterministic frame reconstruction of a page under an attack script.

The renderer answers one question: what did the canvas hold at time t? No
wall clock is involved; captures at the same instant are always identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pagespec import AssetStore, ElementSpec, PageSpec
from .raster import Raster, curtain_mask, curtain_visible_rows, pixelate
from .schedule import AttackScript, EffectState, effect_at, none_script

WHITE = (255, 255, 255, 255)


class RenderError(ValueError):
    """Raised when a page cannot be rendered (bad refs, mismatched assets)."""


@dataclass(frozen=True)
class CaptureConfig:
    """When screenshots are taken.

    capture_time_ms: the single-shot capture instant.
    num_screenshots / interval_ms / initial_delay_ms: the sequence protocol,
    shot k lands at initial_delay_ms + k * interval_ms.
    """

    capture_time_ms: int = 2000
    num_screenshots: int = 5
    interval_ms: int = 1000
    initial_delay_ms: int = 0

    def __post_init__(self) -> None:
        if self.capture_time_ms < 0 or self.initial_delay_ms < 0:
            raise ValueError("capture times must be >= 0")
        if self.num_screenshots < 1 or self.interval_ms < 1:
            raise ValueError("sequence needs num_screenshots >= 1 and interval_ms >= 1")


@dataclass(frozen=True)
class Screenshot:
    """A rendered frame plus the coordinates it was taken under."""

    raster: Raster
    page_id: str
    variant_id: str
    capture_time_ms: int


def _targeted_kinds(script: AttackScript) -> frozenset[str]:
    if script.attack_kind == "none":
        return frozenset()
    if script.target == "both":
        return frozenset(("logo", "background"))
    return frozenset((script.target,))


def element_raster(element: ElementSpec, assets: AssetStore) -> Raster:
    """The element's source pixels: its asset, or a solid color block."""
    if element.asset_ref is not None:
        try:
            art = assets.get(element.asset_ref)
        except KeyError:
            raise RenderError(
                f"element {element.element_id!r}: dangling asset {element.asset_ref!r}") from None
        if (art.width, art.height) != (element.width, element.height):
            raise RenderError(
                f"element {element.element_id!r}: asset {element.asset_ref!r} is "
                f"{art.width}x{art.height}, bbox wants {element.width}x{element.height}")
        return art
    return Raster.filled(element.width, element.height, element.color)


def render_at(page: PageSpec, assets: AssetStore, script: AttackScript,
              t_ms: int) -> Raster:
    """Reconstruct the canvas at time t under the given script.

    Untargeted elements appear atomically at their base_appear_time_ms. A
    script other than ``none`` fully owns its targeted elements: they are
    pixelated by the current block size and revealed top-down to the current
    visible fraction, with concealed rows left unpainted so the pixels
    beneath show through.
    """
    if t_ms < 0:
        raise ValueError(f"t_ms must be >= 0, got {t_ms}")
    targeted = _targeted_kinds(script)
    state = effect_at(script, t_ms)
    canvas = np.empty((page.canvas_height, page.canvas_width, 4), dtype=np.uint8)
    canvas[:, :] = page.canvas_fill
    order = sorted(page.elements, key=lambda el: el.z_order)
    for el in order:
        if el.kind in targeted:
            src = element_raster(el, assets)
            if state.pixel_block > 1:
                src = pixelate(src, state.pixel_block)
            rows = curtain_visible_rows(state.visible_fraction, el.height)
            if rows == 0:
                continue
            _paint(canvas, page, el, src.array[:rows])
        elif el.base_appear_time_ms <= t_ms:
            src = element_raster(el, assets)
            _paint(canvas, page, el, src.array)
    return Raster(canvas)


def _paint(canvas: np.ndarray, page: PageSpec, el: ElementSpec,
           src: np.ndarray) -> None:
    h, w = src.shape[0], src.shape[1]
    if (el.x < 0 or el.y < 0 or el.x + w > page.canvas_width
            or el.y + h > page.canvas_height):
        raise RenderError(f"element {el.element_id!r}: bbox outside canvas")
    region = canvas[el.y:el.y + h, el.x:el.x + w]
    alpha = src[:, :, 3]
    if int(alpha.min()) == 255:
        region[:, :, :] = src
    else:
        opaque = alpha == 255
        region[opaque] = src[opaque]


def capture(page: PageSpec, assets: AssetStore, script: AttackScript,
            cfg: CaptureConfig) -> Screenshot:
    """Single screenshot at cfg.capture_time_ms."""
    raster = render_at(page, assets, script, cfg.capture_time_ms)
    return Screenshot(raster, page.page_id, script.variant_id, cfg.capture_time_ms)


def capture_sequence(page: PageSpec, assets: AssetStore, script: AttackScript,
                     cfg: CaptureConfig) -> list[Screenshot]:
    """K screenshots at initial_delay + k*interval, k = 0..K-1."""
    shots = []
    for k in range(cfg.num_screenshots):
        t = cfg.initial_delay_ms + k * cfg.interval_ms
        raster = render_at(page, assets, script, t)
        shots.append(Screenshot(raster, page.page_id, script.variant_id, t))
    return shots


def static_perturb(shot: Screenshot, state: EffectState,
                   fill=WHITE) -> Screenshot:
    """Apply an effect to a finished screenshot (whole-frame, after the fact).

    Pixelates the full raster by state.pixel_block, then keeps only the top
    visible fraction with the fill color below. Metadata is preserved; the
    variant id gains a static suffix.
    """
    raster = shot.raster
    if state.pixel_block > 1:
        raster = pixelate(raster, state.pixel_block)
    if state.visible_fraction < 1.0:
        raster = curtain_mask(raster, state.visible_fraction, fill)
    suffix = f"__static_v{state.visible_fraction:g}_N{state.pixel_block}"
    return Screenshot(raster, shot.page_id, shot.variant_id + suffix,
                      shot.capture_time_ms)


def full_render(page: PageSpec, assets: AssetStore) -> Raster:
    """The finished page: every element painted, no attack."""
    return render_at(page, assets, none_script(), page.normal_render_time_ms)
