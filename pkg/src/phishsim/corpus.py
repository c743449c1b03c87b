"""Seed-deterministic synthetic page corpus.

24 phishing pages over 18 invented brands (10 pages carry a full-canvas
background), plus one benign twin per brand hosted on the brand's legitimate
domain. Logos are procedural multi-color glyph grids generated so that a
fully rendered logo matches its reference exactly while half-hidden ones hash
far away from it; tests assert those margins rather than trusting them.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .detect import (ReferenceEntry, ReferenceList, TrustedPage,
                     TrustedPageList, domain_matches, embed)
from .pagespec import (AssetStore, ElementSpec, PageSpec, parse_page_spec,
                       serialize_page_spec, validate_corpus)
from .raster import RGBA, Raster, load_png, pixelate, save_png
from .render import full_render

CANVAS_WIDTH = 1280
CANVAS_HEIGHT = 800
NORMAL_RENDER_TIME_MS = 1000
MANIFEST_NAME = "manifest.json"

# brand -> background flag per phishing page; 24 pages, 10 with backgrounds
BRAND_TABLE: tuple[tuple[str, tuple[bool, ...]], ...] = (
    ("mailden", (False,)),
    ("parceljet", (True,)),
    ("oakbank", (True, True)),
    ("summitcard", (False,)),
    ("meridianpay", (False,)),
    ("cablewave", (True,)),
    ("telbright", (True,)),
    ("tradeharbor", (True,)),
    ("alpinetel", (False,)),
    ("paylark", (False, False)),
    ("friendhub", (False, False, False)),
    ("streamnest", (True,)),
    ("hostarium", (False,)),
    ("tunedrop", (False,)),
    ("picloop", (True, True, False)),
    ("softsuite", (True,)),
    ("sunmail", (False,)),
    ("bidmarket", (False,)),
)

_PHISH_WORDS = ("login", "verify", "secure", "account", "signin")
_PHISH_TLDS = ("xyz", "info", "top", "site", "icu")

_LUMA_TARGETS = (35, 85, 135, 185, 235)


class CorpusError(ValueError):
    """Raised when a corpus directory is missing pieces or fails validation."""


@dataclass(frozen=True)
class Corpus:
    """Pages, assets, and the two detector-side lists, as one unit."""

    pages: tuple[PageSpec, ...]
    assets: AssetStore
    reference: ReferenceList
    trusted: TrustedPageList
    seed: int

    @property
    def phishing_pages(self) -> tuple[PageSpec, ...]:
        return tuple(p for p in self.pages if not self._is_benign(p))

    @property
    def benign_pages(self) -> tuple[PageSpec, ...]:
        return tuple(p for p in self.pages if self._is_benign(p))

    def _is_benign(self, page: PageSpec) -> bool:
        try:
            entry = self.reference.entry(page.brand)
        except KeyError:
            return False
        return domain_matches(page.hosting_domain, entry.domains)

    def page(self, page_id: str) -> PageSpec:
        for p in self.pages:
            if p.page_id == page_id:
                return p
        raise KeyError(page_id)

    def fingerprint(self) -> str:
        """Content digest over pages, assets, and both lists."""
        digest = hashlib.sha256()
        for page in sorted(self.pages, key=lambda p: p.page_id):
            digest.update(serialize_page_spec(page).encode())
        for asset_id in self.assets.ids():
            art = self.assets.get(asset_id)
            digest.update(asset_id.encode())
            digest.update(str((art.width, art.height)).encode())
            digest.update(art.array.tobytes())
        for entry in self.reference:
            digest.update(entry.brand.encode())
            digest.update("|".join(entry.domains).encode())
            for logo in entry.logos:
                digest.update(logo.array.tobytes())
        for trusted in self.trusted:
            digest.update(trusted.brand.encode())
            digest.update("|".join(trusted.domains).encode())
            digest.update(trusted.raster.array.tobytes())
        return digest.hexdigest()

    def save(self, out_dir) -> None:
        """Write the corpus tree: manifest, page docs, PNG assets."""
        root = Path(out_dir)
        (root / "pages").mkdir(parents=True, exist_ok=True)
        (root / "assets").mkdir(parents=True, exist_ok=True)
        page_paths = []
        for page in self.pages:
            rel = f"pages/{page.page_id}.json"
            (root / rel).write_text(serialize_page_spec(page), encoding="utf-8")
            page_paths.append(rel)
        asset_paths = []
        for asset_id in self.assets.ids():
            rel = f"assets/{asset_id}.png"
            save_png(self.assets.get(asset_id), root / rel)
            asset_paths.append(rel)
        manifest = {
            "schema_version": 1,
            "seed": self.seed,
            "canvas": {"width": CANVAS_WIDTH, "height": CANVAS_HEIGHT},
            "pages": page_paths,
            "assets": asset_paths,
            "reference_list": [
                {"brand": e.brand,
                 "logos": [f"logo_{e.brand}"] + (
                     [f"logo_{e.brand}_alt"] if len(e.logos) > 1 else []),
                 "domains": list(e.domains)}
                for e in self.reference
            ],
            "trusted_pages": [
                {"brand": t.brand, "asset": f"trusted_{t.brand}",
                 "domains": list(t.domains)}
                for t in self.trusted
            ],
        }
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, in_dir) -> "Corpus":
        """Read a corpus tree back; validation failures are hard errors."""
        root = Path(in_dir)
        manifest_path = root / MANIFEST_NAME
        if not manifest_path.is_file():
            raise CorpusError(f"no {MANIFEST_NAME} in {root}")
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        if manifest.get("schema_version") != 1:
            raise CorpusError(f"unsupported corpus schema in {manifest_path}")
        assets = AssetStore()
        for rel in manifest["assets"]:
            asset_id = Path(rel).stem
            assets.add(asset_id, load_png(root / rel))
        pages = tuple(parse_page_spec((root / rel).read_text(encoding="utf-8"))
                      for rel in manifest["pages"])
        reference = ReferenceList([
            ReferenceEntry(e["brand"],
                           tuple(assets.get(a) for a in e["logos"]),
                           tuple(e["domains"]))
            for e in manifest["reference_list"]
        ])
        trusted = TrustedPageList([
            TrustedPage(t["brand"], assets.get(t["asset"]), tuple(t["domains"]))
            for t in manifest["trusted_pages"]
        ])
        diagnostics = validate_corpus(pages, assets)
        if diagnostics:
            raise CorpusError("; ".join(diagnostics))
        return cls(pages, assets, reference, trusted, int(manifest["seed"]))


def _luma(r: int, g: int, b: int) -> int:
    return (299 * r + 587 * g + 114 * b + 500) // 1000


def _color_at_luma(rng: np.random.Generator, target: int) -> RGBA:
    # adding d to all channels shifts integer luma by exactly d (no clipping)
    while True:
        raw = rng.integers(0, 256, size=3)
        d = target - _luma(int(raw[0]), int(raw[1]), int(raw[2]))
        shifted = raw + d
        if shifted.min() >= 0 and shifted.max() <= 255:
            return (int(shifted[0]), int(shifted[1]), int(shifted[2]), 255)


def _brand_palette(rng: np.random.Generator) -> np.ndarray:
    colors = [_color_at_luma(rng, t) for t in _LUMA_TARGETS]
    return np.array(colors, dtype=np.uint8)


def _glyph_pattern(rng: np.random.Generator, width: int, height: int,
                   palette: np.ndarray, cell: int) -> Raster:
    cols = -(-width // cell)
    rows = -(-height // cell)
    idx = np.empty((rows, cols), dtype=np.int64)
    for r in range(rows):
        idx[r, 0] = rng.integers(0, len(palette))
        for c in range(1, cols):
            # horizontal neighbors always land on different palette lumas
            idx[r, c] = (idx[r, c - 1] + rng.integers(1, len(palette))) % len(palette)
    img = palette[idx]
    img = np.repeat(np.repeat(img, cell, axis=0), cell, axis=1)
    return Raster(np.ascontiguousarray(img[:height, :width]))


_PIXELATION_BLOCKS = (2, 3, 4, 5)
_THETA_MARGIN = 0.012  # keep every pixelated similarity ~3 hash bits off theta


def _make_logo(rng: np.random.Generator, hash_grid: int = 16,
               theta: float = 0.87) -> Raster:
    """A glyph-grid logo with two rejection-sampled guarantees.

    1. Its difference hash carries 4..12 one-bits on every grid row, so each
       hidden quarter under a curtain costs a predictable chunk of Hamming
       distance.
    2. Its similarity to itself after pixelation is non-increasing in block
       size and never lands within _THETA_MARGIN of theta, so block-size
       sweeps cross the match threshold once, downward.
    """
    palette = _brand_palette(rng)
    for _ in range(512):
        width = int(rng.integers(100, 200))
        height = int(rng.integers(64, 125))
        # cells of 6-7 px: coarse enough that 2..5-px blocks degrade the
        # pattern gradually, with no resonance at any block size in range
        cell = int(rng.integers(6, 8))
        logo = _glyph_pattern(rng, width, height, palette, cell)
        ref = embed(logo, hash_grid)
        row_ones = ref.reshape(hash_grid, hash_grid).sum(axis=1)
        if row_ones.min() < 4 or row_ones.max() > 12:
            continue
        sims = [1.0 - float(np.count_nonzero(
            embed(pixelate(logo, n), hash_grid) != ref)) / ref.size
            for n in _PIXELATION_BLOCKS]
        if any(b > a for a, b in zip(sims, sims[1:])):
            continue
        if any(abs(s - theta) < _THETA_MARGIN for s in sims):
            continue
        return logo
    raise RuntimeError("logo generation failed to satisfy hash margins")


def _make_background(rng: np.random.Generator, fill: RGBA) -> Raster:
    """Full-canvas backdrop: clean top quarter, soft checker below."""
    band = CANVAS_HEIGHT // 4
    arr = np.empty((CANVAS_HEIGHT, CANVAS_WIDTH, 4), dtype=np.uint8)
    arr[:, :] = fill
    c1 = np.array(_color_at_luma(rng, 205), dtype=np.uint8)
    c2 = np.array(_color_at_luma(rng, 222), dtype=np.uint8)
    step = int(rng.integers(48, 81))
    ys = np.arange(band, CANVAS_HEIGHT)
    xs = np.arange(CANVAS_WIDTH)
    checker = ((ys[:, None] // step) + (xs[None, :] // step)) % 2 == 0
    body = np.where(checker[:, :, None], c1[None, None, :], c2[None, None, :])
    arr[band:] = body
    return Raster(arr)


_BRANDBAR_HEIGHT = 50
_BRANDBAR_STRIPES = 16


def _make_brandbar(rng: np.random.Generator) -> Raster:
    """A full-width stripe bar unique to a brand, shared by all its pages.

    Stripes are as wide as one full-page hash cell, so two brands' bars
    disagree on several whole hash bits: full renders of different brands
    never hash identically even when their layouts coincide.
    """
    while True:
        pattern = rng.integers(0, 2, size=_BRANDBAR_STRIPES)
        if 6 <= int(pattern.sum()) <= 10:
            break
    low = np.array(_color_at_luma(rng, 96), dtype=np.uint8)
    high = np.array(_color_at_luma(rng, 204), dtype=np.uint8)
    stripes = np.where(pattern[:, None].astype(bool), high, low)
    row = np.repeat(stripes, CANVAS_WIDTH // _BRANDBAR_STRIPES, axis=0)
    arr = np.broadcast_to(row[None, :, :],
                          (_BRANDBAR_HEIGHT, CANVAS_WIDTH, 4))
    return Raster(np.ascontiguousarray(arr))


_LIGHT_FILL_BASE = (246, 247, 249, 255)
_DARK_FILL = (42, 45, 51, 255)


def _page_fill(rng: np.random.Generator, dark: bool) -> RGBA:
    if dark:
        return _DARK_FILL
    jitter = int(rng.integers(-3, 4))
    r, g, b, _ = _LIGHT_FILL_BASE
    return (r + jitter, g + jitter, b + jitter, 255)


def _appear(rng: np.random.Generator) -> int:
    return int(rng.integers(1, 10)) * 100


def _build_page(brand: str, variant: int, has_bg: bool, logo: Raster,
                palette: np.ndarray, hosting_domain: str, page_id: str,
                rng: np.random.Generator) -> tuple[PageSpec, dict[str, Raster]]:
    """One page layout. The logo is the only element in the top quarter."""
    dark = variant == 2
    fill = _page_fill(rng, dark)
    new_assets: dict[str, Raster] = {}
    elements: list[ElementSpec] = []

    if has_bg:
        bg_id = f"bg_{page_id}"
        new_assets[bg_id] = _make_background(rng, fill)
        elements.append(ElementSpec("background", "background", 0, 0,
                                    CANVAS_WIDTH, CANVAS_HEIGHT, 0, 0,
                                    asset_ref=bg_id))

    # multiples of 60 (lcm of block sizes 2..5): a whole-canvas pixelation
    # grid then lines up with the logo's own, so canvas-space and
    # element-space block effects degrade the logo identically
    logo_x = int(rng.integers(1, 5)) * 60
    logo_y = 60
    elements.append(ElementSpec("logo", "logo", logo_x, logo_y,
                                logo.width, logo.height, 10, 0,
                                asset_ref=f"logo_{brand}"))

    text_dark = (226, 229, 233, 255) if dark else (58, 62, 68, 255)
    text_soft = (150, 156, 164, 255) if dark else (166, 171, 178, 255)
    input_fill = (64, 68, 76, 255) if dark else (232, 234, 238, 255)
    button_color = tuple(int(c) for c in palette[3 if variant != 1 else 2][:3]) + (255,)

    col_x = 430 + (48 if variant == 1 else 0) + (-40 if dark else 0)
    col_w = 420 + (40 if dark else 0)
    elements.append(ElementSpec("title", "text", col_x, 252 + 16 * variant,
                                col_w - 80, 30, 5, _appear(rng), color=text_dark))
    elements.append(ElementSpec("field-user", "input", col_x,
                                330 + 24 * variant, col_w, 44, 5,
                                _appear(rng), color=input_fill))
    elements.append(ElementSpec("field-pass", "input", col_x,
                                394 + 24 * variant, col_w, 44, 5,
                                _appear(rng), color=input_fill))
    elements.append(ElementSpec("submit", "button", col_x, 470 + 24 * variant,
                                col_w, 48, 5, _appear(rng), color=button_color))
    if variant >= 1:
        elements.append(ElementSpec("notice", "text", col_x, 560 + 24 * variant,
                                    col_w, 24, 5, _appear(rng), color=text_soft))
    if variant == 2:
        elements.append(ElementSpec("banner", "text", 120, 640, 1040, 40, 5,
                                    _appear(rng), color=input_fill))
    # covers exactly one full-page hash row (700..750 of 16 rows over 800)
    elements.append(ElementSpec("brandbar", "image", 0, 700, CANVAS_WIDTH,
                                _BRANDBAR_HEIGHT, 5, _appear(rng),
                                asset_ref=f"brandbar_{brand}"))
    elements.append(ElementSpec("footer", "text", 490, 768, 300, 16, 5,
                                _appear(rng), color=text_soft))

    page = PageSpec(page_id, brand, hosting_domain, CANVAS_WIDTH, CANVAS_HEIGHT,
                    fill, NORMAL_RENDER_TIME_MS, tuple(elements))
    return page, new_assets


def synth_corpus(seed: int) -> Corpus:
    """Generate the full corpus for a seed. Same seed, same bytes, every time.

    Returns:
        A validated Corpus: 24 phishing pages (10 with backgrounds), one
        benign twin per brand, per-brand reference logos, and a trusted-page
        list built from the twins' full renders.
    """
    assets = AssetStore()
    pages: list[PageSpec] = []
    ref_entries: list[ReferenceEntry] = []
    trusted_entries: list[TrustedPage] = []

    for brand_idx, (brand, bg_flags) in enumerate(BRAND_TABLE):
        brand_rng = np.random.default_rng([seed, 1, brand_idx])
        logo = _make_logo(brand_rng)
        palette = _brand_palette(np.random.default_rng([seed, 2, brand_idx]))
        assets.add(f"logo_{brand}", logo)
        assets.add(f"brandbar_{brand}",
                   _make_brandbar(np.random.default_rng([seed, 5, brand_idx])))
        logos: tuple[Raster, ...] = (logo,)
        if brand == "friendhub":
            alt = _make_logo(np.random.default_rng([seed, 3, brand_idx]))
            assets.add(f"logo_{brand}_alt", alt)
            logos = (logo, alt)
        domains = (f"{brand}.com", f"www.{brand}.com")
        ref_entries.append(ReferenceEntry(brand, logos, domains))

        twin_page: PageSpec | None = None
        for variant, has_bg in enumerate(bg_flags):
            page_rng = np.random.default_rng([seed, 4, brand_idx, variant])
            word = _PHISH_WORDS[variant % len(_PHISH_WORDS)]
            tld = _PHISH_TLDS[int(page_rng.integers(0, len(_PHISH_TLDS)))]
            hosting = f"{brand}-{word}.{tld}"
            page, new_assets = _build_page(brand, variant, has_bg, logo, palette,
                                           hosting, f"{brand}-p{variant}", page_rng)
            for aid, raster in new_assets.items():
                assets.add(aid, raster)
            pages.append(page)
            if variant == 0:
                twin_page = PageSpec(f"{brand}-home", brand, f"www.{brand}.com",
                                     page.canvas_width, page.canvas_height,
                                     page.canvas_fill, page.normal_render_time_ms,
                                     page.elements)
        assert twin_page is not None
        pages.append(twin_page)

    corpus_wip = Corpus(tuple(pages), assets, ReferenceList(ref_entries),
                        TrustedPageList([]), seed)
    for brand, _ in BRAND_TABLE:
        twin = corpus_wip.page(f"{brand}-home")
        raster = full_render(twin, assets)
        assets.add(f"trusted_{brand}", raster)
        trusted_entries.append(
            TrustedPage(brand, raster, (f"{brand}.com", f"www.{brand}.com")))

    corpus = Corpus(tuple(pages), assets, ReferenceList(ref_entries),
                    TrustedPageList(trusted_entries), seed)
    diagnostics = validate_corpus(corpus.pages, corpus.assets)
    if diagnostics:
        raise CorpusError("synthesis produced an invalid corpus: "
                          + "; ".join(diagnostics))
    return corpus
