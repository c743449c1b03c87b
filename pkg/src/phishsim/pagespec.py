"""Page and element descriptions plus their on-disk document format.

A page document is JSON with an explicit ``schema_version``, colors as 8-digit
RRGGBBAA hex, and all times as integer milliseconds. Parsing is strict:
unknown keys, bad enums, and malformed colors are hard errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .raster import RGBA, Raster

SCHEMA_VERSION = 1

ELEMENT_KINDS = ("logo", "background", "text", "input", "button", "image")

DEFAULT_CANVAS_WIDTH = 1280
DEFAULT_CANVAS_HEIGHT = 800


class PageSpecError(ValueError):
    """Raised for malformed or inconsistent page documents."""


def parse_color(text: str) -> RGBA:
    """Parse an 8-digit RRGGBBAA hex string."""
    if not isinstance(text, str) or len(text) != 8:
        raise PageSpecError(f"color must be 8 hex digits RRGGBBAA, got {text!r}")
    try:
        val = int(text, 16)
    except ValueError:
        raise PageSpecError(f"color must be 8 hex digits RRGGBBAA, got {text!r}") from None
    return ((val >> 24) & 0xFF, (val >> 16) & 0xFF, (val >> 8) & 0xFF, val & 0xFF)


def format_color(color: RGBA) -> str:
    return "".join(f"{c:02X}" for c in color)


@dataclass(frozen=True)
class ElementSpec:
    """One rectangular page element.

    Exactly one of ``asset_ref`` (key into the asset store) or ``color``
    (solid RGBA) provides the element's pixels.
    """

    element_id: str
    kind: str
    x: int
    y: int
    width: int
    height: int
    z_order: int
    base_appear_time_ms: int
    asset_ref: str | None = None
    color: RGBA | None = None

    def __post_init__(self) -> None:
        if self.kind not in ELEMENT_KINDS:
            raise PageSpecError(f"element {self.element_id!r}: unknown kind {self.kind!r}")
        if self.width < 1 or self.height < 1:
            raise PageSpecError(f"element {self.element_id!r}: non-positive bbox")
        if self.base_appear_time_ms < 0:
            raise PageSpecError(f"element {self.element_id!r}: negative appear time")
        if (self.asset_ref is None) == (self.color is None):
            raise PageSpecError(
                f"element {self.element_id!r}: exactly one of asset/color required")

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.width, self.height)


@dataclass(frozen=True)
class PageSpec:
    """A synthetic page: canvas, hosting domain, and its ordered elements."""

    page_id: str
    brand: str
    hosting_domain: str
    canvas_width: int
    canvas_height: int
    canvas_fill: RGBA
    normal_render_time_ms: int
    elements: tuple[ElementSpec, ...]

    def __post_init__(self) -> None:
        if self.canvas_width < 1 or self.canvas_height < 1:
            raise PageSpecError(f"page {self.page_id!r}: non-positive canvas")
        if self.normal_render_time_ms < 0:
            raise PageSpecError(f"page {self.page_id!r}: negative render time")
        seen = set()
        for el in self.elements:
            if el.element_id in seen:
                raise PageSpecError(
                    f"page {self.page_id!r}: duplicate element id {el.element_id!r}")
            seen.add(el.element_id)

    def element(self, element_id: str) -> ElementSpec:
        for el in self.elements:
            if el.element_id == element_id:
                return el
        raise KeyError(element_id)

    def without_element(self, element_id: str) -> "PageSpec":
        kept = tuple(el for el in self.elements if el.element_id != element_id)
        if len(kept) == len(self.elements):
            raise KeyError(element_id)
        return PageSpec(self.page_id, self.brand, self.hosting_domain,
                        self.canvas_width, self.canvas_height, self.canvas_fill,
                        self.normal_render_time_ms, kept)

    def logo_elements(self) -> tuple[ElementSpec, ...]:
        return tuple(el for el in self.elements if el.kind == "logo")


class AssetStore:
    """Maps asset ids to rasters. Treat as read-only once a corpus is loaded."""

    def __init__(self, assets: Mapping[str, Raster] | None = None) -> None:
        self._assets: dict[str, Raster] = dict(assets or {})

    def __contains__(self, asset_id: str) -> bool:
        return asset_id in self._assets

    def __len__(self) -> int:
        return len(self._assets)

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._assets))

    def get(self, asset_id: str) -> Raster:
        try:
            return self._assets[asset_id]
        except KeyError:
            raise KeyError(f"unknown asset {asset_id!r}") from None

    def add(self, asset_id: str, raster: Raster) -> None:
        if asset_id in self._assets:
            raise ValueError(f"duplicate asset id {asset_id!r}")
        self._assets[asset_id] = raster


def _require_keys(obj: Mapping, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise PageSpecError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise PageSpecError(f"{where}: missing keys {sorted(missing)}")


def _int_field(obj: Mapping, key: str, where: str, minimum: int | None = None) -> int:
    val = obj[key]
    if not isinstance(val, int) or isinstance(val, bool):
        raise PageSpecError(f"{where}: {key} must be an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise PageSpecError(f"{where}: {key} must be >= {minimum}, got {val}")
    return val


def _parse_element(obj: Mapping, index: int) -> ElementSpec:
    where = f"elements[{index}]"
    if not isinstance(obj, Mapping):
        raise PageSpecError(f"{where}: must be an object")
    _require_keys(obj, {"id", "kind", "bbox", "z_order", "base_appear_time_ms",
                        "asset", "color"},
                  {"id", "kind", "bbox", "z_order", "base_appear_time_ms"}, where)
    bbox = obj["bbox"]
    if (not isinstance(bbox, Sequence) or isinstance(bbox, str) or len(bbox) != 4
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in bbox)):
        raise PageSpecError(f"{where}: bbox must be [x, y, w, h] integers")
    asset = obj.get("asset")
    color = obj.get("color")
    if asset is not None and not isinstance(asset, str):
        raise PageSpecError(f"{where}: asset must be a string")
    return ElementSpec(
        element_id=str(obj["id"]),
        kind=str(obj["kind"]),
        x=bbox[0], y=bbox[1], width=bbox[2], height=bbox[3],
        z_order=_int_field(obj, "z_order", where),
        base_appear_time_ms=_int_field(obj, "base_appear_time_ms", where, minimum=0),
        asset_ref=asset,
        color=parse_color(color) if color is not None else None,
    )


def parse_page_spec(text: str) -> PageSpec:
    """Parse a page document.

    Raises:
        PageSpecError: on JSON syntax errors (with line/column), unsupported
            schema versions, unknown keys, or any field-level violation.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PageSpecError(
            f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise PageSpecError("page document must be a JSON object")
    _require_keys(doc, {"schema_version", "page_id", "brand", "hosting_domain",
                        "canvas", "normal_render_time_ms", "elements"},
                  {"schema_version", "page_id", "brand", "hosting_domain",
                   "canvas", "normal_render_time_ms", "elements"}, "page")
    version = doc["schema_version"]
    if version != SCHEMA_VERSION:
        raise PageSpecError(f"unsupported schema_version {version!r}")
    canvas = doc["canvas"]
    if not isinstance(canvas, Mapping):
        raise PageSpecError("canvas: must be an object")
    _require_keys(canvas, {"width", "height", "fill"}, {"width", "height", "fill"}, "canvas")
    elements = doc["elements"]
    if not isinstance(elements, list):
        raise PageSpecError("elements: must be an array")
    return PageSpec(
        page_id=str(doc["page_id"]),
        brand=str(doc["brand"]),
        hosting_domain=str(doc["hosting_domain"]),
        canvas_width=_int_field(canvas, "width", "canvas", minimum=1),
        canvas_height=_int_field(canvas, "height", "canvas", minimum=1),
        canvas_fill=parse_color(canvas["fill"]),
        normal_render_time_ms=_int_field(doc, "normal_render_time_ms", "page", minimum=0),
        elements=tuple(_parse_element(el, i) for i, el in enumerate(elements)),
    )


def serialize_page_spec(page: PageSpec) -> str:
    """Serialize a page to its document form (stable key order, 2-space indent)."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "page_id": page.page_id,
        "brand": page.brand,
        "hosting_domain": page.hosting_domain,
        "canvas": {
            "width": page.canvas_width,
            "height": page.canvas_height,
            "fill": format_color(page.canvas_fill),
        },
        "normal_render_time_ms": page.normal_render_time_ms,
        "elements": [],
    }
    for el in page.elements:
        entry: dict = {
            "id": el.element_id,
            "kind": el.kind,
            "bbox": [el.x, el.y, el.width, el.height],
            "z_order": el.z_order,
            "base_appear_time_ms": el.base_appear_time_ms,
        }
        if el.asset_ref is not None:
            entry["asset"] = el.asset_ref
        else:
            entry["color"] = format_color(el.color)
        doc["elements"].append(entry)
    return json.dumps(doc, indent=2) + "\n"


def validate_corpus(pages: Sequence[PageSpec], assets: AssetStore) -> list[str]:
    """Cross-check pages against each other and the asset store.

    Returns:
        Human-readable diagnostics; empty when the corpus is renderable.
    """
    diagnostics: list[str] = []
    seen_pages: set[str] = set()
    for page in pages:
        pid = page.page_id
        if pid in seen_pages:
            diagnostics.append(f"duplicate page id {pid!r}")
        seen_pages.add(pid)
        for el in page.elements:
            where = f"page {pid!r} element {el.element_id!r}"
            if (el.x < 0 or el.y < 0 or el.x + el.width > page.canvas_width
                    or el.y + el.height > page.canvas_height):
                diagnostics.append(f"{where}: bbox outside canvas")
            if el.asset_ref is not None:
                if el.asset_ref not in assets:
                    diagnostics.append(f"{where}: dangling asset ref {el.asset_ref!r}")
                else:
                    art = assets.get(el.asset_ref)
                    if (art.width, art.height) != (el.width, el.height):
                        diagnostics.append(
                            f"{where}: asset {el.asset_ref!r} is "
                            f"{art.width}x{art.height}, bbox wants {el.width}x{el.height}")
            if el.kind == "background" and (el.width, el.height) != (
                    page.canvas_width, page.canvas_height):
                diagnostics.append(f"{where}: background must cover the canvas")
            if el.base_appear_time_ms > page.normal_render_time_ms:
                diagnostics.append(f"{where}: appears after normal render time")
    return diagnostics
