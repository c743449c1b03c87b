"""Stand-in visual phishing detectors.

Two pipelines share one deterministic embedding (a horizontal difference
hash over integer luma):

* logo-based: localize logo regions, match them against a reference list of
  brand logos, then flag brand/domain mismatches;
* full-page: nearest-distance lookup against a trusted-page list, again
  gated by the domain check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from . import kernels
from .pagespec import AssetStore, PageSpec
from .raster import Raster
from .render import Screenshot, render_at
from .schedule import AttackScript, none_script

BBox = tuple[int, int, int, int]


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs shared by both pipelines.

    theta: minimum similarity for a brand match (match iff score >= theta).
    hash_grid: difference-hash grid; hashes carry hash_grid**2 bits.
    detectability_min_fraction: fraction of logo-bbox pixels that must differ
        from the underlay before oracle localization reports the logo.
    localization_mode: "oracle" (needs the page spec) or "naive" (pixels only).
    fullpage_threshold: max distance for a trusted-page match; None means
        calibrate from the corpus first.
    """

    theta: float = 0.87
    hash_grid: int = 16
    detectability_min_fraction: float = 0.05
    localization_mode: str = "oracle"
    fullpage_threshold: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        if self.hash_grid < 2:
            raise ValueError(f"hash_grid must be >= 2, got {self.hash_grid}")
        if not 0.0 <= self.detectability_min_fraction <= 1.0:
            raise ValueError("detectability_min_fraction must be in [0, 1]")
        if self.localization_mode not in ("oracle", "naive"):
            raise ValueError(f"unknown localization mode {self.localization_mode!r}")


@dataclass(frozen=True)
class ReferenceEntry:
    """One protected brand: its reference logos and legitimate domains."""

    brand: str
    logos: tuple[Raster, ...]
    domains: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.logos:
            raise ValueError(f"brand {self.brand!r} needs at least one reference logo")
        if not self.domains:
            raise ValueError(f"brand {self.brand!r} needs at least one domain")


@dataclass(frozen=True)
class TrustedPage:
    """One trusted full-page render and the domains allowed to serve it."""

    brand: str
    raster: Raster
    domains: tuple[str, ...]


class ReferenceList:
    """Brand-sorted reference entries; iteration order breaks score ties."""

    def __init__(self, entries: Sequence[ReferenceEntry]) -> None:
        seen: set[str] = set()
        for e in entries:
            if e.brand in seen:
                raise ValueError(f"duplicate brand {e.brand!r}")
            seen.add(e.brand)
        self.entries: tuple[ReferenceEntry, ...] = tuple(
            sorted(entries, key=lambda e: e.brand))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def entry(self, brand: str) -> ReferenceEntry:
        for e in self.entries:
            if e.brand == brand:
                return e
        raise KeyError(brand)


class TrustedPageList:
    def __init__(self, entries: Sequence[TrustedPage]) -> None:
        self.entries: tuple[TrustedPage, ...] = tuple(
            sorted(entries, key=lambda e: e.brand))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class Verdict:
    """One detector decision for one screenshot."""

    label: str  # "phishing" | "benign"
    brand: str | None
    score: float
    reason: str

    def record(self, page_id: str, variant_id: str, detector: str) -> str:
        """Raw verdict line: page, variant, detector, label, brand, score."""
        return ",".join([page_id, variant_id, detector, self.label,
                         self.brand or "", f"{self.score:.4f}"])


def domain_matches(host: str, domains: Sequence[str]) -> bool:
    """Suffix-rule domain check: exact label match or subdomain thereof."""
    host = host.lower().rstrip(".")
    for d in domains:
        d = d.lower().rstrip(".")
        if host == d or host.endswith("." + d):
            return True
    return False


def int_luma(raster: Raster) -> np.ndarray:
    """Integer Rec.601 luma, (H, W) uint8."""
    arr = raster.array.astype(np.uint32)
    return ((299 * arr[:, :, 0] + 587 * arr[:, :, 1] + 114 * arr[:, :, 2] + 500)
            // 1000).astype(np.uint8)


def embed(raster: Raster, hash_grid: int = 16) -> np.ndarray:
    """Horizontal difference hash: hash_grid**2 bits as a bool vector.

    Luma is resampled to (hash_grid+1) x hash_grid and each bit records
    whether a pixel is brighter than its right neighbor. Deterministic, and
    invariant to uniform brightness shifts that saturate no channel.
    """
    if raster.width < hash_grid + 1 or raster.height < hash_grid:
        raise ValueError(
            f"raster {raster.width}x{raster.height} too small for grid {hash_grid}")
    luma = int_luma(raster)[:, :, None]
    small = kernels.bilinear_downscale_u8(luma, hash_grid + 1, hash_grid)[:, :, 0]
    bits = small[:, :-1] > small[:, 1:]
    return bits.reshape(-1)


def similarity(h1: np.ndarray, h2: np.ndarray) -> float:
    """1 - normalized Hamming distance. Hashes must have equal length."""
    if h1.shape != h2.shape:
        raise ValueError(f"hash length mismatch: {h1.shape} vs {h2.shape}")
    return 1.0 - float(np.count_nonzero(h1 != h2)) / h1.size


def hash_distance(h1: np.ndarray, h2: np.ndarray) -> float:
    return 1.0 - similarity(h1, h2)


def _region_diff_fraction(a: Raster, b: Raster, bbox: BBox) -> float:
    x, y, w, h = bbox
    ra = a.array[y:y + h, x:x + w]
    rb = b.array[y:y + h, x:x + w]
    differing = np.any(ra != rb, axis=2)
    return float(np.count_nonzero(differing)) / (w * h)


def _band_fill_color(arr: np.ndarray, band_height: int) -> np.ndarray:
    """Modal color of the top band; ties go to the lexicographically smallest."""
    band = arr[:band_height].reshape(-1, 4).astype(np.uint32)
    # pack RGBA into one scalar key: a flat sort beats np.unique(axis=0)'s
    # structured sort, and big-endian packing keeps argmax's first-index
    # tie-break lexicographic
    keys = (band[:, 0] << 24) | (band[:, 1] << 16) | (band[:, 2] << 8) | band[:, 3]
    uniq, counts = np.unique(keys, return_counts=True)
    best = int(uniq[int(np.argmax(counts))])
    return np.array([(best >> 24) & 255, (best >> 16) & 255,
                     (best >> 8) & 255, best & 255], dtype=np.uint8)


def locate_logos(shot: Screenshot, cfg: DetectorConfig,
                 page: PageSpec | None = None,
                 assets: AssetStore | None = None,
                 script: AttackScript | None = None,
                 underlay_transform: Callable[[Raster], Raster] | None = None,
                 ) -> list[BBox]:
    """Find candidate logo regions in a screenshot.

    Oracle mode re-renders the page without each logo element (same script,
    same instant) and reports the logo's bbox when at least
    detectability_min_fraction of its pixels differ from that underlay: a
    logo indistinguishable from what is behind it cannot be localized.

    Naive mode knows nothing about the page: it takes connected runs of
    non-fill pixels (fill inferred as the modal color of the top quarter),
    keeps components touching that top quarter, and drops any too small to
    hash. Returned boxes are sorted by (y, x).

    Args:
        shot: the screenshot under test.
        cfg: detector knobs; cfg.localization_mode picks the mode.
        page: page spec, required in oracle mode.
        assets: asset store, required in oracle mode.
        script: the active attack script (oracle mode); None means no attack.
        underlay_transform: optional raster transform applied to underlay
            renders before comparison (used for whole-frame perturbations).

    Returns:
        Candidate (x, y, w, h) boxes.
    """
    if cfg.localization_mode == "oracle":
        if page is None or assets is None:
            raise ValueError("oracle localization requires page and assets")
        script = script or none_script()
        boxes: list[BBox] = []
        for el in page.logo_elements():
            underlay = render_at(page.without_element(el.element_id), assets,
                                 script, shot.capture_time_ms)
            if underlay_transform is not None:
                underlay = underlay_transform(underlay)
            frac = _region_diff_fraction(shot.raster, underlay, el.bbox)
            if frac >= cfg.detectability_min_fraction:
                boxes.append(el.bbox)
        return boxes
    return _locate_naive(shot.raster, cfg)


def _locate_naive(raster: Raster, cfg: DetectorConfig) -> list[BBox]:
    arr = raster.array
    band_height = max(1, raster.height // 4)
    fill = _band_fill_color(arr, band_height)
    mask = np.any(arr != fill[None, None, :], axis=2)
    labels, _ = ndimage.label(mask, structure=np.ones((3, 3), dtype=np.int8))
    boxes: list[BBox] = []
    for sl in ndimage.find_objects(labels):
        if sl is None:
            continue
        ys, xs = sl
        if ys.start >= band_height:
            continue
        w = xs.stop - xs.start
        h = ys.stop - ys.start
        if w < cfg.hash_grid + 1 or h < cfg.hash_grid:
            continue
        boxes.append((xs.start, ys.start, w, h))
    boxes.sort(key=lambda b: (b[1], b[0]))
    return boxes


def match_brand(region: Raster, reference: ReferenceList, cfg: DetectorConfig,
                ref_hashes: dict[str, list[np.ndarray]] | None = None,
                ) -> tuple[str, float] | None:
    """Best reference-logo match for a region, or None below theta.

    Ties break toward the lexicographically-first brand, then the earlier
    reference logo.
    """
    h = embed(region, cfg.hash_grid)
    best: tuple[str, float] | None = None
    for entry in reference:
        hashes = (ref_hashes[entry.brand] if ref_hashes is not None
                  else [embed(l, cfg.hash_grid) for l in entry.logos])
        for rh in hashes:
            score = similarity(h, rh)
            if best is None or score > best[1]:
                best = (entry.brand, score)
    if best is None or best[1] < cfg.theta:
        return None
    return best


def detect_logo_based(shot: Screenshot, page_domain: str,
                      reference: ReferenceList, cfg: DetectorConfig,
                      page: PageSpec | None = None,
                      assets: AssetStore | None = None,
                      script: AttackScript | None = None,
                      underlay_transform: Callable[[Raster], Raster] | None = None,
                      ref_hashes: dict[str, list[np.ndarray]] | None = None,
                      ) -> Verdict:
    """Logo pipeline: localize, match, then check the hosting domain.

    No localizable logo or no match above theta => benign (the detector has
    no brand to protect). A matched brand hosted off its legitimate domains
    => phishing.
    """
    boxes = locate_logos(shot, cfg, page=page, assets=assets, script=script,
                         underlay_transform=underlay_transform)
    best: tuple[str, float] | None = None
    for box in boxes:
        x, y, w, h = box
        if w < cfg.hash_grid + 1 or h < cfg.hash_grid:
            continue
        match = match_brand(shot.raster.crop(x, y, w, h), reference, cfg,
                            ref_hashes=ref_hashes)
        if match is not None and (best is None or match[1] > best[1]):
            best = match
    if best is None:
        reason = "no_logo_localized" if not boxes else "no_brand_match"
        return Verdict("benign", None, 0.0, reason)
    brand, score = best
    if domain_matches(page_domain, reference.entry(brand).domains):
        return Verdict("benign", brand, score, "legitimate_domain")
    return Verdict("phishing", brand, score, "brand_domain_mismatch")


def detect_full_page(shot: Screenshot, page_domain: str,
                     trusted: TrustedPageList, cfg: DetectorConfig,
                     trusted_hashes: list[np.ndarray] | None = None) -> Verdict:
    """Full-page pipeline: nearest trusted page within threshold + domain check."""
    if cfg.fullpage_threshold is None:
        raise ValueError("fullpage_threshold not set; calibrate first")
    if len(trusted) == 0:
        raise ValueError("trusted page list is empty")
    h = embed(shot.raster, cfg.hash_grid)
    best_entry: TrustedPage | None = None
    best_dist = float("inf")
    for i, entry in enumerate(trusted):
        th = (trusted_hashes[i] if trusted_hashes is not None
              else embed(entry.raster, cfg.hash_grid))
        dist = hash_distance(h, th)
        if dist < best_dist:
            best_entry = entry
            best_dist = dist
    assert best_entry is not None
    if best_dist < cfg.fullpage_threshold:
        if domain_matches(page_domain, best_entry.domains):
            return Verdict("benign", best_entry.brand, 1.0 - best_dist,
                           "legitimate_domain")
        return Verdict("phishing", best_entry.brand, 1.0 - best_dist,
                       "trusted_page_match")
    return Verdict("benign", None, 1.0 - best_dist, "no_trusted_match")


def calibrate_fullpage_threshold(trusted: TrustedPageList,
                                 benign_shots: Sequence[Raster],
                                 phishing_shots: Sequence[Raster],
                                 cfg: DetectorConfig) -> float:
    """Distance threshold from labeled renders.

    Candidate thresholds are the observed min-distances. Detection is strict
    (< threshold); pixel-identical trusted entries are excluded on the benign
    side so a trusted page is not its own evidence. Among candidates with
    zero benign false positives, pick the ones catching the most phishing
    shots, then the smallest.
    """
    if len(trusted) == 0:
        raise ValueError("trusted page list is empty")
    t_hashes = [embed(e.raster, cfg.hash_grid) for e in trusted]

    def min_dist(shot: Raster, exclude_identical: bool) -> float:
        sh = embed(shot, cfg.hash_grid)
        best = float("inf")
        for entry, th in zip(trusted, t_hashes):
            if exclude_identical and shot.same_pixels(entry.raster):
                continue
            best = min(best, hash_distance(sh, th))
        return best

    benign_d = [min_dist(s, exclude_identical=True) for s in benign_shots]
    phish_d = [min_dist(s, exclude_identical=False) for s in phishing_shots]
    candidates = sorted(set(benign_d) | set(phish_d))
    if not candidates:
        raise ValueError("calibration needs at least one labeled shot")
    best_thr = None
    best_tp = -1
    for thr in candidates:
        fp = sum(1 for d in benign_d if d < thr)
        if fp > 0:
            continue
        tp = sum(1 for d in phish_d if d < thr)
        if tp > best_tp:
            best_tp = tp
            best_thr = thr
    assert best_thr is not None  # the smallest candidate always has fp == 0
    return best_thr
