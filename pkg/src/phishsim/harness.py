"""FNR/ASR evaluation over the (pages x variants x detectors) matrix.

Three pipelines share one report shape: the live matrix replays attack
scripts through the renderer, static mode perturbs finished screenshots,
and extended mode re-runs variants on the subset of pages the reference
detector already misses. Reports are byte-identical at any parallelism:
work is mapped in task order and reduced sequentially.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

from .corpus import Corpus
from .detect import (DetectorConfig, Verdict, calibrate_fullpage_threshold,
                     detect_full_page, detect_logo_based, embed)
from .pagespec import PageSpec
from .raster import Raster, curtain_mask, pixelate
from .render import (WHITE, CaptureConfig, Screenshot, capture, full_render,
                     none_script, static_perturb)
from .schedule import (AttackScript, EffectState, captured_state,
                       intensity_label)

DETECTOR_NAMES = ("logo", "fullpage")
ASR_TOLERANCE = 1e-9

STATIC_TARGET = "screenshot"
# §-free restatement of the screenshot-level grid: whole-frame block sizes
# and whole-frame top-fraction reveals, identity first as its own row
STATIC_EFFECTS = (
    EffectState(1.0, 1),
    EffectState(1.0, 2),
    EffectState(1.0, 3),
    EffectState(1.0, 4),
    EffectState(1.0, 5),
    EffectState(0.2, 1),
    EffectState(0.4, 1),
    EffectState(0.6, 1),
    EffectState(0.8, 1),
)


class HarnessError(ValueError):
    """Raised for empty inputs or inconsistent report construction."""


def compute_fnr(verdicts: Sequence[Verdict]) -> float:
    """Fraction of ground-truth-phishing inputs judged benign."""
    if not verdicts:
        raise HarnessError("compute_fnr needs at least one verdict")
    benign = sum(1 for v in verdicts if v.label == "benign")
    return benign / len(verdicts)


def compute_asr(fnr_atk: float, fnr_base: float) -> float:
    """Attack success rate: FNR under attack minus baseline FNR."""
    for name, value in (("fnr_atk", fnr_atk), ("fnr_base", fnr_base)):
        if not 0.0 <= value <= 1.0:
            raise HarnessError(f"{name} must be in [0, 1], got {value}")
    return fnr_atk - fnr_base


@dataclass(frozen=True)
class VerdictRecord:
    """One raw detection outcome, the unit the recount oracle consumes."""

    page_id: str
    variant_id: str
    detector: str
    label: str
    brand: str
    score: float

    def line(self) -> str:
        return (f"{self.page_id},{self.variant_id},{self.detector},"
                f"{self.label},{self.brand},{self.score:.4f}")


@dataclass(frozen=True)
class EvalRow:
    """Aggregated outcome of one (detector, variant) cell."""

    detector: str
    attack_kind: str
    target: str
    intensity: str
    n_pages: int
    fnr: float
    asr: float


@dataclass(frozen=True)
class EvalReport:
    """Baselines plus one row per (detector, variant), with provenance."""

    mode: str
    baseline: Mapping[str, float]
    rows: tuple[EvalRow, ...]
    corpus_fingerprint: str
    config_fingerprint: str
    regressions: tuple[str, ...] = ()
    records: tuple[VerdictRecord, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for row in self.rows:
            key = (row.detector, row.attack_kind, row.target, row.intensity)
            if key in seen:
                raise HarnessError(f"duplicate report cell {key}")
            seen.add(key)


def config_fingerprint(capture_cfg: CaptureConfig, det_cfg: DetectorConfig,
                       detectors: Sequence[str], mode: str) -> str:
    """Digest of every knob that can change a report's numbers."""
    doc = {
        "mode": mode,
        "detectors": list(detectors),
        "capture": {
            "capture_time_ms": capture_cfg.capture_time_ms,
            "num_screenshots": capture_cfg.num_screenshots,
            "interval_ms": capture_cfg.interval_ms,
            "initial_delay_ms": capture_cfg.initial_delay_ms,
        },
        "detector": {
            "theta": det_cfg.theta,
            "hash_grid": det_cfg.hash_grid,
            "detectability_min_fraction": det_cfg.detectability_min_fraction,
            "fullpage_threshold": det_cfg.fullpage_threshold,
            "localization_mode": det_cfg.localization_mode,
        },
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class _Bench:
    """Immutable per-run detection context shared by all workers."""

    corpus: Corpus
    capture_cfg: CaptureConfig
    det_cfg: DetectorConfig
    detectors: tuple[str, ...]
    ref_hashes: dict
    trusted_hashes: list


def _prepare(corpus: Corpus, detectors: Sequence[str],
             capture_cfg: CaptureConfig | None,
             det_cfg: DetectorConfig | None) -> _Bench:
    if not detectors:
        raise HarnessError("at least one detector is required")
    for name in detectors:
        if name not in DETECTOR_NAMES:
            raise HarnessError(f"unknown detector {name!r}")
    capture_cfg = capture_cfg or CaptureConfig()
    det_cfg = det_cfg or DetectorConfig()
    if "fullpage" in detectors and det_cfg.fullpage_threshold is None:
        benign = [full_render(p, corpus.assets) for p in corpus.benign_pages]
        phishing = [full_render(p, corpus.assets) for p in corpus.phishing_pages]
        threshold = calibrate_fullpage_threshold(corpus.trusted, benign,
                                                 phishing, det_cfg)
        det_cfg = replace(det_cfg, fullpage_threshold=threshold)
    ref_hashes = {
        entry.brand: [embed(logo, det_cfg.hash_grid) for logo in entry.logos]
        for entry in corpus.reference
    }
    trusted_hashes = [embed(e.raster, det_cfg.hash_grid) for e in corpus.trusted]
    return _Bench(corpus, capture_cfg, det_cfg, tuple(detectors),
                  ref_hashes, trusted_hashes)


def _detect_one(bench: _Bench, detector: str, shot: Screenshot,
                page: PageSpec, script: AttackScript | None,
                underlay_transform: Callable[[Raster], Raster] | None,
                ) -> VerdictRecord:
    if detector == "logo":
        verdict = detect_logo_based(
            shot, page.hosting_domain, bench.corpus.reference, bench.det_cfg,
            page=page, assets=bench.corpus.assets, script=script,
            underlay_transform=underlay_transform,
            ref_hashes=bench.ref_hashes)
    else:
        verdict = detect_full_page(
            shot, page.hosting_domain, bench.corpus.trusted, bench.det_cfg,
            trusted_hashes=bench.trusted_hashes)
    return VerdictRecord(page.page_id, shot.variant_id, detector,
                         verdict.label, verdict.brand or "", verdict.score)


def _ordered_map(tasks: Sequence, fn: Callable, jobs: int) -> list:
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _fnr_by_detector(records: Sequence[VerdictRecord],
                     detectors: Sequence[str]) -> dict[str, float]:
    out = {}
    for det in detectors:
        mine = [r for r in records if r.detector == det]
        if not mine:
            raise HarnessError(f"no verdicts recorded for detector {det!r}")
        out[det] = sum(1 for r in mine if r.label == "benign") / len(mine)
    return out


def _check_row(row: EvalRow, baseline: Mapping[str, float]) -> EvalRow:
    if abs(row.asr - (row.fnr - baseline[row.detector])) > ASR_TOLERANCE:
        raise HarnessError(
            f"asr drift on {row.detector}/{row.intensity}: "
            f"{row.asr} != {row.fnr} - {baseline[row.detector]}")
    return row


def run_matrix(corpus: Corpus, variants: Sequence[AttackScript],
               detectors: Sequence[str] = DETECTOR_NAMES,
               capture_cfg: CaptureConfig | None = None,
               det_cfg: DetectorConfig | None = None,
               jobs: int = 1) -> EvalReport:
    """Live pipeline: render each variant at capture time, detect, aggregate.

    The baseline (no-attack captures of the same pages) is always computed;
    every row's asr is its fnr minus the same detector's baseline fnr.
    """
    bench = _prepare(corpus, detectors, capture_cfg, det_cfg)
    pages = corpus.phishing_pages
    if not pages:
        raise HarnessError("corpus has no phishing pages")
    ids = [s.variant_id for s in variants]
    if len(set(ids)) != len(ids):
        raise HarnessError("variant ids must be unique")
    if "none" in ids:
        raise HarnessError("variant id 'none' is reserved for the baseline")
    scripts = [none_script()] + list(variants)

    def one(task: tuple[AttackScript, PageSpec]) -> list[VerdictRecord]:
        script, page = task
        shot = capture(page, bench.corpus.assets, script, bench.capture_cfg)
        return [_detect_one(bench, det, shot, page, script, None)
                for det in bench.detectors]

    tasks = [(script, page) for script in scripts for page in pages]
    results = _ordered_map(tasks, one, jobs)

    records: list[VerdictRecord] = [r for group in results for r in group]
    per_script: dict[str, list[VerdictRecord]] = {}
    for group in results:
        for rec in group:
            per_script.setdefault(rec.variant_id, []).append(rec)

    baseline = _fnr_by_detector(per_script["none"], bench.detectors)
    rows = []
    for script in variants:
        state = captured_state(script, bench.capture_cfg.capture_time_ms)
        by_det = _fnr_by_detector(per_script[script.variant_id], bench.detectors)
        for det in bench.detectors:
            fnr = by_det[det]
            rows.append(_check_row(
                EvalRow(det, script.attack_kind, script.target,
                        _row_intensity(script.attack_kind, state), len(pages),
                        fnr, compute_asr(fnr, baseline[det])),
                baseline))
    return EvalReport("live", baseline, tuple(rows), corpus.fingerprint(),
                      config_fingerprint(bench.capture_cfg, bench.det_cfg,
                                         bench.detectors, "live"),
                      records=tuple(records))


def _row_intensity(kind: str, state: EffectState) -> str:
    """Intensity shown in a report row: the axis the attack kind varies."""
    if kind == "pixelation":
        return f"N={state.pixel_block}"
    if kind == "curtain":
        return f"v={state.visible_fraction:g}"
    if kind == "combined":
        return f"N={state.pixel_block}&v={state.visible_fraction:g}"
    return intensity_label(state)


def _static_kind(state: EffectState) -> str:
    if state.pixel_block > 1 and state.visible_fraction < 1.0:
        return "combined"
    if state.pixel_block > 1:
        return "pixelation"
    if state.visible_fraction < 1.0:
        return "curtain"
    return "none"


def run_static_mode(corpus: Corpus,
                    detectors: Sequence[str] = DETECTOR_NAMES,
                    capture_cfg: CaptureConfig | None = None,
                    det_cfg: DetectorConfig | None = None,
                    effects: Sequence[EffectState] = STATIC_EFFECTS,
                    jobs: int = 1) -> EvalReport:
    """Screenshot-level pipeline: perturb finished captures, then detect.

    The whole frame is pixelated and cut, not individual elements; logo
    localization compares against an underlay perturbed the same way, so a
    region whited out in both stays undetectable.
    """
    bench = _prepare(corpus, detectors, capture_cfg, det_cfg)
    pages = corpus.phishing_pages
    if not pages:
        raise HarnessError("corpus has no phishing pages")
    if not effects:
        raise HarnessError("static mode needs at least one effect")
    base_shots = {
        page.page_id: capture(page, bench.corpus.assets, none_script(),
                              bench.capture_cfg)
        for page in pages
    }

    def perturb_raster(raster: Raster, state: EffectState) -> Raster:
        if state.pixel_block > 1:
            raster = pixelate(raster, state.pixel_block)
        if state.visible_fraction < 1.0:
            raster = curtain_mask(raster, state.visible_fraction, WHITE)
        return raster

    def one(task: tuple[EffectState, PageSpec]) -> list[VerdictRecord]:
        state, page = task
        shot = static_perturb(base_shots[page.page_id], state)
        transform = (lambda r: perturb_raster(r, state))
        return [_detect_one(bench, det, shot, page, None, transform)
                for det in bench.detectors]

    baseline_recs = [
        _detect_one(bench, det, base_shots[page.page_id], page, None, None)
        for page in pages for det in bench.detectors
    ]
    baseline = _fnr_by_detector(baseline_recs, bench.detectors)

    tasks = [(state, page) for state in effects for page in pages]
    results = _ordered_map(tasks, one, jobs)
    records = baseline_recs + [r for group in results for r in group]

    rows = []
    for idx, state in enumerate(effects):
        chunk = results[idx * len(pages):(idx + 1) * len(pages)]
        flat = [r for group in chunk for r in group]
        by_det = _fnr_by_detector(flat, bench.detectors)
        kind = _static_kind(state)
        for det in bench.detectors:
            fnr = by_det[det]
            rows.append(_check_row(
                EvalRow(det, kind, STATIC_TARGET,
                        _row_intensity(kind, state), len(pages), fnr,
                        compute_asr(fnr, baseline[det])),
                baseline))
    return EvalReport("static", baseline, tuple(rows), corpus.fingerprint(),
                      config_fingerprint(bench.capture_cfg, bench.det_cfg,
                                         bench.detectors, "static"),
                      records=tuple(records))


def run_extended_mode(corpus: Corpus, variants: Sequence[AttackScript],
                      detectors: Sequence[str] = DETECTOR_NAMES,
                      capture_cfg: CaptureConfig | None = None,
                      det_cfg: DetectorConfig | None = None,
                      reference_detector: str | None = None,
                      jobs: int = 1) -> EvalReport:
    """Variants rerun on the pages the reference detector already misses.

    Rows report the FNR delta against the subset baseline; variants that
    make any detector's FNR drop below its subset baseline are listed in
    report.regressions (the attack helped the detector).
    """
    bench = _prepare(corpus, detectors, capture_cfg, det_cfg)
    reference = reference_detector or bench.detectors[0]
    if reference not in bench.detectors:
        raise HarnessError(f"reference detector {reference!r} not in {bench.detectors}")
    ids = [s.variant_id for s in variants]
    if len(set(ids)) != len(ids) or "none" in ids:
        raise HarnessError("variant ids must be unique and not 'none'")

    base_by_page = {}
    for page in corpus.phishing_pages:
        shot = capture(page, bench.corpus.assets, none_script(), bench.capture_cfg)
        base_by_page[page.page_id] = (
            page, shot,
            {det: _detect_one(bench, det, shot, page, None, None)
             for det in bench.detectors})
    subset = [page for page, _, recs in base_by_page.values()
              if recs[reference].label == "benign"]
    if not subset:
        raise HarnessError(
            f"no page evades detector {reference!r} at baseline; "
            "extended mode has an empty subset")

    baseline_recs = [base_by_page[p.page_id][2][det]
                     for p in subset for det in bench.detectors]
    baseline = _fnr_by_detector(baseline_recs, bench.detectors)

    def one(task: tuple[AttackScript, PageSpec]) -> list[VerdictRecord]:
        script, page = task
        shot = capture(page, bench.corpus.assets, script, bench.capture_cfg)
        return [_detect_one(bench, det, shot, page, script, None)
                for det in bench.detectors]

    tasks = [(script, page) for script in variants for page in subset]
    results = _ordered_map(tasks, one, jobs)
    records = baseline_recs + [r for group in results for r in group]

    rows = []
    regressions = []
    for idx, script in enumerate(variants):
        chunk = results[idx * len(subset):(idx + 1) * len(subset)]
        flat = [r for group in chunk for r in group]
        state = captured_state(script, bench.capture_cfg.capture_time_ms)
        by_det = _fnr_by_detector(flat, bench.detectors)
        for det in bench.detectors:
            fnr = by_det[det]
            delta = compute_asr(fnr, baseline[det])
            rows.append(_check_row(
                EvalRow(det, script.attack_kind, script.target,
                        _row_intensity(script.attack_kind, state),
                        len(subset), fnr, delta),
                baseline))
            if delta < 0:
                regressions.append(f"{det}:{script.variant_id}")
    return EvalReport("extended", baseline, tuple(rows), corpus.fingerprint(),
                      config_fingerprint(bench.capture_cfg, bench.det_cfg,
                                         bench.detectors, "extended"),
                      regressions=tuple(regressions),
                      records=tuple(records))


CSV_HEADER = "detector,attack_kind,target,intensity,n_pages,fnr,asr"


def emit_report(report: EvalReport, fmt: str = "csv") -> str:
    """Serialize a report; stable ordering, floats at 4 decimal places."""
    if fmt == "csv":
        lines = [f"# mode: {report.mode}",
                 f"# corpus_fingerprint: {report.corpus_fingerprint}",
                 f"# config_fingerprint: {report.config_fingerprint}"]
        for det, fnr in report.baseline.items():
            lines.append(f"# baseline: {det}={fnr:.4f}")
        for entry in report.regressions:
            lines.append(f"# regression: {entry}")
        lines.append(CSV_HEADER)
        for row in report.rows:
            lines.append(f"{row.detector},{row.attack_kind},{row.target},"
                         f"{row.intensity},{row.n_pages},{row.fnr:.4f},"
                         f"{row.asr:.4f}")
        return "\n".join(lines) + "\n"
    if fmt == "structured-text":
        lines = [f"mode: {report.mode}",
                 f"corpus_fingerprint: {report.corpus_fingerprint}",
                 f"config_fingerprint: {report.config_fingerprint}"]
        for det, fnr in report.baseline.items():
            lines.append(f"baseline {det}: {fnr:.4f}")
        for entry in report.regressions:
            lines.append(f"regression: {entry}")
        for row in report.rows:
            lines.append(
                f"row detector={row.detector} attack_kind={row.attack_kind} "
                f"target={row.target} intensity={row.intensity} "
                f"n_pages={row.n_pages} fnr={row.fnr:.4f} asr={row.asr:.4f}")
        return "\n".join(lines) + "\n"
    raise HarnessError(f"unknown report format {fmt!r}")


def parse_report(text: str, fmt: str = "csv") -> EvalReport:
    """Rebuild a report from its serialized form (verdict records excluded).

    Floats come back at the emitted precision; arithmetic invariants are not
    re-checked here since rounding already happened at emit time.
    """
    mode = ""
    corpus_fp = ""
    config_fp = ""
    baseline: dict[str, float] = {}
    regressions: list[str] = []
    rows: list[EvalRow] = []
    if fmt == "csv":
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("# mode: "):
                mode = line.removeprefix("# mode: ")
            elif line.startswith("# corpus_fingerprint: "):
                corpus_fp = line.removeprefix("# corpus_fingerprint: ")
            elif line.startswith("# config_fingerprint: "):
                config_fp = line.removeprefix("# config_fingerprint: ")
            elif line.startswith("# baseline: "):
                det, _, fnr = line.removeprefix("# baseline: ").partition("=")
                baseline[det] = float(fnr)
            elif line.startswith("# regression: "):
                regressions.append(line.removeprefix("# regression: "))
            elif line == CSV_HEADER or line.startswith("#"):
                continue
            else:
                parts = line.split(",")
                if len(parts) != 7:
                    raise HarnessError(f"bad report line: {line!r}")
                rows.append(EvalRow(parts[0], parts[1], parts[2], parts[3],
                                    int(parts[4]), float(parts[5]),
                                    float(parts[6])))
    elif fmt == "structured-text":
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("mode: "):
                mode = line.removeprefix("mode: ")
            elif line.startswith("corpus_fingerprint: "):
                corpus_fp = line.removeprefix("corpus_fingerprint: ")
            elif line.startswith("config_fingerprint: "):
                config_fp = line.removeprefix("config_fingerprint: ")
            elif line.startswith("baseline "):
                det, _, fnr = line.removeprefix("baseline ").partition(": ")
                baseline[det] = float(fnr)
            elif line.startswith("regression: "):
                regressions.append(line.removeprefix("regression: "))
            elif line.startswith("row "):
                fields = {}
                for token in line.removeprefix("row ").split(" "):
                    key, _, value = token.partition("=")
                    fields[key] = value
                rows.append(EvalRow(fields["detector"], fields["attack_kind"],
                                    fields["target"], fields["intensity"],
                                    int(fields["n_pages"]),
                                    float(fields["fnr"]), float(fields["asr"])))
            else:
                raise HarnessError(f"bad report line: {line!r}")
    else:
        raise HarnessError(f"unknown report format {fmt!r}")
    return EvalReport(mode, baseline, tuple(rows), corpus_fp, config_fp,
                      regressions=tuple(regressions))


def trend_violations(report: EvalReport) -> list[str]:
    """Monotonicity breaches in the single-axis attack rows.

    Within each (detector, target) group, curtain asr must not rise as the
    visible fraction grows and pixelation asr must not fall as the block
    size grows. Combined rows vary two axes and are not checked.
    """
    groups: dict[tuple[str, str, str], list[tuple[float, float]]] = {}
    for row in report.rows:
        if row.attack_kind not in ("curtain", "pixelation"):
            continue
        axis, _, value = row.intensity.partition("=")
        if axis not in ("v", "N"):
            continue
        key = (row.detector, row.attack_kind, row.target)
        groups.setdefault(key, []).append((float(value), row.asr))
    out: list[str] = []
    for (det, kind, target), points in sorted(groups.items()):
        points.sort()
        axis = "v" if kind == "curtain" else "N"
        for (xa, a), (xb, b) in zip(points, points[1:]):
            rises = b > a + ASR_TOLERANCE
            falls = b < a - ASR_TOLERANCE
            if (kind == "curtain" and rises) or (kind == "pixelation" and falls):
                out.append(f"{det}/{kind}/{target}: asr {a:.4f} -> {b:.4f} "
                           f"between {axis}={xa:g} and {axis}={xb:g}")
    return out


def static_variant_id(state: EffectState) -> str:
    """The record id a static effect produces on a no-attack capture."""
    return f"none__static_v{state.visible_fraction:g}_N{state.pixel_block}"


def recount(report: EvalReport, variants: Sequence[AttackScript] = (),
            capture_time_ms: int = 2000,
            effects: Sequence[EffectState] = ()) -> None:
    """Independent arithmetic audit from the raw verdict records.

    Rebuilds each (detector, variant) cell's fnr by counting raw verdicts,
    recomputes the baseline the same way, and checks that every report row
    carries exactly that fnr and an asr equal to fnr minus baseline within
    ASR_TOLERANCE. The variant list (live/extended) or effect list (static)
    names the cells; all numbers come from the records alone.
    """
    if not report.records:
        raise HarnessError("report carries no verdict records to recount")
    cells: dict[str, tuple[str, str, str]] = {}
    for script in variants:
        state = captured_state(script, capture_time_ms)
        cells[script.variant_id] = (script.attack_kind, script.target,
                                    _row_intensity(script.attack_kind, state))
    for state in effects:
        kind = _static_kind(state)
        cells[static_variant_id(state)] = (kind, STATIC_TARGET,
                                           _row_intensity(kind, state))

    by_cell: dict[tuple[str, str], list[VerdictRecord]] = {}
    for rec in report.records:
        by_cell.setdefault((rec.detector, rec.variant_id), []).append(rec)

    def counted_fnr(det: str, variant_id: str) -> float:
        recs = by_cell.get((det, variant_id))
        if not recs:
            raise HarnessError(f"no records for cell ({det}, {variant_id})")
        return sum(1 for r in recs if r.label == "benign") / len(recs)

    base = {det: counted_fnr(det, "none") for det in report.baseline}
    for det, fnr in report.baseline.items():
        if abs(base[det] - fnr) > ASR_TOLERANCE:
            raise HarnessError(f"baseline recount mismatch for {det!r}")

    by_key = {}
    for variant_id, (kind, target, intensity) in cells.items():
        for det in report.baseline:
            by_key[(det, kind, target, intensity)] = (det, variant_id)
    for row in report.rows:
        key = (row.detector, row.attack_kind, row.target, row.intensity)
        if key not in by_key:
            raise HarnessError(f"report row {key} matches no known cell")
        det, variant_id = by_key[key]
        recs = by_cell[(det, variant_id)]
        if len(recs) != row.n_pages:
            raise HarnessError(
                f"cell ({det}, {variant_id}) holds {len(recs)} records, "
                f"row says n_pages={row.n_pages}")
        fnr = counted_fnr(det, variant_id)
        if abs(fnr - row.fnr) > ASR_TOLERANCE:
            raise HarnessError(f"fnr recount mismatch on {key}: {fnr} != {row.fnr}")
        if abs(row.asr - (fnr - base[det])) > ASR_TOLERANCE:
            raise HarnessError(
                f"asr recount mismatch on {key}: {row.asr} != {fnr} - {base[det]}")
