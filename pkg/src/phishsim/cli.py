"""Command-line front door.

One binary, five subcommands: corpus-synth writes a seeded corpus tree,
render draws one page under one attack variant at one instant, variants
writes the default attack enumeration as a manifest, eval runs a detector
matrix and emits the report, serve runs the delayed-logo warning service.

Exit status 0 iff no errors and no enabled assertion failed: bad input is
status 2, a failed trend assertion is status 3.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import Corpus, CorpusError, synth_corpus
from .detect import DetectorConfig
from .guard import load_guard_config, serve
from .harness import (DETECTOR_NAMES, emit_report, run_extended_mode,
                      run_matrix, run_static_mode, trend_violations)
from .raster import save_png
from .render import CaptureConfig, render_at
from .schedule import (enumerate_variants, load_variants_manifest,
                       none_script, save_variants_manifest)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ASSERTION = 3

# every domain error type subclasses ValueError
_INPUT_ERRORS = (ValueError, OSError, KeyError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phishsim",
        description="Delayed-rendering attack laboratory: synthesize a page "
                    "corpus, replay timed attacks, score detectors, and run "
                    "the warning service.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("corpus-synth", help="write a seeded corpus tree")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("render", help="draw one page/variant/instant as PNG")
    p.add_argument("page_id")
    p.add_argument("variant_id")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--t-ms", type=int, default=2000,
                   help="capture instant in ms (default 2000)")
    p.add_argument("--capture-time", type=int, default=2000,
                   help="capture time the default variants are staged for")
    p.add_argument("--variants", metavar="PATH",
                   help="variants manifest; default: built-in enumeration")
    p.add_argument("--out", default=".", metavar="DIR",
                   help="output directory (default .)")

    p = sub.add_parser("variants", help="write the default attack manifest")
    p.add_argument("--capture-time", type=int, default=2000)
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("eval", help="run the detector matrix, emit a report")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--mode", choices=("live", "static", "extended"),
                   default="live")
    p.add_argument("--detectors", default=",".join(DETECTOR_NAMES),
                   help="comma list (default %(default)s)")
    p.add_argument("--variants", metavar="PATH",
                   help="variants manifest; default: built-in enumeration")
    p.add_argument("--capture-time", type=int, default=2000)
    p.add_argument("--theta", type=float, default=0.87)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--assert-trends", action="store_true",
                   help="fail (status 3) when curtain or pixelation rows "
                        "break monotonicity")
    p.add_argument("--out", metavar="PATH", help="default: stdout")
    p.add_argument("--format", choices=("csv", "structured-text"),
                   default="csv")

    p = sub.add_parser("serve", help="run the delayed-logo warning service")
    p.add_argument("--corpus", required=True, metavar="DIR",
                   help="corpus providing the brand reference list")
    p.add_argument("--config", metavar="PATH",
                   help="JSON service config; GUARD_BIND and GUARD_ALLOWLIST "
                        "override it")
    return parser


def cmd_corpus_synth(seed: int, out_dir: str) -> int:
    out = Path(out_dir)
    if not out.parent.exists():
        raise CorpusError(f"parent directory {out.parent} does not exist")
    synth_corpus(seed).save(out)
    return EXIT_OK


def _resolve_variants(path: str | None, capture_time_ms: int):
    if path is not None:
        return load_variants_manifest(path)
    return enumerate_variants(capture_time_ms)


def cmd_render(corpus_dir: str, page_id: str, variant_id: str, t_ms: int,
               out_dir: str, capture_time_ms: int = 2000,
               variants_path: str | None = None) -> int:
    corpus = Corpus.load(corpus_dir)
    try:
        page = corpus.page(page_id)
    except KeyError:
        raise CorpusError(f"unknown page_id {page_id!r}") from None
    scripts = {s.variant_id: s
               for s in _resolve_variants(variants_path, capture_time_ms)}
    scripts[none_script().variant_id] = none_script()
    if variant_id not in scripts:
        raise CorpusError(f"unknown variant_id {variant_id!r}")
    raster = render_at(page, corpus.assets, scripts[variant_id], t_ms)
    out = Path(out_dir) / f"{page_id}__{variant_id}__t{t_ms}.png"
    save_png(raster, out)
    print(out)
    return EXIT_OK


def cmd_variants(capture_time_ms: int, out_path: str) -> int:
    scripts = enumerate_variants(capture_time_ms)
    save_variants_manifest(scripts, out_path)
    print(f"{len(scripts)} variants -> {out_path}")
    return EXIT_OK


def cmd_eval(corpus_dir: str, mode: str, detectors: str,
             variants_path: str | None, capture_time_ms: int, theta: float,
             jobs: int, assert_trends: bool, out_path: str | None,
             fmt: str) -> int:
    corpus = Corpus.load(corpus_dir)
    names = tuple(d for d in detectors.split(",") if d)
    capture_cfg = CaptureConfig(capture_time_ms=capture_time_ms)
    det_cfg = DetectorConfig(theta=theta)
    variants = _resolve_variants(variants_path, capture_time_ms)
    if mode == "live":
        report = run_matrix(corpus, variants, names, capture_cfg, det_cfg,
                            jobs=jobs)
    elif mode == "static":
        report = run_static_mode(corpus, names, capture_cfg, det_cfg,
                                 jobs=jobs)
    else:
        report = run_extended_mode(corpus, variants, names, capture_cfg,
                                   det_cfg, jobs=jobs)
    text = emit_report(report, fmt)
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")
    if assert_trends:
        violations = trend_violations(report)
        if violations:
            for v in violations:
                print(f"trend violation: {v}", file=sys.stderr)
            return EXIT_ASSERTION
    return EXIT_OK


def cmd_serve(corpus_dir: str, config_path: str | None) -> int:
    cfg = load_guard_config(config_path)
    corpus = Corpus.load(corpus_dir)
    serve(cfg, corpus.reference)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "corpus-synth":
            return cmd_corpus_synth(args.seed, args.out)
        if args.subcommand == "render":
            return cmd_render(args.corpus, args.page_id, args.variant_id,
                              args.t_ms, args.out, args.capture_time,
                              args.variants)
        if args.subcommand == "variants":
            return cmd_variants(args.capture_time, args.out)
        if args.subcommand == "eval":
            return cmd_eval(args.corpus, args.mode, args.detectors,
                            args.variants, args.capture_time, args.theta,
                            args.jobs, args.assert_trends, args.out,
                            args.format)
        if args.subcommand == "serve":
            return cmd_serve(args.corpus, args.config)
        raise AssertionError(f"unhandled subcommand {args.subcommand}")
    except _INPUT_ERRORS as exc:
        print(f"phishsim {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
