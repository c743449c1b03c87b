import filecmp
from pathlib import Path

import numpy as np
import pytest

from phishsim.corpus import Corpus, CorpusError, synth_corpus
from phishsim.detect import embed, similarity
from phishsim.pagespec import validate_corpus
from phishsim.raster import Raster, pixelate

THETA = 0.87


def test_shape_counts(corpus0):
    assert len(corpus0.pages) == 42
    assert len(corpus0.phishing_pages) == 24
    assert len(corpus0.benign_pages) == 18
    assert len(corpus0.reference) == 18
    assert len(corpus0.trusted) == 18
    with_bg = sum(1 for p in corpus0.phishing_pages
                  if any(e.kind == "background" for e in p.elements))
    assert with_bg == 10


def test_every_page_validates(corpus0):
    assert validate_corpus(corpus0.pages, corpus0.assets) == []


def test_benign_twins_live_on_brand_domains(corpus0):
    for page in corpus0.benign_pages:
        entry = corpus0.reference.entry(page.brand)
        assert page.hosting_domain in entry.domains
    for page in corpus0.phishing_pages:
        entry = corpus0.reference.entry(page.brand)
        assert page.hosting_domain not in entry.domains


def test_synthesis_is_deterministic(corpus0):
    again = synth_corpus(seed=0)
    assert again.fingerprint() == corpus0.fingerprint()
    assert synth_corpus(seed=1).fingerprint() != corpus0.fingerprint()


def test_save_is_idempotent(tmp_path, corpus0):
    a = tmp_path / "a"
    b = tmp_path / "b"
    corpus0.save(a)
    corpus0.save(b)
    diff = filecmp.dircmp(a, b)
    mismatch, errors = filecmp.cmpfiles(
        a, b, [p.relative_to(a).as_posix() for p in sorted(a.rglob("*"))
               if p.is_file()], shallow=False)[1:]
    assert diff.left_only == [] and diff.right_only == []
    assert mismatch == [] and errors == []


def test_save_load_round_trip(tmp_path, corpus0):
    out = tmp_path / "corpus"
    corpus0.save(out)
    loaded = Corpus.load(out)
    assert loaded.fingerprint() == corpus0.fingerprint()
    assert loaded.seed == corpus0.seed


def test_load_rejects_missing_manifest(tmp_path):
    with pytest.raises(CorpusError, match="manifest"):
        Corpus.load(tmp_path)


def test_page_lookup(corpus0):
    page = corpus0.page("mailden-p0")
    assert page.brand == "mailden"
    with pytest.raises(KeyError):
        corpus0.page("nobody-p9")


def test_logos_sit_on_the_block_lattice(corpus0):
    # multiples of 60 = lcm(2..5): whole-canvas and element-local pixelation
    # grids coincide at the logo for every block size in range
    for page in corpus0.pages:
        for el in page.logo_elements():
            assert el.x % 60 == 0
            assert el.y == 60


def test_logo_pixelation_curves_are_calibrated(corpus0):
    # construction property: similarity to self after pixelation never
    # increases with block size and never grazes the match threshold
    for entry in corpus0.reference:
        for logo in entry.logos:
            ref = embed(logo)
            sims = [similarity(embed(pixelate(logo, n)), ref)
                    for n in (2, 3, 4, 5)]
            assert all(b <= a for a, b in zip(sims, sims[1:])), entry.brand
            assert all(abs(s - THETA) >= 0.012 for s in sims), entry.brand


def test_half_visible_logos_fall_below_theta(corpus0):
    for entry in corpus0.reference:
        for logo in entry.logos:
            ref = embed(logo)
            half = logo.crop(0, 0, logo.width, logo.height // 2)
            grown = np.full(logo.array.shape, 255, dtype=np.uint8)
            grown[:logo.height // 2] = half.array
            assert similarity(embed(Raster(grown)), ref) < THETA, entry.brand


def test_brands_do_not_collide(corpus0):
    hashes = {e.brand: embed(e.logos[0]) for e in corpus0.reference}
    brands = sorted(hashes)
    for i, a in enumerate(brands):
        for b in brands[i + 1:]:
            assert similarity(hashes[a], hashes[b]) < THETA, (a, b)


def test_trusted_pages_hash_apart(corpus0):
    # the brand bar guarantees distinct full-page hashes across brands
    hashes = [embed(t.raster) for t in corpus0.trusted]
    for i, a in enumerate(hashes):
        for b in hashes[i + 1:]:
            assert similarity(a, b) < 1.0
