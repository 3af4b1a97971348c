import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from jpeglines.codec import PixelImage, decode_pixels, encode_jpeg_grayscale, parse_jpeg
from jpeglines.corpus import (CorpusConfig, DocumentSpec, GroundTruth, LineSpec, Overflow, document_spec,
                              generate_corpus, random_text, read_manifest, read_pgm, render_document, write_pgm)
from jpeglines.font import DESCENDER_TOP, XHEIGHT_TOP, render_text


def one_line(text, scale=1):
    spec = DocumentSpec(16 + 8 * scale * len(text) + 16, 64 * scale, (LineSpec(text),), scale, margin_top=8)
    return render_document(spec)


def ink_rows(img):
    return np.flatnonzero((img.samples < 128).any(axis=1))


def test_x_height_letters_fill_exactly_the_middle_zone():
    img, gt = one_line("oooo")
    (t,) = gt.lines
    assert t.ink_bottom_px - t.ink_top_px + 1 == DESCENDER_TOP - XHEIGHT_TOP == 8
    rows = ink_rows(img)
    assert (rows[0], rows[-1]) == (t.ink_top_px, t.ink_bottom_px)


def test_descender_letters_reach_the_descender_zone():
    img, gt = one_line("jjjj")
    rows = ink_rows(img)
    (t,) = gt.lines
    assert (rows[0], rows[-1]) == (t.ink_top_px, t.ink_bottom_px)
    mask = render_text("jjjj")
    assert mask[DESCENDER_TOP:].any()
    assert t.ink_bottom_px - t.ink_top_px + 1 > 8


@pytest.mark.parametrize("scale", [1, 2, 3])
def test_scale_multiplies_the_extent(scale):
    _, gt = one_line("Typography", scale)
    _, base = one_line("Typography")
    assert gt.lines[0].ink_bottom_px - gt.lines[0].ink_top_px + 1 == \
        scale * (base.lines[0].ink_bottom_px - base.lines[0].ink_top_px + 1)


def test_zero_gap_extents_abut():
    spec = DocumentSpec(200, 80, (LineSpec("Hello jumpy", 0), LineSpec("quiet fox", 0)), 1)
    _, gt = render_document(spec)
    assert gt.lines[1].ink_top_px == gt.lines[0].ink_bottom_px + 1


@settings(max_examples=30)
@given(st.lists(st.tuples(st.text("abcdefghijklmnopqrstuvwxyzABQ ", min_size=1, max_size=12).filter(str.strip),
                          st.integers(0, 30)), min_size=1, max_size=5), st.integers(1, 2))
def test_ground_truth_matches_the_render(lines, scale):
    specs = tuple(LineSpec(t, g * scale) for t, g in lines)
    width = 32 + 8 * scale * max(len(t) for t, _ in lines)
    height = 32 + sum(16 * scale + g * scale for _, g in lines)
    img, gt = render_document(DocumentSpec(width, height, specs, scale))
    dark = (img.samples == 0).any(axis=1)
    assert set(np.unique(img.samples)) <= {0, 255}
    covered = np.zeros_like(dark)
    for k, t in enumerate(gt.lines):
        assert dark[t.ink_top_px] and dark[t.ink_bottom_px]
        covered[t.ink_top_px:t.ink_bottom_px + 1] = True
        if k + 1 < len(gt):
            nxt = gt.lines[k + 1]
            assert nxt.ink_top_px - t.ink_bottom_px - 1 == specs[k].gap_after
            assert not dark[t.ink_bottom_px + 1:nxt.ink_top_px].any()
    assert not dark[~covered].any()


def test_overflow_and_bad_input():
    with pytest.raises(Overflow):
        render_document(DocumentSpec(40, 40, (LineSpec("far too wide for the page"),)))
    with pytest.raises(Overflow):
        render_document(DocumentSpec(400, 20, (LineSpec("a", 10), LineSpec("b"))))
    with pytest.raises(ValueError):
        render_document(DocumentSpec(100, 100, (LineSpec("   "),)))
    with pytest.raises(ValueError):
        render_document(DocumentSpec(100, 100, (LineSpec("a", -1),)))


def test_random_text_shape(rng):
    for n in (1, 5, 40, 76):
        t = random_text(rng, n)
        assert 0 < len(t) <= n and t == t.strip()
        assert set(t) <= set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ ")


def test_document_spec_is_deterministic_and_scaled():
    cfg = CorpusConfig(seed=5)
    assert document_spec(cfg, 2, 3) == document_spec(cfg, 2, 3)
    assert document_spec(cfg, 2, 3) != document_spec(cfg, 2, 4)
    for tier in (1, 2, 3):
        spec = document_spec(cfg, tier, 0)
        assert spec.scale == tier
        assert cfg.lines_per_page[0] <= len(spec.lines) <= cfg.lines_per_page[1]
        assert {ln.gap_after for ln in spec.lines[:-1]} <= {g * tier for g in cfg.gaps}


def test_zero_gap_is_forced_when_required():
    cfg = CorpusConfig(seed=1, gaps=(0, 16, 24), require_zero_gap=True)
    for i in range(10):
        assert 0 in [ln.gap_after for ln in document_spec(cfg, 1, i).lines[:-1]]


@pytest.mark.parametrize("kw", [dict(n_per_tier=-1), dict(tiers=()), dict(tiers=(0,)), dict(gaps=(-4,)),
                                dict(gaps=(8,), require_zero_gap=True), dict(lines_per_page=(5, 2)),
                                dict(quality=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        CorpusConfig(**kw)


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    cfg = CorpusConfig(n_per_tier=10, seed=7, lines_per_page=(4, 8), chars_per_line=30, margin=16)
    a = generate_corpus(cfg, tmp_path_factory.mktemp("a"), dump_pgm=True)
    b = generate_corpus(cfg, tmp_path_factory.mktemp("b"))
    return cfg, a, b


def test_corpus_file_counts(small_corpus):
    _, manifest, _ = small_corpus
    root = manifest.parent
    assert len(list(root.glob("tier*/*.jpg"))) == 30
    assert len(list(root.glob("tier*/*.gt.txt"))) == 30
    assert len(list(root.glob("*.txt"))) == 1
    entries = read_manifest(manifest)
    assert len(entries) == 30
    assert sorted({e.scale_tier for e in entries}) == [1, 2, 3]


def test_same_seed_gives_a_byte_identical_corpus(small_corpus):
    _, a, b = small_corpus
    for ea, eb in zip(read_manifest(a), read_manifest(b)):
        assert ea.jpeg_path.read_bytes() == eb.jpeg_path.read_bytes()
        assert ea.gt_path.read_text() == eb.gt_path.read_text()
    assert a.read_text() == b.read_text()


def test_pages_parse_here_and_in_a_third_party_decoder(small_corpus):
    _, manifest, _ = small_corpus
    for e in read_manifest(manifest):
        data = e.jpeg_path.read_bytes()
        ours = decode_pixels(parse_jpeg(data)).samples
        theirs = np.asarray(Image.open(io.BytesIO(data)))
        assert np.abs(ours.astype(int) - theirs).max() <= 1


def within_16(decoded, render):
    return np.mean(np.abs(decoded.astype(int) - render) <= 16)


def test_compression_loss_is_that_of_a_reference_encoder(small_corpus):
    """Binary text rings past 16 levels on about 1% of pixels at quality 75 under any baseline encoder,
    so the loss is compared with a third-party encoder at that quality and bounded outright at 90."""
    _, manifest, _ = small_corpus
    for e in read_manifest(manifest):
        render = read_pgm(e.jpeg_path.with_suffix(".pgm")).samples
        ours = decode_pixels(parse_jpeg(e.jpeg_path.read_bytes())).samples
        buf = io.BytesIO()
        Image.fromarray(render).save(buf, "JPEG", quality=75)
        theirs = np.asarray(Image.open(buf))
        assert abs(within_16(ours, render) - within_16(theirs, render)) <= 0.002
        hi = decode_pixels(parse_jpeg(encode_jpeg_grayscale(PixelImage.from_array(render), 90))).samples
        assert within_16(hi, render) >= 0.99


def test_sidecars_hold_the_render_extents(small_corpus):
    cfg, manifest, _ = small_corpus
    for e in read_manifest(manifest):
        idx = int(e.jpeg_path.stem[3:])
        _, gt = render_document(document_spec(cfg, e.scale_tier, idx))
        assert GroundTruth.from_text(e.gt_path.read_text()) == gt


def test_pgm_round_trip(tmp_path, rng):
    img = PixelImage.from_array(rng.integers(0, 256, (13, 17), dtype=np.uint8))
    write_pgm(tmp_path / "x.pgm", img)
    assert np.array_equal(read_pgm(tmp_path / "x.pgm").samples, img.samples)
    (tmp_path / "c.pgm").write_bytes(b"P5\n# comment\n2 1\n255\n\x00\xff")
    assert read_pgm(tmp_path / "c.pgm").samples.tolist() == [[0, 255]]
    (tmp_path / "bad.pgm").write_bytes(b"P2\n1 1\n255\n0")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "bad.pgm")


def test_ground_truth_and_manifest_parsing(tmp_path):
    gt = GroundTruth.from_text("3 9\n\n12 20\n")
    assert [(t.ink_top_px, t.ink_bottom_px) for t in gt.lines] == [(3, 9), (12, 20)]
    assert GroundTruth.from_text(gt.to_text()) == gt
    with pytest.raises(ValueError):
        GroundTruth.from_text("1 2 3\n")
    (tmp_path / "m.txt").write_text("a.jpg a.gt.txt 2\n\n")
    (e,) = read_manifest(tmp_path / "m.txt")
    assert e.jpeg_path == tmp_path / "a.jpg" and e.scale_tier == 2
    (tmp_path / "bad.txt").write_text("a.jpg 2\n")
    with pytest.raises(ValueError):
        read_manifest(tmp_path / "bad.txt")


def test_unwritable_output_names_the_file(tmp_path):
    (tmp_path / "tier1").write_text("not a directory")
    with pytest.raises(OSError):
        generate_corpus(CorpusConfig(n_per_tier=1, tiers=(1,)), tmp_path)
