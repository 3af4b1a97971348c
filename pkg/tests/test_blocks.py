import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from jpeglines.blocks import (F10, F11, BlockCategory, ClassifierParams, DctBlock, classify_block, classify_blocks,
                              dequantize, forward_dct_8x8, idct_8x8)
from jpeglines.codec import QuantTable
from jpeglines.codec.tables import scaled_quant_table
from jpeglines.dct import BASIS, forward_dct, idct_below, idct_calls, idct_row_ink, idct_to_samples, inverse_dct

from test_codec import brute_idct_samples

QT75 = QuantTable(scaled_quant_table(75))
PARAMS = ClassifierParams()


def brute_f10(pixels):
    """F(v=1, u=0) straight from the DCT-II definition."""
    g = np.asarray(pixels, dtype=np.float64) - 128
    s = sum(g[y, x] * math.cos((2 * y + 1) * math.pi / 16) for y in range(8) for x in range(8))
    return 0.25 * (1 / math.sqrt(2)) * s


def test_basis_is_orthonormal():
    assert np.allclose(BASIS @ BASIS.T, np.eye(8))


def test_forward_and_inverse_are_inverses(rng):
    x = rng.normal(size=(5, 8, 8))
    assert np.allclose(inverse_dct(forward_dct(x)), x)


def test_forward_matches_definition(rng):
    p = rng.integers(0, 256, (8, 8))
    assert forward_dct_8x8(p)[F10] == pytest.approx(brute_f10(p))


def test_idct_matches_64_term_oracle_on_random_blocks(rng):
    coef = rng.integers(-300, 300, (200, 64))
    coef[:, 0] = rng.integers(-1024, 1016, 200)
    fast = idct_to_samples(coef)
    for b in range(len(coef)):
        assert np.abs(fast[b].astype(int) - brute_idct_samples(coef[b])).max() <= 1


def test_idct_examples():
    zero = DctBlock(np.zeros(64))
    assert (idct_8x8(zero) == 128).all()
    dc = np.zeros(64)
    dc[0] = 1016
    assert (idct_8x8(DctBlock(dc)) == 255).all()


def test_f10_only_block_darkens_the_top_monotonically():
    coef = np.zeros(64)
    coef[0], coef[F10] = -4, -924.3
    samples = idct_8x8(DctBlock(coef)).astype(int)
    assert (samples == samples[:, :1]).all()  # no horizontal variation
    rows = samples[:, 0]
    assert (np.diff(rows) >= 0).all() and rows[0] < rows[-1]
    assert np.array_equal(samples, brute_idct_samples(coef))


def test_dequantize_examples(rng):
    qb = np.zeros(64, dtype=int)
    qb[0] = 63
    q = list(QT75.q)
    q[0] = 16
    assert dequantize(qb, QuantTable(tuple(q))).dc() == 1008
    assert not dequantize(np.zeros(64), QT75).coef.any()
    qb = rng.integers(-50, 50, 64)
    want = [int(qb[i]) * QT75.q[i] for i in range(64)]
    assert list(dequantize(qb, QT75).coef) == want


def test_counter_counts_blocks():
    before = idct_calls.count
    idct_to_samples(np.zeros((7, 64)))
    idct_below(np.zeros((3, 64)), 128)
    assert idct_calls.count - before == 10


@given(arrays(np.int64, (6, 64), elements=st.integers(-2000, 2000)), st.integers(1, 255))
def test_ink_mask_equals_thresholded_samples(coef, level):
    assert np.array_equal(idct_below(coef, level), idct_to_samples(coef) < level)


@given(arrays(np.int64, (5, 64), elements=st.integers(-2000, 2000)), st.integers(1, 255),
       st.lists(st.integers(0, 8), min_size=5, max_size=5))
def test_row_ink_counts_equal_thresholded_samples(coef, level, cols):
    dark = idct_to_samples(coef) < level
    assert np.array_equal(idct_row_ink(coef, level), dark.sum(axis=2))
    clipped = dark & (np.arange(8) < np.array(cols)[:, None, None])
    assert np.array_equal(idct_row_ink(coef, level, cols), clipped.sum(axis=2))


def test_flat_block_ink_rule_over_every_dc():
    """A block with no AC terms is ink exactly when its dequantized DC is below -4."""
    dc = np.arange(-1024 * 8, 1017 * 8)
    coef = np.zeros((len(dc), 64))
    coef[:, 0] = dc
    samples = idct_to_samples(coef)
    assert (samples == samples[:, :1, :1]).all()
    assert np.array_equal(samples[:, 0, 0] < 128, dc < -4)


# ---- classification -------------------------------------------------------------------

def half_block(top, bottom):
    p = np.full((8, 8), bottom, dtype=np.uint8)
    p[:4] = top
    return p


def test_half_black_block_examples():
    top = forward_dct_8x8(half_block(0, 255))
    assert top[F10] == pytest.approx(-924.3, abs=0.1)
    assert classify_block(DctBlock(np.round(top)), PARAMS, QT75) is BlockCategory.TOP_INK
    bottom = forward_dct_8x8(half_block(255, 0))
    assert bottom[F10] == pytest.approx(924.3, abs=0.1)
    assert classify_block(DctBlock(np.round(bottom)), PARAMS, QT75) is BlockCategory.BOTTOM_INK


def test_classification_rules():
    c = np.zeros(64)
    assert classify_block(DctBlock(c), PARAMS, QT75) is BlockCategory.EMPTY
    c[F11] = 100
    assert classify_block(DctBlock(c), PARAMS, QT75) is BlockCategory.FULL_INK
    c[F11], c[2] = 0, 100
    assert classify_block(DctBlock(c), PARAMS, QT75) is BlockCategory.INTERIOR
    c[F10] = 5  # below the energy floor together with nothing else
    c[2] = 0
    assert classify_block(DctBlock(c), PARAMS, QT75) is BlockCategory.EMPTY
    c[F10] = 50
    assert classify_block(DctBlock(c), ClassifierParams(f10_dead_zone=60), QT75) is BlockCategory.INTERIOR
    assert classify_block(DctBlock(c), ClassifierParams(invert_f10_sign=True), QT75) is BlockCategory.TOP_INK


def test_default_energy_threshold():
    assert PARAMS.energy_threshold(QT75) == (2 * min(QT75.q)) ** 2
    assert ClassifierParams(ac_energy_threshold=7).energy_threshold(None) == 7
    with pytest.raises(ValueError):
        PARAMS.energy_threshold(None)
    with pytest.raises(ValueError):
        ClassifierParams(ac_energy_threshold=0)
    with pytest.raises(ValueError):
        ClassifierParams(f10_dead_zone=-1)


@given(arrays(np.int64, (20, 64), elements=st.integers(-300, 300)), st.floats(0, 50))
def test_vectorised_classifier_matches_scalar(coef, eps):
    params = ClassifierParams(f10_dead_zone=eps)
    cats = classify_blocks(coef, params, QT75)
    assert [int(classify_block(DctBlock(b), params, QT75)) for b in coef] == cats.tolist()


@st.composite
def top_ink_blocks(draw):
    """Dark ink on a light block, confined to the top four rows."""
    paper = draw(st.integers(160, 255))
    p = np.full((8, 8), paper, dtype=np.int64)
    ink = draw(arrays(np.bool_, (4, 8)).filter(lambda m: m.any()))
    levels = draw(arrays(np.int64, (4, 8), elements=st.integers(0, 100)))
    p[:4][ink] = levels[ink]
    return p


@given(top_ink_blocks())
def test_top_ink_drives_f10_negative_and_mirrors_flip_it(p):
    f = forward_dct_8x8(p)
    m = forward_dct_8x8(p[::-1])
    assert f[F10] < 0
    assert m[F10] == pytest.approx(-f[F10], abs=1e-6)
    q = np.round(f / QT75.as_array())
    qm = np.round(m / QT75.as_array())
    if classify_block(DctBlock(q * QT75.as_array()), PARAMS, QT75) is BlockCategory.TOP_INK:
        assert classify_block(DctBlock(qm * QT75.as_array()), PARAMS, QT75) is BlockCategory.BOTTOM_INK


@given(arrays(np.int64, 64, elements=st.integers(-200, 200)), st.integers(1, 100))
def test_quantization_keeps_the_f10_sign(qb, quality):
    qt = QuantTable(scaled_quant_table(quality))
    assert np.sign(dequantize(qb, qt).f10()) == np.sign(qb[F10])
    assert np.sign(dequantize(qb, qt).f11()) == np.sign(qb[F11])
