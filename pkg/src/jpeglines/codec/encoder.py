"""Minimal baseline grayscale JPEG writer (standard tables, optional DRI)."""

from __future__ import annotations

import struct

import numpy as np

from ..dct import forward_dct
from .huffman import HuffmanTable
from .image import CoefficientImage, InvalidQuality, PixelImage, QuantTable
from .tables import (AC_LUMINANCE_BITS, AC_LUMINANCE_VALUES, DC_LUMINANCE_BITS,
                     DC_LUMINANCE_VALUES, ZIGZAG, ZIGZAG_INDEX, scaled_quant_table)

DC_TABLE = HuffmanTable(DC_LUMINANCE_BITS, DC_LUMINANCE_VALUES)
AC_TABLE = HuffmanTable(AC_LUMINANCE_BITS, AC_LUMINANCE_VALUES)


def _code_arrays(table):
    codes = np.zeros(256, dtype=np.int64)
    lengths = np.zeros(256, dtype=np.int64)
    for sym, (code, length) in table.encode_map().items():
        codes[sym] = code
        lengths[sym] = length
    return codes, lengths


_DC_CODES, _DC_LENGTHS = _code_arrays(DC_TABLE)
_AC_CODES, _AC_LENGTHS = _code_arrays(AC_TABLE)
_ZRL, _EOB = 0xF0, 0x00
_BITS_PER_CHUNK = 1 << 20


def check_quality(quality):
    if not isinstance(quality, (int, np.integer)) or not 1 <= quality <= 100:
        raise InvalidQuality(f"quality must be an integer in [1, 100], got {quality!r}")


def quantize_image(img: PixelImage, quality: int) -> CoefficientImage:
    """Level shift, forward DCT and quantize; these are exactly the values the encoder writes."""
    check_quality(quality)
    qt = QuantTable(scaled_quant_table(quality))
    h, w = img.height_px, img.width_px
    bh, bw = -(-h // 8), -(-w // 8)
    padded = np.pad(img.samples, ((0, bh * 8 - h), (0, bw * 8 - w)), mode="edge")
    tiles = padded.reshape(bh, 8, bw, 8).transpose(0, 2, 1, 3).astype(np.float64) - 128.0
    coef = forward_dct(tiles).reshape(bh, bw, 64) / qt.as_array()
    # round half away from zero, as libjpeg does
    quant = (np.sign(coef) * np.floor(np.abs(coef) + 0.5)).astype(np.int16)
    return CoefficientImage(w, h, quant, qt)


def _header(ci, restart_interval):
    out = bytearray(b"\xff\xd8")
    jfif = b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"
    out += b"\xff\xe0" + struct.pack(">H", len(jfif) + 2) + jfif
    q = ci.quant_table.q
    out += b"\xff\xdb" + struct.pack(">HB", 67, 0) + bytes(q[i] for i in ZIGZAG)
    out += b"\xff\xc0" + struct.pack(">HBHHBBBB", 11, 8, ci.height_px, ci.width_px, 1, 1, 0x11, 0)
    for cls, table in ((0, DC_TABLE), (1, AC_TABLE)):
        payload = table.segment_payload(cls, 0)
        out += b"\xff\xc4" + struct.pack(">H", len(payload) + 2) + payload
    if restart_interval:
        out += b"\xff\xdd" + struct.pack(">HH", 4, restart_interval)
    out += b"\xff\xda" + struct.pack(">HBBBBBB", 8, 1, 1, 0x00, 0, 63, 0)
    return out


def _bit_length(x):
    """Magnitude category of each value: the bit length of its absolute value."""
    return np.frexp(np.abs(x).astype(np.float64))[1].astype(np.int64)


def _extra_bits(v, s):
    """The s low-order bits JPEG appends after a category-s code (ones' complement for negatives)."""
    return np.where(v >= 0, v, v + (1 << s) - 1)


def _fields(zz, restart_interval):
    """Every Huffman code and appended-bits field of the scan, in stream order.

    Returns ``(values, lengths, block)`` with one entry per field.
    """
    n = len(zz)
    block_ids = np.arange(n)
    dc = zz[:, 0]
    prev = np.concatenate(([0], dc[:-1]))
    if restart_interval:
        prev[block_ids % restart_interval == 0] = 0
    diff = dc - prev
    s_dc = _bit_length(diff)

    b, k = np.nonzero(zz[:, 1:])
    k = k + 1
    v = zz[b, k]
    first_of_block = np.concatenate(([True], b[1:] != b[:-1])) if len(b) else np.zeros(0, dtype=bool)
    prev_k = np.where(first_of_block, 0, np.concatenate(([0], k[:-1])))
    run = k - prev_k - 1
    n_zrl = run // 16
    s_ac = _bit_length(v)
    sym = (run % 16) * 16 + s_ac
    last_k = np.zeros(n, dtype=np.int64)
    last_k[b] = k  # later (larger) k of the same block overwrite earlier ones
    has_eob = last_k < 63

    per_nz = n_zrl + 2
    nz_fields = np.bincount(b, weights=per_nz, minlength=n).astype(np.int64)
    count = 2 + nz_fields + has_eob
    block_start = np.cumsum(count) - count
    nz_before_in_block = np.cumsum(per_nz) - per_nz - (np.cumsum(nz_fields) - nz_fields)[b]
    nz_start = block_start[b] + 2 + nz_before_in_block

    total = int(count.sum())
    values = np.zeros(total, dtype=np.int64)
    lengths = np.zeros(total, dtype=np.int64)
    values[block_start] = _DC_CODES[s_dc]
    lengths[block_start] = _DC_LENGTHS[s_dc]
    values[block_start + 1] = _extra_bits(diff, s_dc)
    lengths[block_start + 1] = s_dc
    if n_zrl.any():
        zrl_at = np.repeat(nz_start, n_zrl) + (np.arange(n_zrl.sum()) - np.repeat(np.cumsum(n_zrl) - n_zrl, n_zrl))
        values[zrl_at] = _AC_CODES[_ZRL]
        lengths[zrl_at] = _AC_LENGTHS[_ZRL]
    code_at = nz_start + n_zrl
    values[code_at] = _AC_CODES[sym]
    lengths[code_at] = _AC_LENGTHS[sym]
    values[code_at + 1] = _extra_bits(v, s_ac)
    lengths[code_at + 1] = s_ac
    eob_at = (block_start + count - 1)[has_eob]
    values[eob_at] = _AC_CODES[_EOB]
    lengths[eob_at] = _AC_LENGTHS[_EOB]
    return values, lengths, np.repeat(block_ids, count)


def _scan_bytes(zz, restart_interval):
    values, lengths, block = _fields(zz, restart_interval)
    n = len(zz)
    interval = restart_interval or max(n, 1)
    n_intervals = max(-(-n // interval), 1)
    field_interval = block // interval
    interval_bits = np.bincount(field_interval, weights=lengths, minlength=n_intervals).astype(np.int64)
    pad = -interval_bits % 8  # each interval is padded to a byte with 1-bits
    shift = np.cumsum(pad) - pad
    starts = np.cumsum(lengths) - lengths + shift[field_interval]
    bits = np.ones(int(interval_bits.sum() + pad.sum()), dtype=np.uint8)
    # expand fields to single bits, a bounded number of bits at a time
    lo = 0
    ends = np.cumsum(lengths)
    while lo < len(values):
        hi = max(int(np.searchsorted(ends, ends[lo] - lengths[lo] + _BITS_PER_CHUNK)), lo + 1)
        ln = lengths[lo:hi]
        idx = np.repeat(np.arange(lo, hi), ln)
        off = np.arange(len(idx)) - np.repeat(np.cumsum(ln) - ln, ln)
        bits[starts[idx] + off] = (values[idx] >> (lengths[idx] - 1 - off)) & 1
        lo = hi
    raw = np.packbits(bits)
    ff = np.flatnonzero(raw == 0xFF)
    stuffed = np.insert(raw, ff + 1, 0)
    if n_intervals > 1:
        boundaries = np.cumsum((interval_bits + pad) // 8)[:-1]
        at = boundaries + np.searchsorted(ff, boundaries)
        markers = np.empty(2 * len(at), dtype=np.uint8)
        markers[0::2] = 0xFF
        markers[1::2] = 0xD0 + np.arange(len(at)) % 8
        stuffed = np.insert(stuffed, np.repeat(at, 2), markers)
    return stuffed.tobytes()


def encode_coefficients(ci: CoefficientImage, restart_interval: int = 0) -> bytes:
    """Entropy-code a single-component coefficient grid as a baseline JFIF stream."""
    if not 0 <= restart_interval <= 0xFFFF:
        raise ValueError("restart interval must fit in 16 bits")
    if max(ci.quant_table.q) > 255:
        raise ValueError("8-bit DQT only")
    zz = ci.coef.reshape(-1, 64)[:, ZIGZAG_INDEX].astype(np.int64)
    return bytes(_header(ci, restart_interval)) + _scan_bytes(zz, restart_interval) + b"\xff\xd9"


def encode_jpeg_grayscale(img: PixelImage, quality: int, restart_interval: int = 0) -> bytes:
    """Encode an 8-bit grayscale image as a baseline, single-component JFIF stream."""
    return encode_coefficients(quantize_image(img, quality), restart_interval)
