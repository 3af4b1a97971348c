"""Seed streams and a byte-level mutator shared by the fuzz tests and the acceptance suite."""

import io
import struct
import tracemalloc
from dataclasses import dataclass

import numpy as np
from PIL import Image

from jpeglines.codec import JpegError, encode_jpeg_grayscale, parse_jpeg
from jpeglines.corpus import CorpusConfig, document_spec, render_document

MARKERS = [0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xC0, 0xC2, 0xDD, 0xD0, 0xD3, 0xD7, 0xE0, 0xFE, 0x00, 0xFF]


def seed_streams():
    """Small text pages (plain, with restarts, low quality) plus a third-party colour file."""
    cfg = CorpusConfig(n_per_tier=1, lines_per_page=(3, 4), chars_per_line=24, margin=8)
    seeds = []
    for tier in (1, 2):
        img, _ = render_document(document_spec(cfg, tier, 0))
        seeds.append(encode_jpeg_grayscale(img, 75))
        seeds.append(encode_jpeg_grayscale(img, 40, restart_interval=3))
    rng = np.random.default_rng(5)
    a = np.clip(np.cumsum(rng.integers(-20, 21, (48, 64, 3)), axis=1) + 128, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(a).save(buf, "JPEG", quality=80)
    seeds.append(buf.getvalue())
    return seeds


def _sof_offset(d):
    i = d.find(b"\xff\xc0")
    return i if i >= 0 and i + 9 <= len(d) else None


def mutate(rng, data: bytes, seeds=()) -> bytes:
    """One random structural or byte-level damage to ``data``."""
    d = bytearray(data)
    n = len(d)
    kind = int(rng.integers(0, 9))
    if kind == 0:  # overwrite a few bytes
        for _ in range(int(rng.integers(1, 9))):
            d[int(rng.integers(0, n))] = int(rng.integers(0, 256))
    elif kind == 1:  # truncate
        d = d[:int(rng.integers(0, n))]
    elif kind == 2:  # insert random bytes
        i = int(rng.integers(0, n))
        d[i:i] = rng.integers(0, 256, int(rng.integers(1, 16))).astype(np.uint8).tobytes()
    elif kind == 3:  # delete a run
        i = int(rng.integers(0, n))
        del d[i:i + int(rng.integers(1, 64))]
    elif kind == 4:  # flip one bit
        d[int(rng.integers(0, n))] ^= 1 << int(rng.integers(0, 8))
    elif kind == 5:  # insert a marker
        i = int(rng.integers(0, n))
        d[i:i] = bytes([0xFF, MARKERS[int(rng.integers(0, len(MARKERS)))]])
    elif kind == 6:  # claim a different (possibly huge) frame size
        i = _sof_offset(d)
        if i is not None:
            h, w = (int(v) for v in rng.integers(0, 65536, 2))
            d[i + 5:i + 9] = struct.pack(">HH", h, w)
    elif kind == 7:  # corrupt a segment length
        i = d.find(b"\xff", int(rng.integers(0, max(1, n // 8))))
        if 0 <= i < n - 3:
            d[i + 2:i + 4] = struct.pack(">H", int(rng.integers(0, 65536)))
    else:  # splice in a slice of another stream
        other = seeds[int(rng.integers(0, len(seeds)))] if seeds else data
        i, j = int(rng.integers(0, n)), int(rng.integers(0, len(other)))
        d[i:i + int(rng.integers(1, 256))] = other[j:j + int(rng.integers(1, 256))]
    return bytes(d)


@dataclass
class FuzzOutcome:
    data_len: int
    error: str | None  # typed error class name, or None when the stream decoded
    peak_bytes: int = 0
    output_bytes: int = 0


def parse_once(data, trace=False) -> FuzzOutcome:
    """Parse one input; anything other than a JpegError propagates to the caller."""
    if trace:
        tracemalloc.reset_peak()
        base = tracemalloc.get_traced_memory()[0]
    out, error = 0, None
    try:
        out = parse_jpeg(data).coef.nbytes
    except JpegError as exc:
        error = type(exc).__name__
    peak = tracemalloc.get_traced_memory()[1] - base if trace else 0
    return FuzzOutcome(len(data), error, peak, out)
