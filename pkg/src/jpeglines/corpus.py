"""Synthetic printed pages with exact per-line ink ground truth."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codec import PixelImage, encode_jpeg_grayscale
from .font import CELL_W, render_text

log = logging.getLogger(__name__)

# rough English letter frequencies, used only to make pages look like prose
_LETTERS = "etaoinshrdlcumwfgypbvkjxqz"
_FREQ = np.array([12.7, 9.1, 8.2, 7.5, 7.0, 6.7, 6.3, 6.1, 6.0, 4.3, 4.0, 2.8, 2.8, 2.4, 2.4, 2.2,
                  2.0, 2.0, 1.9, 1.5, 1.0, 0.8, 0.15, 0.15, 0.1, 0.07])
_FREQ = _FREQ / _FREQ.sum()


class Overflow(ValueError):
    """Rendered content does not fit the page."""


@dataclass(frozen=True)
class LineSpec:
    text: str
    gap_after: int = 0  # blank pixel rows between this line's ink and the next line's ink


@dataclass(frozen=True)
class DocumentSpec:
    width_px: int
    height_px: int
    lines: tuple
    scale: int = 1
    quality: int = 75
    seed: int = 0
    margin_top: int = 16
    margin_left: int = 16


@dataclass(frozen=True)
class LineTruth:
    ink_top_px: int
    ink_bottom_px: int


@dataclass(frozen=True)
class GroundTruth:
    lines: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.lines)

    def to_text(self) -> str:
        return "".join(f"{t.ink_top_px} {t.ink_bottom_px}\n" for t in self.lines)

    @classmethod
    def from_text(cls, text: str) -> GroundTruth:
        lines = []
        for n, raw in enumerate(text.splitlines(), 1):
            raw = raw.strip()
            if not raw:
                continue
            parts = raw.split()
            if len(parts) != 2:
                raise ValueError(f"ground truth line {n}: expected 'top_px bottom_px'")
            lines.append(LineTruth(int(parts[0]), int(parts[1])))
        return cls(tuple(lines))


def render_document(spec: DocumentSpec) -> tuple[PixelImage, GroundTruth]:
    """Render black-on-white text lines; consecutive ink extents are ``gap_after`` rows apart."""
    if spec.scale < 1:
        raise ValueError("scale must be >= 1")
    page = np.full((spec.height_px, spec.width_px), 255, dtype=np.uint8)
    truth = []
    y = spec.margin_top
    for k, line in enumerate(spec.lines):
        if line.gap_after < 0:
            raise ValueError("gap must be >= 0")
        mask = render_text(line.text, spec.scale)
        rows = np.flatnonzero(mask.any(axis=1))
        if len(rows) == 0:
            raise ValueError(f"line {k} has no ink")
        mask = mask[rows[0]:rows[-1] + 1]
        h, w = mask.shape
        if y + h > spec.height_px or spec.margin_left + w > spec.width_px:
            raise Overflow(f"line {k} does not fit a {spec.width_px}x{spec.height_px} page")
        region = page[y:y + h, spec.margin_left:spec.margin_left + w]
        region[mask] = 0
        truth.append(LineTruth(y, y + h - 1))
        y += h + line.gap_after
    return PixelImage.from_array(page), GroundTruth(tuple(truth))


def random_text(rng: np.random.Generator, n_chars: int) -> str:
    """Prose-like words over [A-Za-z ], exactly ``n_chars`` long, no leading/trailing space."""
    words = []
    length = 0
    while length < n_chars:
        wl = int(rng.integers(2, 9))
        letters = rng.choice(list(_LETTERS), size=wl, p=_FREQ)
        word = "".join(letters)
        if rng.random() < 0.2:
            word = word[0].upper() + word[1:]
        words.append(word)
        length += wl + 1
    text = " ".join(words)[:n_chars].rstrip()
    return text if text else "o"


@dataclass(frozen=True)
class CorpusConfig:
    n_per_tier: int = 10
    tiers: tuple = (1, 2, 3)
    gaps: tuple = (0, 4, 8, 16, 24)  # multiplied by the tier scale
    quality: int = 75
    seed: int = 0
    lines_per_page: tuple = (24, 34)  # inclusive range
    chars_per_line: int = 76
    margin: int = 96  # multiplied by the tier scale; tier 1 is roughly an A4 page at 96 dpi
    require_zero_gap: bool = False

    def __post_init__(self):
        if self.n_per_tier < 0:
            raise ValueError("n_per_tier must be >= 0")
        if not self.tiers or any(int(t) < 1 for t in self.tiers):
            raise ValueError("tiers must be integers >= 1")
        if not self.gaps or any(g < 0 for g in self.gaps):
            raise ValueError("gaps must be >= 0")
        if self.require_zero_gap and 0 not in self.gaps:
            raise ValueError("require_zero_gap needs 0 among the gaps")
        lo, hi = self.lines_per_page
        if not 2 <= lo <= hi:
            raise ValueError("lines_per_page must be an increasing range starting at >= 2")
        if not 1 <= self.quality <= 100:
            raise ValueError("quality must lie in [1, 100]")


def document_spec(config: CorpusConfig, tier: int, index: int) -> DocumentSpec:
    """Deterministic page layout for one corpus slot."""
    rng = np.random.default_rng([config.seed, tier, index])
    s = tier
    n_lines = int(rng.integers(config.lines_per_page[0], config.lines_per_page[1] + 1))
    gaps = [int(g) * s for g in rng.choice(config.gaps, size=n_lines - 1)]
    if config.require_zero_gap and 0 not in gaps:
        gaps[int(rng.integers(0, len(gaps)))] = 0
    lines = []
    for k in range(n_lines):
        n_chars = int(rng.integers(config.chars_per_line * 6 // 10, config.chars_per_line + 1))
        gap = gaps[k] if k < len(gaps) else 0
        lines.append(LineSpec(random_text(rng, n_chars), gap))
    margin_top = config.margin * s + int(rng.integers(0, 8))
    margin_bottom = config.margin * s + int(rng.integers(0, 8))
    width = 2 * config.margin * s + config.chars_per_line * CELL_W * s
    content = sum(16 * s + g for g in gaps) + 16 * s
    return DocumentSpec(width, margin_top + content + margin_bottom, tuple(lines), s, config.quality,
                        config.seed, margin_top, config.margin * s)


@dataclass(frozen=True)
class ManifestEntry:
    jpeg_path: Path
    gt_path: Path
    scale_tier: int


def write_pgm(path, img: PixelImage):
    header = f"P5\n{img.width_px} {img.height_px}\n255\n".encode()
    Path(path).write_bytes(header + img.samples.tobytes())


def read_pgm(path) -> PixelImage:
    data = Path(path).read_bytes()
    parts = []
    pos = 0
    while len(parts) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        parts.append(data[pos:end])
        pos = end
    if parts[0] != b"P5" or int(parts[3]) != 255:
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    w, h = int(parts[1]), int(parts[2])
    raw = np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    return PixelImage(w, h, raw)


def generate_corpus(config: CorpusConfig, out_dir, dump_pgm: bool = False) -> Path:
    """Write JPEG pages, ground-truth sidecars and ``manifest.txt``; return the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for tier in config.tiers:
        tier_dir = out_dir / f"tier{tier}"
        tier_dir.mkdir(exist_ok=True)
        for i in range(config.n_per_tier):
            spec = document_spec(config, tier, i)
            img, truth = render_document(spec)
            stem = tier_dir / f"doc{i:03d}"
            jpg, gt = stem.with_suffix(".jpg"), stem.with_suffix(".gt.txt")
            try:
                jpg.write_bytes(encode_jpeg_grayscale(img, spec.quality))
                gt.write_text(truth.to_text())
                if dump_pgm:
                    write_pgm(stem.with_suffix(".pgm"), img)
            except OSError as exc:
                raise OSError(f"{stem}: {exc}") from exc
            rows.append(f"{jpg.relative_to(out_dir)} {gt.relative_to(out_dir)} {tier}\n")
            log.debug("wrote %s (%d lines)", jpg, len(truth))
    manifest = out_dir / "manifest.txt"
    manifest.write_text("".join(rows))
    return manifest


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    base = path.parent
    entries = []
    for n, raw in enumerate(path.read_text().splitlines(), 1):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{n}: expected 'jpeg_path gt_path scale_tier'")
        entries.append(ManifestEntry(base / parts[0], base / parts[1], int(parts[2])))
    return entries
