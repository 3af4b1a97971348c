"""Text-line boundaries from DCT coefficients.

Both compressed-domain strategies start from the DC projection profile and
one separator candidate per pair of neighbouring text regions, then refine
the boundary inside the band of block rows strictly between the two
regions' peak rows:

* partial decompression inverse-transforms only that band and cuts at the
  middle of the widest blank pixel-row run;
* the AC strategy reads F10/F11 of the band's blocks and never leaves the
  coefficient domain.

``baseline_pixel_segment`` is the full-decompression reference.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockCategory, ClassifierParams, classify_blocks
from .codec import CoefficientImage, PixelImage, decode_pixels, parse_jpeg
from .dct import idct_row_ink
from .profile import (SeparatorCandidate, build_dc_profile, candidate_separators,
                      detect_text_regions, outer_extent)

INK_LEVEL = 128
_TOP, _BOTTOM, _FULL = int(BlockCategory.TOP_INK), int(BlockCategory.BOTTOM_INK), int(BlockCategory.FULL_INK)


class Strategy(str, enum.Enum):
    PARTIAL_DECOMPRESSION = "partial"
    AC_COEFFICIENTS = "ac"
    PIXEL_BASELINE = "pixel"


class Precision(str, enum.Enum):
    PIXEL = "pixel"
    BLOCK = "block"


class DegenerateBand(ValueError):
    """The peak rows of the two regions are adjacent; there is nothing to decompress."""


@dataclass(frozen=True)
class SegmentParams:
    threshold: float = 0.05  # profile activity floor, fraction of the profile maximum
    valley_ratio: float = 0.6
    tall_ratio: float | None = 1.7
    min_peak_ratio: float = 0.25
    classifier: ClassifierParams = field(default_factory=ClassifierParams)
    pixel_noise_floor: int = 0  # baseline: rows with more ink pixels than this are text

    def __post_init__(self):
        if not 0 <= self.threshold < 1:
            raise ValueError("threshold must lie in [0, 1)")
        if not 0 <= self.valley_ratio < 1:
            raise ValueError("valley_ratio must lie in [0, 1)")
        if self.pixel_noise_floor < 0:
            raise ValueError("pixel_noise_floor must be >= 0")


@dataclass(frozen=True)
class TextLine:
    top_px: int
    bottom_px: int
    precision: Precision
    strategy: Strategy

    @property
    def height(self) -> int:
        return self.bottom_px - self.top_px + 1


@dataclass(frozen=True)
class SegmentationResult:
    lines: tuple
    width_px: int
    height_px: int
    strategy: Strategy
    timing_ns: int = 0
    idct_blocks: int = 0

    def __len__(self):
        return len(self.lines)

    def extents(self):
        return [(ln.top_px, ln.bottom_px) for ln in self.lines]

    def to_record(self, file=None, end_to_end_ns=None) -> dict:
        return {
            "file": None if file is None else str(file),
            "strategy": self.strategy.value,
            "lines": [{"top_px": ln.top_px, "bottom_px": ln.bottom_px, "precision": ln.precision.value}
                      for ln in self.lines],
            "timing_ns": {"stage": self.timing_ns, "end_to_end": end_to_end_ns},
        }

    def to_json(self, file=None, end_to_end_ns=None) -> str:
        return json.dumps(self.to_record(file, end_to_end_ns), indent=2)


def _band(cand: SeparatorCandidate):
    return cand.above.peak_block_row + 1, cand.below.peak_block_row - 1


def _band_ink_rows(ci: CoefficientImage, block_rows):
    """Ink pixels per pixel row of the given block rows, and the number of blocks inverse-transformed.

    Blocks without AC terms are flat tiles of value floor(DC / 8 + 128.5),
    which is ink exactly when DC < -4, so only the remaining blocks go
    through the IDCT.
    """
    block_rows = np.asarray(block_rows, dtype=np.intp)
    bw = ci.blocks_wide
    q = ci.quant_table.as_array()
    textured = ci.has_ac[block_rows]
    cols = np.clip(ci.width_px - 8 * np.arange(bw), 0, 8)  # in-image pixel columns per block column
    flat_dark = ~textured & (ci.dc[block_rows] * int(q[0]) < -4)
    ink = np.empty((len(block_rows), 8), dtype=np.int64)
    ink[:] = (flat_dark @ cols)[:, None]
    r_idx, c_idx = np.nonzero(textured)
    if len(r_idx):
        deq = ci.coef[block_rows[r_idx], c_idx] * q.astype(np.float64)
        per_row = idct_row_ink(deq, INK_LEVEL, cols[c_idx] if cols[-1] < 8 else None)
        starts = np.flatnonzero(np.diff(r_idx, prepend=-1))
        ink[r_idx[starts]] += np.add.reduceat(per_row, starts, axis=0)
    return ink.reshape(-1), len(r_idx)


def _nearest(candidates, target):
    """Element of ``candidates`` closest to ``target``; the earliest one on ties."""
    return min(candidates, key=lambda c: abs(c - target))


def _boundary_from_ink(ink, top_px, centre):
    """Middle of the widest zero-ink run, else the least-inked row; ties go nearest ``centre``."""
    best_width = 0
    mids = []
    run_start = None
    for i, v in enumerate(ink + [1]):
        if v == 0:
            if run_start is None:
                run_start = i
            continue
        if run_start is not None:
            width = i - run_start
            if width > best_width:
                best_width, mids = width, []
            if width == best_width:
                mids.append(top_px + (run_start + i - 1) // 2)
            run_start = None
    if mids:
        return _nearest(mids, centre)
    least = min(ink)
    return _nearest([top_px + i for i, v in enumerate(ink) if v == least], centre)


def refine_partial_decompression(ci: CoefficientImage, cand: SeparatorCandidate) -> int:
    """Pixel row that ends the upper line, from the decompressed peak-to-peak band."""
    return _refine_partial_all(ci, [cand])[0][0]


def _refine_partial_all(ci, cands):
    """[(boundary pixel row, blocks inverse-transformed)] for every candidate.

    All bands go through one batched inverse transform; consecutive bands
    never overlap because each ends before the next region's peak.
    """
    bands = [_band(c) for c in cands]
    for (first, last) in bands:
        if first > last:
            raise DegenerateBand(f"peaks at block rows {first - 1} and {last + 1} are adjacent")
    rows = np.array([r for f, l in bands for r in range(f, l + 1)], dtype=np.intp)
    ink, _ = _band_ink_rows(ci, rows)
    ink = ink.tolist()
    textured_per_row = ci.has_ac[rows].sum(axis=1).tolist()
    out = []
    offset = 0
    for cand, (first, last) in zip(cands, bands):
        n = last - first + 1
        band_ink = ink[offset * 8:(offset + n) * 8]
        n_idct = sum(textured_per_row[offset:offset + n])
        offset += n
        top_px = first * 8
        # a boundary must leave at least one row for the line below
        band_ink = band_ink[:min(len(band_ink), ci.height_px - 1 - top_px)]
        out.append((_boundary_from_ink(band_ink, top_px, cand.mid_block_row * 8 + 4), n_idct))
    return out


def _split_gap(above, below, inked, first_row, mid_row):
    """Cut the gap rows where the fewest block votes are overruled, then trim blank rows.

    Ascenders and descenders stay attached to their own line, so when the gap
    holds an all-Empty row only cuts through such rows are considered.  With
    consistent votes (every upper-leaning row above every lower-leaning row)
    the result is the last upper-leaning and the first lower-leaning row.
    Returns (last upper row, first lower row), either None when that side
    gets no inked row.
    """
    n = len(above)
    if not any(inked):
        return None, None
    restricted = not all(inked)
    twice_target = 2 * (mid_row - first_row) + 1
    # cut j: rows [0, j) join the upper line, rows [j, n) the lower one
    up, down = 0, sum(above)
    best_j, best_key = 0, None
    for j in range(n + 1):
        if not restricted or (j < n and not inked[j]):
            key = (up + down, abs(2 * j - twice_target))
            if best_key is None or key < best_key:
                best_j, best_key = j, key
        if j < n:
            up += below[j]
            down -= above[j]
    last_up = first_down = None
    for i in range(n):
        if inked[i]:
            if i < best_j:
                last_up = first_row + i
            elif first_down is None:
                first_down = first_row + i
    return last_up, first_down


def refine_ac(ci: CoefficientImage, cand: SeparatorCandidate,
              params: ClassifierParams | None = None) -> tuple[int, int]:
    """(last block row of the upper line, first block row of the lower line) from F10/F11 alone.

    Each non-empty block in the gap rows leans to the upper line (ink on top:
    a descender, or spread ink at or above the mid block row) or to the lower
    line (ink at the bottom: an ascender, or spread ink below the mid row).
    """
    return _refine_ac_all(ci, [cand], params or ClassifierParams())[0]


def _refine_ac_all(ci, cands, params):
    """refine_ac for every candidate, classifying all gap rows in one pass."""
    spans = [(c.above.bottom_block_row + 1, c.below.top_block_row - 1) for c in cands]
    sizes = [max(0, hi - lo + 1) for lo, hi in spans]
    out = [(c.above.bottom_block_row, c.below.top_block_row) for c in cands]
    if not sum(sizes):
        return out
    rows = np.array([r for lo, hi in spans for r in range(lo, hi + 1)], dtype=np.intp)
    # no AC energy means Empty, so only textured blocks need classifying
    r_idx, c_idx = np.nonzero(ci.has_ac[rows])
    cats = classify_blocks(ci.coef[rows[r_idx], c_idx] * ci.quant_table.as_array(), params, ci.quant_table)
    n = len(rows)
    top = np.bincount(r_idx[cats == _TOP], minlength=n)
    bottom = np.bincount(r_idx[cats == _BOTTOM], minlength=n)
    spread = np.bincount(r_idx[cats >= _FULL], minlength=n)
    # spread ink votes for the line on its side of the mid row
    upper_half = rows <= np.repeat([c.mid_block_row for c in cands], sizes)
    above = (top + spread * upper_half).tolist()
    below = (bottom + spread * ~upper_half).tolist()
    inked = ((top + bottom + spread) > 0).tolist()
    offset = 0
    for k, (cand, (first, _), size) in enumerate(zip(cands, spans, sizes)):
        if size and any(inked[offset:offset + size]):
            up, down = _split_gap(above[offset:offset + size], below[offset:offset + size],
                                  inked[offset:offset + size], first, cand.mid_block_row)
            a, b = out[k]
            out[k] = (a if up is None else up, b if down is None else down)
        offset += size
    return out


def _clip(v, hi):
    return 0 if v < 0 else (hi if v > hi else int(v))


_DEFAULT_PARAMS = SegmentParams()


def segment(ci: CoefficientImage, strategy=Strategy.AC_COEFFICIENTS,
            params: SegmentParams | None = None) -> SegmentationResult:
    """Run the compressed-domain pipeline; timing covers everything after entropy decoding."""
    strategy = Strategy(strategy)
    if strategy is Strategy.PIXEL_BASELINE:
        return baseline_pixel_segment(ci, params)
    params = params or _DEFAULT_PARAMS
    t0 = time.perf_counter_ns()
    profile = build_dc_profile(ci)
    regions = detect_text_regions(profile, params.threshold, params.valley_ratio, params.tall_ratio,
                                  params.min_peak_ratio)
    cands = candidate_separators(regions)
    h_max = ci.height_px - 1
    lines = []
    idct_blocks = 0
    if regions:
        first_row, last_row = outer_extent(profile, regions)
        top = _clip(first_row * 8, h_max)
        bottom_last = _clip(last_row * 8 + 7, h_max)
        if strategy is Strategy.PARTIAL_DECOMPRESSION:
            prec = Precision.PIXEL
            ok = [c for c in cands if _band(c)[0] <= _band(c)[1]]
            refined = dict(zip((c.above_index for c in ok), _refine_partial_all(ci, ok)))
            for cand in cands:
                if cand.above_index in refined:
                    b, n_idct = refined[cand.above_index]
                    idct_blocks += n_idct
                else:  # DegenerateBand: fall back to the block boundary between the regions
                    b = cand.above.bottom_block_row * 8 + 7
                b = _clip(b, h_max - 1)
                lines.append(TextLine(top, max(b, top), prec, strategy))
                top = max(b, top) + 1
            lines.append(TextLine(top, max(bottom_last, top), prec, strategy))
        else:
            prec = Precision.BLOCK
            for above_bottom, below_top in _refine_ac_all(ci, cands, params.classifier):
                end = _clip(above_bottom * 8 + 7, h_max)
                lines.append(TextLine(top, max(end, top), prec, strategy))
                top = max(_clip(below_top * 8, h_max), lines[-1].bottom_px + 1)
            lines.append(TextLine(min(top, h_max), max(bottom_last, min(top, h_max)), prec, strategy))
    elapsed = time.perf_counter_ns() - t0
    return SegmentationResult(tuple(lines), ci.width_px, ci.height_px, strategy, elapsed, idct_blocks)


def pixel_row_lines(ink_rows: np.ndarray, noise_floor: int = 0):
    """Maximal runs of pixel rows whose ink count exceeds ``noise_floor``."""
    mask = np.asarray(ink_rows) > noise_floor
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(edges[::2].tolist(), (edges[1::2] - 1).tolist()))


def baseline_pixel_segment(ci: CoefficientImage, params: SegmentParams | None = None) -> SegmentationResult:
    """Decompress everything, binarize at 128 and take runs of inked pixel rows."""
    params = params or _DEFAULT_PARAMS
    t0 = time.perf_counter_ns()
    img = decode_pixels(ci)
    ink = np.count_nonzero(img.samples < INK_LEVEL, axis=1)
    spans = pixel_row_lines(ink, params.pixel_noise_floor)
    lines = tuple(TextLine(s, e, Precision.PIXEL, Strategy.PIXEL_BASELINE) for s, e in spans)
    elapsed = time.perf_counter_ns() - t0
    return SegmentationResult(lines, ci.width_px, ci.height_px, Strategy.PIXEL_BASELINE, elapsed, ci.n_blocks)


def segment_bytes(data: bytes, strategy=Strategy.AC_COEFFICIENTS, params: SegmentParams | None = None):
    """Parse and segment; returns ``(result, end_to_end_ns)``."""
    t0 = time.perf_counter_ns()
    ci = parse_jpeg(data)
    result = segment(ci, strategy, params)
    return result, time.perf_counter_ns() - t0


def overlay(img: PixelImage, result: SegmentationResult) -> PixelImage:
    """Copy of ``img`` with each line's top and bottom rows drawn black."""
    out = img.samples.copy()
    for line in result.lines:
        out[line.top_px] = 0
        out[line.bottom_px] = 0
    return PixelImage.from_array(out)
