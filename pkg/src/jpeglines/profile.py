"""Vertical DC projection profile, text regions and mid-block separator candidates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .codec.image import CoefficientImage


@dataclass(frozen=True)
class DcProfile:
    """Per block row: summed darkness of each block's DC below the page background."""

    values: np.ndarray
    dc_background: int

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class TextRegion:
    top_block_row: int
    bottom_block_row: int
    peak_block_row: int

    @property
    def height(self) -> int:
        return self.bottom_block_row - self.top_block_row + 1


@dataclass(frozen=True)
class SeparatorCandidate:
    above_index: int
    below_index: int
    above: TextRegion
    below: TextRegion

    @property
    def gap_top_block_row(self) -> int:
        return self.above.bottom_block_row + 1

    @property
    def gap_bottom_block_row(self) -> int:
        return self.below.top_block_row - 1

    @property
    def gap_is_empty(self) -> bool:
        return self.gap_top_block_row > self.gap_bottom_block_row

    @property
    def mid_block_row(self) -> int:
        return (self.above.peak_block_row + self.below.peak_block_row) // 2


def build_dc_profile(ci: CoefficientImage) -> DcProfile:
    dc_q = ci.dc
    lo = int(dc_q.min())
    counts = np.bincount((dc_q - lo).ravel())
    # the last maximum is the lightest of the tied values
    mode_q = len(counts) - 1 - int(np.argmax(counts[::-1])) + lo
    q0 = ci.quant_table.q[0]
    darkness = np.maximum(mode_q - dc_q, 0).sum(axis=1, dtype=np.int64) * q0
    return DcProfile(darkness, int(mode_q * q0))


# The profile has one entry per block row (a few hundred at most), so the
# region logic below works on plain lists; numpy call overhead would dominate.


def _runs(mask):
    """(start, end) inclusive index pairs of True runs."""
    runs = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def _split_at_valleys(values, start, end, valley_ratio):
    """Recursively cut a run wherever a row dips below ``valley_ratio`` of both flanking maxima.

    Returns inclusive (start, end) spans; the valley row stays with the upper span.
    """
    if end - start < 2:
        return [(start, end)]
    seg = values[start:end + 1]
    n = len(seg)
    left_max = list(accumulate(seg, max))
    right_max = list(accumulate(reversed(seg), max))[::-1]
    best, best_depth = None, None
    for i in range(1, n - 1):
        depth = seg[i] / min(left_max[i - 1], right_max[i + 1])
        if best_depth is None or depth < best_depth:
            best, best_depth = i, depth
    if best_depth > valley_ratio:
        return [(start, end)]
    cut = start + best
    return (_split_at_valleys(values, start, cut, valley_ratio)
            + _split_at_valleys(values, cut + 1, end, valley_ratio))


def _median(xs):
    xs = sorted(xs)
    n = len(xs)
    return xs[n // 2] if n % 2 else (xs[n // 2 - 1] + xs[n // 2]) / 2


def _argmax(values, lo, hi):
    """Index of the first maximum of ``values[lo:hi + 1]``."""
    best = lo
    for i in range(lo + 1, hi + 1):
        if values[i] > values[best]:
            best = i
    return best


def _argmin(values, lo, hi):
    best = lo
    for i in range(lo + 1, hi + 1):
        if values[i] < values[best]:
            best = i
    return best


def _split_tall(values, spans, tall_ratio):
    """Divide spans much taller than the typical line into equal-pitch pieces.

    Cuts land on the weakest row near each equal-division point.
    """
    if len(spans) < 3:
        return spans
    typical = _median(e - s + 1 for s, e in spans)
    out = []
    for s, e in spans:
        h = e - s + 1
        parts = round(h / typical)
        if h < tall_ratio * typical or parts < 2:
            out.append((s, e))
            continue
        start = s
        for k in range(1, parts):
            target = s + k * h / parts - 1
            lo = max(start + 1, math.floor(target) - 1)
            hi = min(e - 1, math.ceil(target) + 1)
            if lo > hi:
                continue
            cut = _argmin(values, lo, hi)
            out.append((start, cut))
            start = cut + 1
        out.append((start, e))
    return out


def _merge_weak(values, spans, min_peak_ratio):
    """Fold spans whose peak is far below the typical peak into the nearer neighbour.

    Such spans are stray descender or ascender rows cut off by the threshold.
    """
    spans = list(spans)
    while len(spans) > 1:
        peaks = [max(values[s:e + 1]) for s, e in spans]
        floor = min_peak_ratio * _median(peaks)
        weak = [i for i, pk in enumerate(peaks) if pk < floor]
        if not weak:
            break
        i = min(weak, key=lambda k: peaks[k])
        up = spans[i][0] - spans[i - 1][1] if i > 0 else None
        down = spans[i + 1][0] - spans[i][1] if i + 1 < len(spans) else None
        j = i - 1 if down is None or (up is not None and up <= down) else i + 1
        lo, hi = sorted((i, j))
        spans[lo:hi + 1] = [(spans[lo][0], spans[hi][1])]
    return spans


def detect_text_regions(p: DcProfile, threshold: float = 0.05, valley_ratio: float = 0.6,
                        tall_ratio: float | None = 1.7, min_peak_ratio: float = 0.25) -> list[TextRegion]:
    """Maximal runs of block rows above ``threshold * max``, each with its peak row.

    Runs holding several lines (tight or zero spacing) are cut at profile
    valleys deeper than ``valley_ratio`` of the flanking peaks and, when
    ``tall_ratio`` is set, at equal pitch when a run is that many times taller
    than the median run.  Runs whose peak is below ``min_peak_ratio`` of the
    median peak join the nearer neighbour.  Pass ``valley_ratio=0``,
    ``tall_ratio=None`` and ``min_peak_ratio=0`` for plain run detection.
    """
    if not 0 <= threshold < 1:
        raise ValueError("threshold must lie in [0, 1)")
    values = np.asarray(p.values).tolist()
    if not values or max(values) <= 0:
        return []
    floor = threshold * max(values)
    spans = []
    for s, e in _runs([v > floor for v in values]):
        spans.extend(_split_at_valleys(values, s, e, valley_ratio))
    if min_peak_ratio > 0:
        spans = _merge_weak(values, spans, min_peak_ratio)
    if tall_ratio is not None:
        spans = _split_tall(values, spans, tall_ratio)
        if min_peak_ratio > 0:
            spans = _merge_weak(values, spans, min_peak_ratio)
    return [TextRegion(s, e, _argmax(values, s, e)) for s, e in spans]


def outer_extent(p: DcProfile, regions) -> tuple[int, int]:
    """First and last block row of the text, stretched over faint profile rows touching the outer regions.

    The stretch is capped at half the median region height.
    """
    values = p.values
    cap = max(1, int(_median(r.height for r in regions)) // 2)
    top = regions[0].top_block_row
    for _ in range(cap):
        if top == 0 or values[top - 1] <= 0:
            break
        top -= 1
    bottom = regions[-1].bottom_block_row
    for _ in range(cap):
        if bottom == len(values) - 1 or values[bottom + 1] <= 0:
            break
        bottom += 1
    return top, bottom


def candidate_separators(regions) -> list[SeparatorCandidate]:
    regions = list(regions)
    for a, b in zip(regions, regions[1:]):
        if a.bottom_block_row >= b.top_block_row:
            raise ValueError("regions must be ordered and non-overlapping")
    return [SeparatorCandidate(i, i + 1, a, b) for i, (a, b) in enumerate(zip(regions, regions[1:]))]
