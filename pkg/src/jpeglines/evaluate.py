"""Scoring against ground truth and wall-clock benchmarking of the three approaches."""

from __future__ import annotations

import csv
import gc
import io
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .codec import JpegError, parse_jpeg
from .corpus import GroundTruth, read_manifest
from .segmenter import SegmentationResult, SegmentParams, Strategy, segment

log = logging.getLogger(__name__)

DEFAULT_IOU = 0.8


def _extents(lines):
    out = []
    for ln in lines:
        if hasattr(ln, "top_px"):
            out.append((ln.top_px, ln.bottom_px))
        elif hasattr(ln, "ink_top_px"):
            out.append((ln.ink_top_px, ln.ink_bottom_px))
        else:
            out.append((int(ln[0]), int(ln[1])))
    return out


def _overlap(a, b):
    return max(0, min(a[1], b[1]) - max(a[0], b[0]) + 1)


def _ink_rows_outside(pred, gt_line, ink):
    """Rows of ``pred`` that hold some ground-truth ink but lie outside ``gt_line``."""
    total = 0
    for span in ink:
        total += _overlap(pred, span)
    return total - _overlap(pred, gt_line)


def vertical_iou(pred, gt_line, ink=None) -> float:
    """Intersection over union of two row spans.

    With ``ink`` (the list of all ground-truth spans) the union only counts
    rows that carry ground-truth ink, so blank inter-line rows included in a
    prediction cost nothing while rows of a neighbouring line do.
    """
    inter = _overlap(pred, gt_line)
    if ink is None:
        union = (pred[1] - pred[0] + 1) + (gt_line[1] - gt_line[0] + 1) - inter
    else:
        union = (gt_line[1] - gt_line[0] + 1) + _ink_rows_outside(pred, gt_line, ink)
    return inter / union if union > 0 else 0.0


@dataclass(frozen=True)
class Matching:
    pairs: tuple  # (pred index, gt index)
    n_predicted: int
    n_ground_truth: int

    @property
    def matched(self) -> int:
        return len(self.pairs)


def match_lines(pred, gt, tau: float = DEFAULT_IOU, ink_only: bool = True) -> Matching:
    """Greedy one-to-one top-to-bottom matching at vertical IoU >= ``tau``."""
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    p = _extents(getattr(pred, "lines", pred))
    g = _extents(getattr(gt, "lines", gt))
    ink = g if ink_only else None
    used = set()
    pairs = []
    for i, span in enumerate(p):
        for j, gspan in enumerate(g):
            if j in used:
                continue
            if vertical_iou(span, gspan, ink) >= tau:
                pairs.append((i, j))
                used.add(j)
                break
    return Matching(tuple(pairs), len(p), len(g))


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f_measure: float
    predicted: int
    ground_truth: int
    matched: int
    undefined: bool = False  # a zero denominator was replaced by 0

    def table_row(self) -> tuple:
        """(P, R, F) truncated to two decimals, the way the results tables print them."""
        return tuple(truncate2(v) for v in (self.precision, self.recall, self.f_measure))


def truncate2(x: float) -> float:
    return math.floor(round(x * 100, 6)) / 100


def f_measure(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def metrics_from_counts(matched: int, predicted: int, ground_truth: int) -> Metrics:
    undefined = predicted == 0 or ground_truth == 0
    p = 100.0 * matched / predicted if predicted else 0.0
    r = 100.0 * matched / ground_truth if ground_truth else 0.0
    return Metrics(p, r, f_measure(p, r), predicted, ground_truth, matched, undefined)


def compute_metrics(matching: Matching) -> Metrics:
    return metrics_from_counts(matching.matched, matching.n_predicted, matching.n_ground_truth)


def pool(metrics) -> Metrics:
    """Micro-average: pool the counts, then recompute P/R/F."""
    metrics = list(metrics)
    return metrics_from_counts(sum(m.matched for m in metrics), sum(m.predicted for m in metrics),
                               sum(m.ground_truth for m in metrics))


@dataclass
class FileScore:
    file: str
    tier: int
    strategy: str
    metrics: Metrics


@dataclass
class EvalReport:
    files: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (file, error message)

    def by_tier(self):
        """{strategy: {tier: pooled Metrics}}"""
        out = {}
        for fs in self.files:
            out.setdefault(fs.strategy, {}).setdefault(fs.tier, []).append(fs.metrics)
        return {s: {t: pool(ms) for t, ms in sorted(tiers.items())} for s, tiers in out.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["file", "tier", "strategy", "P", "R", "F"])
        for fs in self.files:
            m = fs.metrics
            w.writerow([fs.file, fs.tier, fs.strategy, f"{m.precision:.2f}", f"{m.recall:.2f}",
                        f"{m.f_measure:.2f}"])
        return buf.getvalue()

    def summary(self) -> dict:
        rows = []
        for strategy, tiers in self.by_tier().items():
            for tier, m in tiers.items():
                p, r, f = m.table_row()
                rows.append({"tier": tier, "strategy": strategy, "P": p, "R": r, "F": f,
                             "predicted": m.predicted, "ground_truth": m.ground_truth, "matched": m.matched})
        return {"accuracy": rows, "failures": [{"file": f, "error": e} for f, e in self.failures]}


def evaluate_corpus(manifest, strategies=(Strategy.PARTIAL_DECOMPRESSION, Strategy.AC_COEFFICIENTS),
                    params: SegmentParams | None = None, tau: float = DEFAULT_IOU) -> EvalReport:
    report = EvalReport()
    for entry in read_manifest(manifest):
        try:
            ci = parse_jpeg(entry.jpeg_path.read_bytes())
            gt = GroundTruth.from_text(entry.gt_path.read_text())
        except (OSError, ValueError, JpegError) as exc:
            log.error("%s: %s", entry.jpeg_path, exc)
            report.failures.append((str(entry.jpeg_path), str(exc)))
            continue
        for strategy in strategies:
            strategy = Strategy(strategy)
            result = segment(ci, strategy, params)
            m = compute_metrics(match_lines(result, gt, tau))
            report.files.append(FileScore(str(entry.jpeg_path), entry.scale_tier, strategy.value, m))
    return report


APPROACHES = (Strategy.PIXEL_BASELINE, Strategy.PARTIAL_DECOMPRESSION, Strategy.AC_COEFFICIENTS)


@dataclass
class ApproachTiming:
    stage_ns: list = field(default_factory=list)
    end_to_end_ns: list = field(default_factory=list)

    @property
    def stage_median(self) -> float:
        return statistics.median(self.stage_ns)

    @property
    def stage_mean(self) -> float:
        return statistics.fmean(self.stage_ns)

    @property
    def end_to_end_median(self) -> float:
        return statistics.median(self.end_to_end_ns) if self.end_to_end_ns else math.nan

    @property
    def end_to_end_mean(self) -> float:
        return statistics.fmean(self.end_to_end_ns) if self.end_to_end_ns else math.nan


def improvement(t_approach: float, t_baseline: float) -> float:
    """Speed-up as a percentage of the baseline time saved."""
    return 100.0 * (1.0 - t_approach / t_baseline)


@dataclass
class BenchReport:
    repetitions: int
    timings: dict = field(default_factory=dict)  # {tier: {strategy value: ApproachTiming}}
    failures: list = field(default_factory=list)

    @property
    def runs(self) -> int:
        return sum(len(t.stage_ns) for tiers in self.timings.values() for t in tiers.values())

    def tiers(self):
        return sorted(self.timings)

    def median(self, tier, strategy, boundary="stage") -> float:
        t = self.timings[tier][Strategy(strategy).value]
        return t.stage_median if boundary == "stage" else t.end_to_end_median

    def summary(self) -> dict:
        rows = []
        for tier in self.tiers():
            base = self.timings[tier].get(Strategy.PIXEL_BASELINE.value)
            for strategy, t in self.timings[tier].items():
                row = {
                    "tier": tier, "approach": strategy, "runs": len(t.stage_ns),
                    "stage_median_s": t.stage_median / 1e9, "stage_mean_s": t.stage_mean / 1e9,
                    "stage_improvement_pct": improvement(t.stage_median, base.stage_median) if base else None,
                }
                if t.end_to_end_ns:
                    row.update({
                        "end_to_end_median_s": t.end_to_end_median / 1e9,
                        "end_to_end_mean_s": t.end_to_end_mean / 1e9,
                        "end_to_end_improvement_pct": (improvement(t.end_to_end_median, base.end_to_end_median)
                                                       if base else None),
                    })
                rows.append(row)
        return {"repetitions": self.repetitions, "timing": rows,
                "failures": [{"file": f, "error": e} for f, e in self.failures]}


def _timed_run(ci, data, approach, params, end_to_end):
    """(stage ns, end-to-end ns or None), with the garbage collector paused as timeit does."""
    enabled = gc.isenabled()
    gc.disable()
    try:
        stage = segment(ci, approach, params).timing_ns
        e2e = None
        if end_to_end:
            t0 = time.perf_counter_ns()
            segment(parse_jpeg(data), approach, params)
            e2e = time.perf_counter_ns() - t0
    finally:
        if enabled:
            gc.enable()
    return stage, e2e


def bench(manifest, repetitions: int = 5, params: SegmentParams | None = None,
          end_to_end: bool = True, approaches=APPROACHES) -> BenchReport:
    """Time each approach on every manifest page, single-threaded.

    Per page, each approach gets one discarded warm-up run and then its
    repetitions back to back.
    """
    if repetitions < 3:
        raise ValueError("repetitions must be >= 3")
    report = BenchReport(repetitions)
    approaches = [Strategy(a) for a in approaches]
    for entry in read_manifest(manifest):
        try:
            data = entry.jpeg_path.read_bytes()
            ci = parse_jpeg(data)
        except (OSError, JpegError) as exc:
            log.error("%s: %s", entry.jpeg_path, exc)
            report.failures.append((str(entry.jpeg_path), str(exc)))
            continue
        tier = report.timings.setdefault(entry.scale_tier, {})
        for a in approaches:
            timing = tier.setdefault(a.value, ApproachTiming())
            segment(ci, a, params)  # warm-up
            for _ in range(repetitions):
                stage, e2e = _timed_run(ci, data, a, params, end_to_end)
                timing.stage_ns.append(stage)
                if e2e is not None:
                    timing.end_to_end_ns.append(e2e)
    return report


def write_outputs(out_dir, eval_report: EvalReport | None = None, bench_report: BenchReport | None = None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    if eval_report is not None:
        (out_dir / "scores.csv").write_text(eval_report.to_csv())
        summary.update(eval_report.summary())
    if bench_report is not None:
        summary.update(bench_report.summary())
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


__all__ = [
    "BenchReport", "EvalReport", "Matching", "Metrics", "bench", "compute_metrics", "evaluate_corpus",
    "f_measure", "improvement", "match_lines", "metrics_from_counts", "pool", "truncate2",
    "vertical_iou", "write_outputs",
]
