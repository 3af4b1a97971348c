"""Command-line front end: segment, profile, gen, eval and bench."""

from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .blocks import ClassifierParams
from .codec import JpegError, decode_pixels, parse_jpeg
from .corpus import CorpusConfig, generate_corpus, read_manifest, write_pgm
from .evaluate import DEFAULT_IOU, bench, evaluate_corpus, write_outputs
from .profile import build_dc_profile
from .segmenter import SegmentParams, Strategy, overlay, segment_bytes

log = logging.getLogger("jpeglines")

EXIT_OK, EXIT_FILE_FAILURE, EXIT_CONFIG = 0, 1, 2

STRATEGY_CHOICES = {
    "ac": (Strategy.AC_COEFFICIENTS,),
    "partial": (Strategy.PARTIAL_DECOMPRESSION,),
    "pixel": (Strategy.PIXEL_BASELINE,),
    "both": (Strategy.PARTIAL_DECOMPRESSION, Strategy.AC_COEFFICIENTS),
    "all": (Strategy.PARTIAL_DECOMPRESSION, Strategy.AC_COEFFICIENTS, Strategy.PIXEL_BASELINE),
}


class ConfigError(ValueError):
    """Bad flags or inputs; nothing has been written."""


@dataclass
class CliConfig:
    subcommand: str
    strategies: tuple = (Strategy.AC_COEFFICIENTS,)
    params: SegmentParams = field(default_factory=SegmentParams)
    iou: float = DEFAULT_IOU
    inputs: list = field(default_factory=list)
    out: Path | None = None
    overlay: bool = False
    seed: int = 0
    corpus: CorpusConfig | None = None
    manifest: Path | None = None
    repetitions: int = 5
    end_to_end: bool = True


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jpeglines", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_params(p):
        p.add_argument("--threshold", type=float, default=0.05,
                       help="profile activity floor as a fraction of the profile maximum (default 0.05)")
        p.add_argument("--energy-threshold", type=float, default=None,
                       help="AC energy at or below which a block is empty (default (2*min q)^2)")
        p.add_argument("--dead-zone", type=float, default=0.0, help="F10/F11 magnitude dead zone (default 0)")

    p = sub.add_parser("segment", help="segment JPEG pages and print JSON results")
    p.add_argument("inputs", nargs="+", help="JPEG paths or glob patterns")
    p.add_argument("--strategy", choices=["ac", "partial", "pixel"], default="ac")
    add_params(p)
    p.add_argument("--out", type=Path, help="write <stem>.json per page here instead of standard output")
    p.add_argument("--overlay", action="store_true", help="also write <stem>.overlay.pgm (needs --out)")

    p = sub.add_parser("profile", help="dump the DC projection profile as CSV")
    p.add_argument("inputs", nargs="+", help="JPEG paths or glob patterns")
    p.add_argument("--out", type=Path, help="write <stem>.profile.csv per page here instead of standard output")

    p = sub.add_parser("gen", help="generate a synthetic corpus with ground truth")
    p.add_argument("--n", type=int, default=10, help="documents per scale tier")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tiers", type=_int_list, default=(1, 2, 3), help="scale tiers, e.g. 1,2,3")
    p.add_argument("--gaps", type=_int_list, default=(0, 4, 8, 16, 24),
                   help="inter-line gaps in pixels at scale 1")
    p.add_argument("--quality", type=int, default=75)
    p.add_argument("--zero-gap", action="store_true", help="force a touching line pair on every page")
    p.add_argument("--pgm", action="store_true", help="also dump uncompressed PGM pages")

    p = sub.add_parser("eval", help="score strategies against a manifest's ground truth")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--strategy", choices=sorted(STRATEGY_CHOICES), default="both")
    p.add_argument("--iou", type=float, default=DEFAULT_IOU, help="vertical IoU match threshold")
    add_params(p)
    p.add_argument("--out", type=Path, help="write scores.csv and summary.json here")

    p = sub.add_parser("bench", help="time the three approaches on a manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--stage-only", action="store_true", help="skip the end-to-end (from bytes) timings")
    add_params(p)
    p.add_argument("--out", type=Path, help="write summary.json here")
    return parser


def _expand(patterns):
    paths = []
    for pat in patterns:
        hits = sorted(glob.glob(pat)) if glob.has_magic(pat) else [pat]
        if not hits:
            raise ConfigError(f"no file matches {pat!r}")
        paths.extend(Path(h) for h in hits)
    for path in paths:
        if not path.is_file():
            raise ConfigError(f"{path}: no such file")
    return paths


def _check_out_dir(out):
    if out is not None and out.exists() and not out.is_dir():
        raise ConfigError(f"{out} exists and is not a directory")


def config_from_args(args) -> CliConfig:
    """Validate every flag; raises ConfigError before anything is read or written."""
    cfg = CliConfig(args.subcommand)
    try:
        if hasattr(args, "threshold"):
            classifier = ClassifierParams(args.energy_threshold, args.dead_zone)
            cfg.params = SegmentParams(threshold=args.threshold, classifier=classifier)
        if args.subcommand in ("segment", "profile"):
            cfg.inputs = _expand(args.inputs)
        if args.subcommand == "segment":
            cfg.strategies = STRATEGY_CHOICES[args.strategy]
            cfg.overlay = args.overlay
            if args.overlay and args.out is None:
                raise ConfigError("--overlay needs --out")
        if args.subcommand == "gen":
            cfg.seed = args.seed
            cfg.corpus = CorpusConfig(n_per_tier=args.n, tiers=args.tiers, gaps=args.gaps, quality=args.quality,
                                      seed=args.seed, require_zero_gap=args.zero_gap)
            cfg.overlay = args.pgm
        if args.subcommand in ("eval", "bench"):
            if not args.manifest.is_file():
                raise ConfigError(f"{args.manifest}: no such manifest")
            read_manifest(args.manifest)  # raises on a malformed manifest
            cfg.manifest = args.manifest
        if args.subcommand == "eval":
            if not 0 < args.iou <= 1:
                raise ConfigError("--iou must lie in (0, 1]")
            cfg.iou = args.iou
            cfg.strategies = STRATEGY_CHOICES[args.strategy]
        if args.subcommand == "bench":
            if args.repetitions < 3:
                raise ConfigError("--repetitions must be >= 3")
            cfg.repetitions = args.repetitions
            cfg.end_to_end = not args.stage_only
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg.out = args.out
    _check_out_dir(cfg.out)
    return cfg


def _segment(cfg: CliConfig, stdout) -> int:
    strategy = cfg.strategies[0]
    records, failed = [], 0
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
    for path in cfg.inputs:
        try:
            data = path.read_bytes()
            result, e2e = segment_bytes(data, strategy, cfg.params)
            record = result.to_record(path, e2e)
            if cfg.out is not None:
                (cfg.out / f"{path.stem}.json").write_text(json.dumps(record, indent=2))
                if cfg.overlay:
                    write_pgm(cfg.out / f"{path.stem}.overlay.pgm", overlay(decode_pixels(parse_jpeg(data)), result))
            else:
                records.append(record)
        except (OSError, JpegError) as exc:
            log.error("%s: %s", path, exc)
            failed += 1
    if cfg.out is None:
        doc = records[0] if len(cfg.inputs) == 1 and records else records
        stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_FILE_FAILURE if failed else EXIT_OK


def _profile(cfg: CliConfig, stdout) -> int:
    failed = 0
    many = len(cfg.inputs) > 1 and cfg.out is None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["file", "block_row", "value"] if many else ["block_row", "value"])
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
    for path in cfg.inputs:
        try:
            values = build_dc_profile(parse_jpeg(path.read_bytes())).values.tolist()
        except (OSError, JpegError) as exc:
            log.error("%s: %s", path, exc)
            failed += 1
            continue
        if cfg.out is not None:
            one = io.StringIO()
            cw = csv.writer(one, lineterminator="\n")
            cw.writerow(["block_row", "value"])
            cw.writerows(enumerate(values))
            (cfg.out / f"{path.stem}.profile.csv").write_text(one.getvalue())
        else:
            w.writerows([str(path), r, v] if many else [r, v] for r, v in enumerate(values))
    if cfg.out is None:
        stdout.write(buf.getvalue())
    return EXIT_FILE_FAILURE if failed else EXIT_OK


def _gen(cfg: CliConfig, stdout) -> int:
    manifest = generate_corpus(cfg.corpus, cfg.out, dump_pgm=cfg.overlay)
    stdout.write(f"{manifest}\n")
    return EXIT_OK


def _eval(cfg: CliConfig, stdout) -> int:
    report = evaluate_corpus(cfg.manifest, cfg.strategies, cfg.params, cfg.iou)
    if cfg.out is not None:
        write_outputs(cfg.out, eval_report=report)
    stdout.write(report.to_csv())
    for strategy, tiers in report.by_tier().items():
        for tier, m in tiers.items():
            p, r, f = m.table_row()
            log.info("tier %d %-8s P %.2f R %.2f F %.2f", tier, strategy, p, r, f)
    return EXIT_FILE_FAILURE if report.failures else EXIT_OK


def _bench(cfg: CliConfig, stdout) -> int:
    report = bench(cfg.manifest, cfg.repetitions, cfg.params, cfg.end_to_end)
    if cfg.out is not None:
        summary = write_outputs(cfg.out, bench_report=report)
    else:
        summary = report.summary()
    stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_FILE_FAILURE if report.failures else EXIT_OK


COMMANDS = {"segment": _segment, "profile": _profile, "gen": _gen, "eval": _eval, "bench": _bench}


def run(cfg: CliConfig, stdout=None) -> int:
    return COMMANDS[cfg.subcommand](cfg, stdout or sys.stdout)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags and 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except OSError as exc:  # e.g. an unwritable output directory
        log.error("%s", exc)
        return EXIT_FILE_FAILURE


if __name__ == "__main__":
    sys.exit(main())
