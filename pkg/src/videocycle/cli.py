"""Command-line entry point.

Subcommands: ``synth`` (generate the synthetic corpus), ``train``,
``translate``, and ``eval``. Exit codes: 0 success, 2 usage error, 1 runtime
failure. Every run logs its resolved configuration and master seed to
stderr; errors are printed with a stable ``videocycle: error:`` prefix.
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
from dataclasses import asdict
from pathlib import Path

from . import metrics, presets, synth
from .data import dataset_triplets, load_split
from .infer import translate_video
from .trainer import TrainConfig, train

log = logging.getLogger("videocycle")


class UsageError(Exception):
    pass


class ClobberError(RuntimeError):
    pass


def _prepare_out_dir(path, overwrite: bool) -> Path:
    path = Path(path)
    if path.exists() and any(path.iterdir()):
        if not overwrite:
            raise ClobberError(
                f"output directory {path} is not empty (pass --overwrite to replace it)"
            )
        shutil.rmtree(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _prepare_out_file(path, overwrite: bool) -> Path:
    path = Path(path)
    if path.exists() and not overwrite:
        raise ClobberError(f"{path} exists (pass --overwrite to replace it)")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def parse_config_file(path) -> TrainConfig:
    """Flat key = value file mirroring TrainConfig fields."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such config file: {path}")
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key in mapping:
            raise UsageError(f"{path}:{lineno}: duplicate config key: {key}")
        mapping[key] = value
    try:
        return TrainConfig.from_mapping(mapping)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_synth(args) -> int:
    base = presets.SYNTH_PRESETS[args.preset] if args.preset else dict(
        videos=5, test_videos=2, frames=12, test_frames=None, size=72
    )
    videos = args.videos if args.videos is not None else base["videos"]
    test_videos = args.test_videos if args.test_videos is not None else base["test_videos"]
    frames = args.frames if args.frames is not None else base["frames"]
    test_frames = args.test_frames if args.test_frames is not None else base["test_frames"]
    if test_frames is None:
        test_frames = frames
    size = args.size if args.size is not None else base["size"]
    out = _prepare_out_dir(args.out, args.overwrite)
    log.info("master seed: %d", args.seed)
    params = dict(
        videos=videos, test_videos=test_videos, frames=frames,
        test_frames=test_frames, size=size,
    )
    log.info("synth params: %s", params)
    for domain in ("x", "y"):
        synth.synth_generate(out, domain, args.seed, videos, frames, size, split="train")
        synth.synth_generate(
            out, domain, args.seed, test_videos, test_frames, size, split="test",
            first_index=videos,
        )
    manifest = synth.write_manifest(out, args.seed, params)
    print(manifest)
    return 0


def cmd_train(args) -> int:
    if args.smoke:
        config = TrainConfig(**presets.TRAIN_PRESETS["smoke"])
    elif args.config:
        config = parse_config_file(args.config)
    else:
        config = TrainConfig()
    if args.baseline:
        config.baseline = True
    log.info("master seed: %d", config.seed)
    log.info("config: %s", asdict(config))

    triplets_x = dataset_triplets(load_split(args.data_x, "train"), config.stride_x)
    triplets_y = dataset_triplets(load_split(args.data_y, "train"), config.stride_y)
    log.info("triplets: %d (x), %d (y)", len(triplets_x), len(triplets_y))

    if args.resume:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    else:
        out = _prepare_out_dir(args.out, args.overwrite)
    final = train(config, triplets_x, triplets_y, out, resume_from=args.resume)
    log.info("final checkpoint: %s", final)
    print(final)
    return 0


def cmd_translate(args) -> int:
    log.info(
        "config: %s",
        dict(checkpoint=args.checkpoint, in_dir=args.in_dir, direction=args.direction),
    )
    out = _prepare_out_dir(args.out, args.overwrite)
    written = translate_video(args.checkpoint, args.in_dir, out, args.direction)
    log.info("translated %d frames", len(written))
    print(f"{len(written)} frames -> {out}")
    return 0


def cmd_eval(args) -> int:
    log.info(
        "config: %s",
        dict(
            checkpoint=args.checkpoint,
            baseline=args.baseline,
            data=args.data,
            split=args.split,
            direction=args.direction,
        ),
    )
    report_path = _prepare_out_file(args.report, args.overwrite)
    dataset = load_split(args.data, args.split)
    if not dataset.videos:
        raise FileNotFoundError(f"no videos under {args.data}/{args.split}")
    log.info("scoring %d videos from %s/%s", len(dataset.videos), args.data, args.split)
    if args.baseline:
        report = metrics.compare_models(args.checkpoint, args.baseline, dataset, args.direction)
        metrics.write_comparison_csv(report_path, report)
        print(f"mean flicker {report.model_a}: {report.mean_a:.6f}")
        print(f"mean flicker {report.model_b}: {report.mean_b:.6f}")
        print(f"ratio: {report.ratio:.4f}")
    else:
        reports = metrics.score_checkpoint(args.checkpoint, dataset, args.direction)
        metrics.write_single_csv(report_path, reports)
        mean = sum(r.score for r in reports) / len(reports)
        print(f"mean flicker: {mean:.6f}")
    print(report_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videocycle",
        description="Unpaired video-to-video translation with temporal consistency.",
    )
    parser.add_argument("--log-level", default="info", choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic two-domain corpus")
    p.add_argument("--out", required=True, help="corpus root directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--preset", choices=sorted(presets.SYNTH_PRESETS), default=None)
    p.add_argument("--videos", type=int, default=None, help="training videos per domain")
    p.add_argument("--test-videos", type=int, default=None)
    p.add_argument("--frames", type=int, default=None, help="frames per training video")
    p.add_argument("--test-frames", type=int, default=None, help="frames per test video")
    p.add_argument("--size", type=int, default=None, help="frame size in pixels")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the temporal model or the baseline")
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--data-x", required=True, help="domain x directory (contains train/)")
    p.add_argument("--data-y", required=True, help="domain y directory (contains train/)")
    p.add_argument("--out", required=True)
    p.add_argument("--baseline", action="store_true", help="train the per-frame baseline")
    p.add_argument("--smoke", action="store_true", help="use the smoke preset config")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="translate a directory of frames")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="in_dir", required=True, help="directory of input PNG frames")
    p.add_argument("--out", required=True)
    p.add_argument("--direction", choices=["x2y", "y2x"], default="x2y")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("eval", help="score temporal stability of translations")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--baseline", default=None, help="second checkpoint to compare against")
    p.add_argument("--data", required=True, help="source domain directory")
    p.add_argument("--split", default="test")
    p.add_argument("--report", required=True, help="output CSV path")
    p.add_argument("--direction", choices=["x2y", "y2x"], default="x2y")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"videocycle: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"videocycle: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
