"""Temporal stability and translation quality metrics.

The flicker score of a translated sequence is the L1-averaged residual
between its frame-to-frame change and the source's frame-to-frame change:

    F = mean over t>=1 of mean |(g_t - g_{t-1}) - (x_t - x_{t-1})|

Appearance change explained by source motion costs nothing; change the
source does not explain (flicker) is penalized. Identical sequences and
constant-offset translations both score their source exactly, so the metric
isolates temporal inconsistency from static appearance change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import VideoDataset, center_crop_frame, normalize, read_frame
from .infer import load_translator, translate_frames


def flicker_residuals(source, translated) -> list[float]:
    """Per-step temporal residuals between a source and its translation."""
    if len(source) != len(translated):
        raise ValueError(
            f"length mismatch: {len(source)} source vs {len(translated)} translated frames"
        )
    if len(source) < 2:
        raise ValueError("need at least 2 frames to measure flicker")
    residuals = []
    for t in range(1, len(source)):
        if source[t].shape != translated[t].shape:
            raise ValueError("source and translated frame shapes differ")
        g_change = translated[t].astype(np.float64) - translated[t - 1].astype(np.float64)
        x_change = source[t].astype(np.float64) - source[t - 1].astype(np.float64)
        residuals.append(float(np.abs(g_change - x_change).mean()))
    return residuals


def flicker_score(source, translated) -> float:
    """Mean temporal residual of a translated sequence against its source."""
    return float(np.mean(flicker_residuals(source, translated)))


@dataclass
class FlickerReport:
    video_id: str
    model_id: str
    residuals: list = field(default_factory=list)

    @property
    def score(self) -> float:
        return float(np.mean(self.residuals))


def cycle_reconstruction_error(gen_forward, gen_backward, frames) -> float:
    """Mean L1 between inputs and their round-trip reconstructions.

    Two-frame generators slide over consecutive pairs and only the frame of
    interest (the later output) is compared. Single-frame generators
    reconstruct every frame independently.
    """
    if len(frames) < 3:
        raise ValueError("need at least 3 frames")
    with torch.no_grad():
        batch = torch.from_numpy(np.stack(frames))
        if gen_forward.frames == 2:
            pairs = torch.cat([batch[:-1], batch[1:]], dim=1)
            rec = gen_backward(gen_forward(pairs))
            err = (rec[:, 3:] - batch[1:]).abs().mean(dim=(1, 2, 3))
        else:
            rec = gen_backward(gen_forward(batch))
            err = (rec - batch).abs().mean(dim=(1, 2, 3))
    return float(err.mean())


def _load_video_frames(clip, image_size: int) -> list[np.ndarray]:
    frames = []
    for path in clip.frame_paths:
        frame = normalize(read_frame(path))
        if frame.shape[1] != image_size or frame.shape[2] != image_size:
            frame = center_crop_frame(frame, image_size)
        frames.append(frame)
    return frames


def score_checkpoint(checkpoint_path, dataset: VideoDataset, direction: str = "x2y"):
    """Per-video flicker reports for one checkpoint over a dataset split."""
    gen, meta = load_translator(checkpoint_path, direction)
    image_size = meta["config"]["image_size"]
    reports = []
    for clip in dataset.videos:
        frames = _load_video_frames(clip, image_size)
        translated = translate_frames(gen, image_size, frames)
        reports.append(
            FlickerReport(
                video_id=clip.video_id,
                model_id=meta["kind"],
                residuals=flicker_residuals(frames, translated),
            )
        )
    return reports


@dataclass
class ComparisonReport:
    """Per-video flicker for two models plus their means and ratio."""

    video_ids: list
    flicker_a: list  # first model, one score per video
    flicker_b: list  # second model
    model_a: str = "temporal"
    model_b: str = "baseline"

    @property
    def mean_a(self) -> float:
        return float(np.mean(self.flicker_a))

    @property
    def mean_b(self) -> float:
        return float(np.mean(self.flicker_b))

    @property
    def ratio(self) -> float:
        return self.mean_a / self.mean_b

    def rows(self) -> list[list]:
        out = []
        for vid, a, b in zip(self.video_ids, self.flicker_a, self.flicker_b):
            out.append([vid, repr(a), repr(b), repr(a / b)])
        out.append(["mean", repr(self.mean_a), repr(self.mean_b), repr(self.ratio)])
        return out


def compare_models(
    checkpoint_a, checkpoint_b, test_set: VideoDataset, direction: str = "x2y"
) -> ComparisonReport:
    """Score two checkpoints on the same videos.

    Both checkpoints must share the training image size so they see
    identical inputs.
    """
    from .checkpoint import load_container

    meta_a = load_container(checkpoint_a)[0]
    meta_b = load_container(checkpoint_b)[0]
    if meta_a["config"]["image_size"] != meta_b["config"]["image_size"]:
        raise ValueError("checkpoints have incompatible image sizes")
    reports_a = score_checkpoint(checkpoint_a, test_set, direction)
    reports_b = score_checkpoint(checkpoint_b, test_set, direction)
    return ComparisonReport(
        video_ids=[r.video_id for r in reports_a],
        flicker_a=[r.score for r in reports_a],
        flicker_b=[r.score for r in reports_b],
        model_a=meta_a["kind"],
        model_b=meta_b["kind"],
    )


COMPARISON_CSV_COLUMNS = ["video_id", "flicker_a", "flicker_b", "ratio"]
SINGLE_CSV_COLUMNS = ["video_id", "flicker"]


def write_comparison_csv(path, report: ComparisonReport) -> Path:
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["video_id", f"flicker_{report.model_a}", f"flicker_{report.model_b}", "ratio"]
        )
        writer.writerows(report.rows())
    return path


def write_single_csv(path, reports) -> Path:
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SINGLE_CSV_COLUMNS)
        for r in reports:
            writer.writerow([r.video_id, repr(r.score)])
        if reports:
            writer.writerow(["mean", repr(float(np.mean([r.score for r in reports])))])
    return path
