"""Streaming translation of frame sequences through trained generators.

A temporal generator consumes (previous, current) frame pairs and only the
output for the current frame is emitted, so a session keeps one frame of
context. The first frame is bootstrapped by duplication. Baseline generators
translate each frame independently through the same session interface.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .checkpoint import load_container
from .data import center_crop_frame, denormalize, normalize, read_frame, write_frame
from .nets import Generator
from .trainer import KIND_BASELINE

_DIRECTION_TO_NET = {"x2y": "G", "y2x": "F"}


def load_translator(checkpoint_path, direction: str = "x2y"):
    """Load one generator from a training checkpoint.

    Returns (generator, meta). `direction` picks the X->Y or Y->X mapping.
    """
    if direction not in _DIRECTION_TO_NET:
        raise ValueError(f"direction must be 'x2y' or 'y2x', got {direction!r}")
    meta, arrays = load_container(checkpoint_path)
    config = meta["config"]
    frames = 1 if meta["kind"] == KIND_BASELINE else 2
    base_width = max(4, int(round(64 * config["width_multiplier"])))
    gen = Generator(frames=frames, base_width=base_width, res_blocks=config["res_blocks"])
    name = _DIRECTION_TO_NET[direction]
    prefix = f"net/{name}/"
    with torch.no_grad():
        for pname, p in gen.named_parameters():
            key = prefix + pname
            if key not in arrays:
                raise ValueError(f"checkpoint missing array {key}")
            p.copy_(torch.from_numpy(arrays[key].copy()))
    gen.eval()
    for p in gen.parameters():
        p.requires_grad_(False)
    return gen, meta


class StreamSession:
    """One-in-one-out frame translator holding at most one context frame."""

    def __init__(self, generator: Generator, image_size: int):
        self.generator = generator
        self.image_size = image_size
        self.previous: np.ndarray | None = None
        self.emitted = 0

    def push_frame(self, frame: np.ndarray) -> np.ndarray:
        if frame.shape != (3, self.image_size, self.image_size):
            raise ValueError(
                f"frame shape {frame.shape} does not match checkpoint size "
                f"{self.image_size}"
            )
        with torch.no_grad():
            if self.generator.frames == 1:
                x = torch.from_numpy(frame).unsqueeze(0)
                out = self.generator(x)[0]
            else:
                earlier = frame if self.previous is None else self.previous
                x = torch.from_numpy(np.concatenate([earlier, frame])).unsqueeze(0)
                out = self.generator(x)[0, 3:]
        self.previous = frame
        self.emitted += 1
        return out.numpy()


def translate_frames(generator: Generator, image_size: int, frames) -> list[np.ndarray]:
    """Translate an ordered frame sequence, one output per input."""
    session = StreamSession(generator, image_size)
    return [session.push_frame(f) for f in frames]


def translate_video(checkpoint_path, in_dir, out_dir, direction: str = "x2y") -> list[Path]:
    """Translate every PNG frame of `in_dir` into `out_dir`, keeping names.

    Frames larger than the checkpoint's training size are center-cropped to
    it; smaller frames are an error.
    """
    gen, meta = load_translator(checkpoint_path, direction)
    image_size = meta["config"]["image_size"]
    in_dir = Path(in_dir)
    paths = sorted(in_dir.glob("*.png"))
    if not paths:
        raise FileNotFoundError(f"no frames found in {in_dir}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    session = StreamSession(gen, image_size)
    written = []
    for path in paths:
        frame = normalize(read_frame(path))
        if frame.shape[1] != image_size or frame.shape[2] != image_size:
            frame = center_crop_frame(frame, image_size)
        out = session.push_frame(frame)
        out_path = out_dir / path.name
        write_frame(out_path, denormalize(out))
        written.append(out_path)
    return written
