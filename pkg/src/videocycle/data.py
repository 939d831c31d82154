"""Dataset layout, frame preprocessing, triplet sampling, and augmentation.

On-disk layout: ``root/<domain>/<split>/<video_id>/%06d.png`` with 8-bit RGB
frames. In memory a frame is a float32 array of shape (3, H, W) with values
in [-1, 1].
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

FRAME_PATTERN = "%06d.png"
DEFAULT_LOAD_SIZE = 286
DEFAULT_CROP_SIZE = 256
NOMINAL_FPS = 30


def normalize(image: np.ndarray) -> np.ndarray:
    """uint8 HWC in [0, 255] -> float32 CHW in [-1, 1]. 0 maps to -1, 255 to 1."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected HWC RGB image, got shape {image.shape}")
    return (image.astype(np.float32) / 127.5 - 1.0).transpose(2, 0, 1)


def denormalize(frame: np.ndarray) -> np.ndarray:
    """float CHW in [-1, 1] -> uint8 HWC, rounding half away from zero."""
    if frame.ndim != 3 or frame.shape[0] != 3:
        raise ValueError(f"expected CHW frame, got shape {frame.shape}")
    scaled = np.clip((frame.astype(np.float64) + 1.0) * 127.5, 0.0, 255.0)
    return np.floor(scaled + 0.5).astype(np.uint8).transpose(1, 2, 0)


def read_frame(path) -> np.ndarray:
    """Load an image file as uint8 HWC RGB."""
    with Image.open(path) as img:
        if img.mode != "RGB":
            raise ValueError(f"{path}: expected RGB image, got mode {img.mode}")
        return np.asarray(img, dtype=np.uint8)


def write_frame(path, image: np.ndarray) -> None:
    Image.fromarray(image, mode="RGB").save(path)


def center_square_crop(image: np.ndarray) -> np.ndarray:
    """Centered square crop along the longer axis (width-centered for
    landscape input)."""
    h, w = image.shape[:2]
    side = min(h, w)
    y0 = (h - side) // 2
    x0 = (w - side) // 2
    return image[y0 : y0 + side, x0 : x0 + side]


def center_crop_frame(frame: np.ndarray, size: int) -> np.ndarray:
    """Centered crop of a CHW frame to size x size."""
    h, w = frame.shape[1:]
    if h < size or w < size:
        raise ValueError(f"frame {h}x{w} smaller than crop {size}")
    y0 = (h - size) // 2
    x0 = (w - size) // 2
    return frame[:, y0 : y0 + size, x0 : x0 + size]


def preprocess(image, load_size: int = DEFAULT_LOAD_SIZE) -> np.ndarray:
    """Raw RGB image -> normalized frame: center square crop, bilinear
    resize to load_size, [0,255] -> [-1,1]."""
    if isinstance(image, Image.Image):
        if image.mode != "RGB":
            raise ValueError(f"expected RGB image, got mode {image.mode}")
        image = np.asarray(image, dtype=np.uint8)
    square = center_square_crop(image)
    if square.shape[0] != load_size:
        resized = Image.fromarray(square, mode="RGB").resize(
            (load_size, load_size), Image.BILINEAR
        )
        square = np.asarray(resized, dtype=np.uint8)
    return normalize(square)


@dataclass
class VideoClip:
    video_id: str
    frame_paths: list = field(default_factory=list)

    def __len__(self):
        return len(self.frame_paths)

    def load_frames(self) -> list[np.ndarray]:
        return [normalize(read_frame(p)) for p in self.frame_paths]


@dataclass
class VideoDataset:
    root: Path
    domain: str
    split: str
    videos: list  # list[VideoClip], lexicographic by video_id
    fps: int = NOMINAL_FPS

    def __len__(self):
        return len(self.videos)


def load_split(domain_dir, split: str) -> VideoDataset:
    """Scan ``domain_dir/split`` for per-video frame directories.

    Frame files inside a video directory are sorted by name; zero-padded
    indices make that temporal order.
    """
    domain_dir = Path(domain_dir)
    split_dir = domain_dir / split
    if not split_dir.is_dir():
        raise FileNotFoundError(f"no such split directory: {split_dir}")
    videos = []
    for vid_dir in sorted(p for p in split_dir.iterdir() if p.is_dir()):
        paths = sorted(vid_dir.glob("*.png"))
        if paths:
            videos.append(VideoClip(video_id=vid_dir.name, frame_paths=paths))
    return VideoDataset(
        root=domain_dir, domain=domain_dir.name, split=split, videos=videos
    )


@dataclass
class FrameTriplet:
    """Three consecutive frames (t-2, t-1, t) from one video."""

    frames: tuple  # (Frame, Frame, Frame), CHW float32
    video_id: str = ""
    start: int = 0


def sample_triplets(frames, stride: int):
    """Consecutive-frame triplets starting at indices 0, stride, 2*stride, ...

    A start index s is kept iff s + 2 < len(frames). Videos shorter than
    three frames yield an empty list.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    n = len(frames)
    return [
        (frames[s], frames[s + 1], frames[s + 2]) for s in range(0, max(n - 2, 0), stride)
    ]


def dataset_triplets(dataset: VideoDataset, stride: int) -> list[FrameTriplet]:
    """Load every video of a split and slice it into triplets."""
    out = []
    for clip in dataset.videos:
        loaded = clip.load_frames()
        for i, trip in enumerate(sample_triplets(loaded, stride)):
            out.append(
                FrameTriplet(frames=trip, video_id=clip.video_id, start=i * stride)
            )
    return out


def augment(
    triplet: FrameTriplet, rng: np.random.Generator, crop_size: int = DEFAULT_CROP_SIZE
) -> FrameTriplet:
    """One crop window and one flip decision, applied identically to all
    three frames.

    Offsets are drawn uniformly from [0, H - crop_size] per axis (so
    [0, 30]^2 at the default 286 -> 256), then a fair flip coin. Draw order
    is fixed: row offset, column offset, flip.
    """
    h, w = triplet.frames[0].shape[1:]
    if h < crop_size or w < crop_size:
        raise ValueError(f"frames {h}x{w} smaller than crop size {crop_size}")
    oy = int(rng.integers(0, h - crop_size + 1))
    ox = int(rng.integers(0, w - crop_size + 1))
    flip = bool(rng.random() < 0.5)

    def apply(frame: np.ndarray) -> np.ndarray:
        out = frame[:, oy : oy + crop_size, ox : ox + crop_size]
        if flip:
            out = out[:, :, ::-1]
        return np.ascontiguousarray(out)

    return FrameTriplet(
        frames=tuple(apply(f) for f in triplet.frames),
        video_id=triplet.video_id,
        start=triplet.start,
    )
