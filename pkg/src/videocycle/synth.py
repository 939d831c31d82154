"""Deterministic synthetic two-domain video corpus.

Domain ``x`` videos show flat-shaded ellipses and boxes drifting over a plain
pale background. Domain ``y`` videos follow the same motion model but with
procedural texture, smooth per-frame color jitter, and moving specular
highlights. Shape paths are sinusoidal with per-frame displacement capped at
2.5 px (at size 128, scaled linearly), so every video is temporally smooth.

Everything is derived from the master seed, so a rerun reproduces the corpus
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .data import FRAME_PATTERN, VideoDataset, load_split, write_frame
from .rng import spawn_rng

# Documented oracle bounds, valid for frame sizes 32..128: consecutive
# frames of one video differ by less than SMOOTHNESS_BOUND mean absolute
# difference (on the [0, 1] scale) while frames of different videos differ
# by more; a domain-x frame has fewer distinct RGB triples than
# distinct_color_threshold(size), a domain-y frame more.
SMOOTHNESS_BOUND = 0.05


def distinct_color_threshold(size: int) -> int:
    """Distinct-RGB-count separating flat-shaded x frames from textured y
    frames at the given frame size."""
    return size * size // 8

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

_MAX_STEP_AT_128 = 2.5  # px per frame, scales with size/128


def _value_noise(rng: np.random.Generator, size: int, cells: int) -> np.ndarray:
    """Bilinearly interpolated random grid in [0, 1], shape (size, size)."""
    grid = rng.random((cells + 1, cells + 1))
    t = (np.arange(size) + 0.5) / size * cells
    i = np.minimum(t.astype(int), cells - 1)
    f = t - i
    g00 = grid[np.ix_(i, i)]
    g01 = grid[np.ix_(i, i + 1)]
    g10 = grid[np.ix_(i + 1, i)]
    g11 = grid[np.ix_(i + 1, i + 1)]
    fy, fx = f[:, None], f[None, :]
    return g00 * (1 - fy) * (1 - fx) + g01 * (1 - fy) * fx + g10 * fy * (1 - fx) + g11 * fy * fx


class _Path:
    """Sinusoidal 2D path with bounded per-frame displacement."""

    def __init__(self, rng: np.random.Generator, size: int, max_step: float):
        self.mid = rng.uniform(0.3, 0.7, 2) * size
        self.amp = rng.uniform(0.04, 0.16, 2) * size
        f_cap = max_step / (2.0 * np.pi * self.amp)
        self.freq = f_cap * rng.uniform(0.35, 1.0, 2)
        self.phase = rng.uniform(0.0, 1.0, 2)

    def at(self, t: int) -> np.ndarray:
        return self.mid + self.amp * np.sin(2.0 * np.pi * (self.freq * t + self.phase))


class _Shape:
    def __init__(self, rng: np.random.Generator, size: int, max_step: float):
        self.kind = "ellipse" if rng.random() < 0.5 else "box"
        self.half = rng.uniform(0.10, 0.22, 2) * size
        self.path = _Path(rng, size, max_step)
        r = float(self.half.max())
        self.spin = rng.uniform(-0.5, 0.5) * max_step / r
        self.angle0 = rng.uniform(0.0, np.pi)
        self.color = np.zeros(3)

    def coverage(self, yy: np.ndarray, xx: np.ndarray, t: int) -> np.ndarray:
        cy, cx = self.path.at(t)
        ry, rx = self.half
        if self.kind == "ellipse":
            q = np.sqrt(((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2)
            d = (q - 1.0) * min(rx, ry)
        else:
            a = self.angle0 + self.spin * t
            u = (xx - cx) * np.cos(a) + (yy - cy) * np.sin(a)
            v = -(xx - cx) * np.sin(a) + (yy - cy) * np.cos(a)
            d = np.maximum(np.abs(u) - rx, np.abs(v) - ry)
        return np.clip(0.5 - d, 0.0, 1.0)


def _pick_contrasting(rng: np.random.Generator, bg: np.ndarray) -> np.ndarray:
    for _ in range(64):
        c = rng.uniform(0.12, 0.92, 3)
        if np.abs(c - bg).sum() > 0.6:
            return c
    return c


class _VideoParams:
    def __init__(self, rng: np.random.Generator, size: int, domain: str):
        max_step = _MAX_STEP_AT_128 * size / 128.0
        self.size = size
        self.domain = domain
        if domain == "x":
            self.bg = np.array([0.82, 0.80, 0.77]) + rng.uniform(-0.04, 0.04, 3)
        else:
            base = np.array([0.62, 0.30, 0.34])
            self.bg = base + rng.uniform(-0.06, 0.06, 3)
        self.shapes = [
            _Shape(rng, size, max_step) for _ in range(int(rng.integers(2, 5)))
        ]
        for shape in self.shapes:
            if domain == "x":
                shape.color = _pick_contrasting(rng, self.bg)
            else:
                shape.color = np.array(
                    [rng.uniform(0.55, 0.85), rng.uniform(0.18, 0.42), rng.uniform(0.25, 0.5)]
                )
        if domain == "y":
            cells = max(size // 8, 2)
            self.bg_noise = _value_noise(rng, size, cells)
            self.shape_noise = _value_noise(rng, size, cells)
            self.highlights = [_Path(rng, size, max_step) for _ in range(3)]
            self.highlight_sigma = 0.10 * size
            self.jitter_period = rng.uniform(8.0, 20.0, 3)
            self.jitter_phase = rng.uniform(0.0, 1.0, 3)


def _render_frame(p: _VideoParams, t: int) -> np.ndarray:
    size = p.size
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    if p.domain == "x":
        img = np.broadcast_to(p.bg, (size, size, 3)).copy()
        for shape in p.shapes:
            alpha = shape.coverage(yy, xx, t)[..., None]
            img = img * (1 - alpha) + shape.color * alpha
    else:
        tex = (0.72 + 0.56 * p.bg_noise)[..., None]
        img = p.bg * tex
        shape_tex = (0.70 + 0.60 * p.shape_noise)[..., None]
        for shape in p.shapes:
            alpha = shape.coverage(yy, xx, t)[..., None]
            img = img * (1 - alpha) + (shape.color * shape_tex) * alpha
        for hl in p.highlights:
            cy, cx = hl.at(t)
            r2 = (yy - cy) ** 2 + (xx - cx) ** 2
            glow = 0.30 * np.exp(-r2 / (2.0 * p.highlight_sigma**2))
            img = img + glow[..., None] * np.array([0.95, 0.92, 0.88])
        jitter = 0.03 * np.sin(2.0 * np.pi * (t / p.jitter_period + p.jitter_phase))
        img = img + jitter
    img = np.clip(img, 0.0, 1.0)
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def synth_generate(
    root,
    domain: str,
    seed: int,
    n_videos: int,
    frames_per_video: int,
    size: int,
    split: str = "train",
    first_index: int = 0,
) -> VideoDataset:
    """Write one domain split of the synthetic corpus and return its dataset.

    Layout: ``root/<domain>/<split>/video_%03d/%06d.png``. Same arguments,
    same bytes. `first_index` offsets the video ids so splits can carry
    globally unique names; content depends only on (seed, domain, split,
    position).
    """
    if domain not in ("x", "y"):
        raise ValueError(f"domain must be 'x' or 'y', got {domain!r}")
    if size % 4 != 0 or size < 16:
        raise ValueError(f"size must be >= 16 and divisible by 4, got {size}")
    root = Path(root)
    for v in range(n_videos):
        rng = spawn_rng(seed, "synth", domain, split, v)
        params = _VideoParams(rng, size, domain)
        vid_dir = root / domain / split / f"video_{first_index + v:03d}"
        vid_dir.mkdir(parents=True, exist_ok=True)
        for t in range(frames_per_video):
            write_frame(vid_dir / (FRAME_PATTERN % t), _render_frame(params, t))
    return load_split(root / domain, split)


def distinct_color_count(image: np.ndarray) -> int:
    """Number of distinct RGB triples in a uint8 HWC frame."""
    flat = image.reshape(-1, 3).astype(np.int64)
    packed = flat[:, 0] * 65536 + flat[:, 1] * 256 + flat[:, 2]
    return int(np.unique(packed).size)


def write_manifest(root, seed: int, params: dict) -> Path:
    """Record seed, generation parameters, and a sha256 per frame file."""
    root = Path(root)
    hashes = {}
    for path in sorted(root.rglob("*.png")):
        hashes[path.relative_to(root).as_posix()] = hashlib.sha256(
            path.read_bytes()
        ).hexdigest()
    manifest = {
        "format_version": MANIFEST_VERSION,
        "seed": seed,
        "fps": 30,
        "params": params,
        "files": hashes,
    }
    out = root / MANIFEST_NAME
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out
