import numpy as np
import pytest
import torch
from hypothesis import settings

from videocycle.data import FrameTriplet
from videocycle.trainer import TrainConfig

settings.register_profile("ci", derandomize=True, max_examples=50, deadline=None)
settings.load_profile("ci")

torch.set_num_threads(max(torch.get_num_threads(), 1))


def tiny_config(**overrides) -> TrainConfig:
    base = dict(
        image_size=16,
        load_size=16,
        width_multiplier=0.125,
        epochs=1,
        batch_size=1,
        pool_capacity=4,
        stride_x=1,
        stride_y=1,
        seed=99,
    )
    base.update(overrides)
    return TrainConfig(**base)


def random_triplets(n: int, size: int, seed: int) -> list[FrameTriplet]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        frames = tuple(
            rng.uniform(-1, 1, size=(3, size, size)).astype(np.float32) for _ in range(3)
        )
        out.append(FrameTriplet(frames=frames, video_id=f"mem_{i:03d}", start=0))
    return out


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory):
    """Synthetic smoke-preset corpus, generated once per session."""
    from videocycle import synth
    from videocycle.presets import SMOKE_SEED, SYNTH_PRESETS

    root = tmp_path_factory.mktemp("smoke_corpus")
    p = SYNTH_PRESETS["smoke"]
    for domain in ("x", "y"):
        synth.synth_generate(root, domain, SMOKE_SEED, p["videos"], p["frames"], p["size"], "train")
        synth.synth_generate(
            root, domain, SMOKE_SEED, p["test_videos"], p["test_frames"], p["size"], "test",
            first_index=p["videos"],
        )
    return root


@pytest.fixture(scope="session")
def smoke_triplets(smoke_corpus):
    from videocycle.data import dataset_triplets, load_split

    tx = dataset_triplets(load_split(smoke_corpus / "x", "train"), 1)
    ty = dataset_triplets(load_split(smoke_corpus / "y", "train"), 1)
    return tx, ty


@pytest.fixture(scope="session")
def smoke_run(smoke_triplets, tmp_path_factory):
    """One seed-pinned smoke-preset training run (with a mid-epoch checkpoint)."""
    from videocycle.presets import TRAIN_PRESETS
    from videocycle.trainer import train

    tx, ty = smoke_triplets
    out = tmp_path_factory.mktemp("smoke_run")
    cfg = TrainConfig(**TRAIN_PRESETS["smoke"], checkpoint_every=30)
    final = train(cfg, tx, ty, out)
    return cfg, out, final
