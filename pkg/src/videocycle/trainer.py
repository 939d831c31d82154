"""Training loop for the temporal model and the per-frame baseline.

One temporal step consumes a triplet (t-2, t-1, t) from each domain. Each
generator runs twice over overlapping frame pairs, so the step yields two
frames of interest per domain whose consecutive pair feeds the temporal
discriminator; reconstruction runs of the opposite generator close both
cycles. Generators update first on the joint objective, then the four
discriminators update on replay-buffered fakes with the halved objective.

With ``identity_weight > 0`` an identity term (generator applied to its own
target domain) is added to the optimized generator total; it has no report
column and defaults to off.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import torch

from . import losses as L
from .checkpoint import load_container, save_container
from .data import FrameTriplet, augment
from .nets import build_baseline_nets, build_temporal_nets
from .optim import Adam
from .rng import restore_rng, rng_state, spawn_rng

CHECKPOINT_DIR = "checkpoints"
CHECKPOINT_PATTERN = "step_%08d"
LOSS_LOG_NAME = "loss_log.csv"

KIND_TEMPORAL = "temporal"
KIND_BASELINE = "single_frame"


class TrainingDivergedError(RuntimeError):
    """A loss component became non-finite; carries the component name."""


@dataclass
class TrainConfig:
    lambda_cycle: float = 10.0
    mu_temporal: float = 10.0
    identity_weight: float = 0.0
    learning_rate: float = 1e-4
    batch_size: int = 1
    epochs: int = 60
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    image_size: int = 256
    load_size: int = 286
    width_multiplier: float = 1.0
    res_blocks: int = 8
    pool_capacity: int = 50
    stride_x: int = 120
    stride_y: int = 240
    seed: int = 0
    checkpoint_every: int = 0  # steps between checkpoints; 0 = final only
    baseline: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 or self.adam_eps <= 0:
            raise ValueError("rates must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("adam betas must lie in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.image_size % 4 != 0:
            raise ValueError("image_size must be divisible by 4")
        if self.load_size < self.image_size:
            raise ValueError("load_size must be >= image_size")
        if self.width_multiplier <= 0:
            raise ValueError("width_multiplier must be positive")
        if self.pool_capacity < 1:
            raise ValueError("pool_capacity must be >= 1")
        if self.res_blocks < 1:
            raise ValueError("res_blocks must be >= 1")

    @property
    def base_width(self) -> int:
        return max(4, int(round(64 * self.width_multiplier)))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "TrainConfig":
        """Build a config from string key/value pairs, rejecting unknown keys."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in mapping.items():
            if key not in known:
                raise ValueError(f"unknown config key: {key}")
            default = known[key].default
            if isinstance(default, bool):
                if str(raw).lower() in ("1", "true", "yes", "on"):
                    value = True
                elif str(raw).lower() in ("0", "false", "no", "off"):
                    value = False
                else:
                    raise ValueError(f"config key {key}: expected boolean, got {raw!r}")
            elif isinstance(default, int):
                value = int(raw)
            elif isinstance(default, float):
                value = float(raw)
            else:
                value = raw
            kwargs[key] = value
        return cls(**kwargs)


class ReplayBuffer:
    """Bounded history of generated samples for discriminator updates.

    Until `capacity` items have been pushed every item is stored and returned
    unchanged. Afterwards each push keeps the incoming item with p=0.5 or
    swaps it against a uniformly chosen stored one (coin first, then index).
    """

    def __init__(self, capacity: int, rng: np.random.Generator):
        self.capacity = capacity
        self.rng = rng
        self.items: list[torch.Tensor] = []

    def __len__(self):
        return len(self.items)

    def query(self, item: torch.Tensor) -> torch.Tensor:
        item = item.detach().clone()
        if len(self.items) < self.capacity:
            self.items.append(item)
            return item
        if self.rng.random() < 0.5:
            return item
        idx = int(self.rng.integers(len(self.items)))
        out = self.items[idx]
        self.items[idx] = item
        return out

    def query_many(self, batch: torch.Tensor) -> torch.Tensor:
        return torch.stack([self.query(batch[i]) for i in range(batch.shape[0])])


def _cat2(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    return torch.cat([a, b], dim=1)


def _split2(x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    return x[:, :3], x[:, 3:]


class TrainState:
    """Networks, optimizer moments, replay buffers, and counters."""

    def __init__(self, config: TrainConfig):
        self.config = config
        self.kind = KIND_BASELINE if config.baseline else KIND_TEMPORAL
        build = build_baseline_nets if config.baseline else build_temporal_nets
        self.nets = build(
            config.image_size, config.base_width, config.res_blocks, config.seed
        )
        self.opts = {
            name: Adam(
                net.parameters(),
                lr=config.learning_rate,
                beta1=config.adam_beta1,
                beta2=config.adam_beta2,
                eps=config.adam_eps,
            )
            for name, net in self.nets.items()
        }
        pool_names = ["d_x", "d_y"] if config.baseline else ["d_x", "d_y", "d_tx", "d_ty"]
        self.pools = {
            name: ReplayBuffer(config.pool_capacity, spawn_rng(config.seed, "pool", name))
            for name in pool_names
        }
        self.epoch = 0
        self.step = 0

    def save(self, path) -> Path:
        meta = {
            "kind": self.kind,
            "config": asdict(self.config),
            "epoch": self.epoch,
            "step": self.step,
            "opt_steps": {name: opt.steps for name, opt in self.opts.items()},
            "pools": {
                name: {"size": len(pool.items), "rng": rng_state(pool.rng)}
                for name, pool in self.pools.items()
            },
        }
        arrays: dict[str, np.ndarray] = {}
        for name, net in self.nets.items():
            for pname, p in net.named_parameters():
                arrays[f"net/{name}/{pname}"] = p.detach().numpy()
            steps, opt_arrays = self.opts[name].export_state()
            for key, arr in opt_arrays.items():
                arrays[f"opt/{name}/{key}"] = arr
        for name, pool in self.pools.items():
            for i, item in enumerate(pool.items):
                arrays[f"pool/{name}/{i}"] = item.numpy()
        return save_container(path, meta, arrays)

    @classmethod
    def load(cls, path) -> "TrainState":
        meta, arrays = load_container(path)
        config = TrainConfig(**meta["config"])
        state = cls(config)
        if state.kind != meta["kind"]:
            raise ValueError(f"checkpoint kind {meta['kind']!r} does not match config")
        with torch.no_grad():
            for name, net in state.nets.items():
                for pname, p in net.named_parameters():
                    key = f"net/{name}/{pname}"
                    if key not in arrays:
                        raise ValueError(f"checkpoint missing array {key}")
                    p.copy_(torch.from_numpy(arrays[key].copy()))
        for name, opt in state.opts.items():
            opt_arrays = {
                key[len(f"opt/{name}/") :]: arr
                for key, arr in arrays.items()
                if key.startswith(f"opt/{name}/")
            }
            opt.import_state(meta["opt_steps"][name], opt_arrays)
        for name, pool in state.pools.items():
            info = meta["pools"][name]
            pool.items = [
                torch.from_numpy(arrays[f"pool/{name}/{i}"].copy())
                for i in range(info["size"])
            ]
            pool.rng = restore_rng(info["rng"])
        state.epoch = int(meta["epoch"])
        state.step = int(meta["step"])
        return state


def _check_finite_scalar(name: str, value: torch.Tensor) -> None:
    if not torch.isfinite(value).all():
        raise TrainingDivergedError(f"non-finite loss component: {name}")


def _set_requires_grad(nets: dict, names, flag: bool) -> None:
    for name in names:
        for p in nets[name].parameters():
            p.requires_grad_(flag)


def _identity_term(state: "TrainState", g_target, f_target) -> torch.Tensor:
    w = state.config.identity_weight
    idt_g = (state.nets["G"](g_target) - g_target).abs().mean()
    idt_f = (state.nets["F"](f_target) - f_target).abs().mean()
    return w * (idt_g + idt_f)


def _discriminator_update(state, name, opt_name, reals, fakes) -> float:
    disc, opt = state.nets[name], state.opts[opt_name]
    opt.zero_grad()
    loss = L.lsgan_d_loss(disc(reals), disc(fakes))
    _check_finite_scalar(f"d_{name.lower()}", loss)
    loss.backward()
    opt.step()
    return float(loss.detach())


def _temporal_step_batch(state: TrainState, xb: torch.Tensor, yb: torch.Tensor, return_internals=False):
    cfg = state.config
    nets, pools = state.nets, state.pools
    G, F = nets["G"], nets["F"]
    x0, x1, x2 = xb[:, 0], xb[:, 1], xb[:, 2]
    y0, y1, y2 = yb[:, 0], yb[:, 1], yb[:, 2]

    disc_names = ("D_X", "D_Y", "D_TX", "D_TY")
    _set_requires_grad(nets, disc_names, False)
    state.opts["G"].zero_grad()
    state.opts["F"].zero_grad()

    # forward cycle: two overlapping runs of G, reconstructions by F
    fy1 = G(_cat2(x0, x1))
    fy2 = G(_cat2(x1, x2))
    fy1_e, fy1_l = _split2(fy1)
    fy2_e, fy2_l = _split2(fy2)
    rec_x1 = F(fy1)
    rec_x2 = F(fy2)

    # reverse cycle: two runs of F, reconstructions by G
    fx1 = F(_cat2(y0, y1))
    fx2 = F(_cat2(y1, y2))
    fx1_e, fx1_l = _split2(fx1)
    fx2_e, fx2_l = _split2(fx2)
    rec_y1 = G(fx1)
    rec_y2 = G(fx2)

    g_adv = 0.5 * (L.lsgan_g_loss(nets["D_Y"](fy1_l)) + L.lsgan_g_loss(nets["D_Y"](fy2_l)))
    f_adv = 0.5 * (L.lsgan_g_loss(nets["D_X"](fx1_l)) + L.lsgan_g_loss(nets["D_X"](fx2_l)))
    g_temp_adv = L.lsgan_g_loss(nets["D_TY"](_cat2(fy1_l, fy2_l)))
    f_temp_adv = L.lsgan_g_loss(nets["D_TX"](_cat2(fx1_l, fx2_l)))

    # raw (unweighted) reconstruction and matching terms, averaged over runs
    cycle_x = 0.5 * (
        (rec_x1 - _cat2(x0, x1)).abs().mean() + (rec_x2 - _cat2(x1, x2)).abs().mean()
    )
    cycle_y = 0.5 * (
        (rec_y1 - _cat2(y0, y1)).abs().mean() + (rec_y2 - _cat2(y1, y2)).abs().mean()
    )
    tm_y = 0.5 * (
        L.temporal_match_loss(fy1_l, fy2_e)
        + L.temporal_match_loss(rec_y1[:, 3:], rec_y2[:, :3])
    )
    tm_x = 0.5 * (
        L.temporal_match_loss(fx1_l, fx2_e)
        + L.temporal_match_loss(rec_x1[:, 3:], rec_x2[:, :3])
    )

    total_g, report = L.assemble_generator_objective(
        g_adv, f_adv, g_temp_adv, f_temp_adv, cycle_x, cycle_y, tm_x, tm_y,
        lam=cfg.lambda_cycle, mu=cfg.mu_temporal,
    )
    if cfg.identity_weight > 0:
        total_g = total_g + _identity_term(state, _cat2(y0, y1), _cat2(x0, x1))
    total_g.backward()
    state.opts["G"].step()
    state.opts["F"].step()
    _set_requires_grad(nets, disc_names, True)

    fake_y_frames = torch.cat([fy1_l, fy2_l]).detach()
    fake_x_frames = torch.cat([fx1_l, fx2_l]).detach()
    fake_y_pair = _cat2(fy1_l, fy2_l).detach()
    fake_x_pair = _cat2(fx1_l, fx2_l).detach()

    d_x = _discriminator_update(
        state, "D_X", "D_X", torch.cat([x1, x2]), pools["d_x"].query_many(fake_x_frames)
    )
    d_y = _discriminator_update(
        state, "D_Y", "D_Y", torch.cat([y1, y2]), pools["d_y"].query_many(fake_y_frames)
    )
    d_tx = _discriminator_update(
        state, "D_TX", "D_TX", _cat2(x1, x2), pools["d_tx"].query_many(fake_x_pair)
    )
    d_ty = _discriminator_update(
        state, "D_TY", "D_TY", _cat2(y1, y2), pools["d_ty"].query_many(fake_y_pair)
    )
    report.set_discriminators(d_x, d_y, d_tx, d_ty)

    if return_internals:
        internals = {
            "fake_y_interest": (fy1_l.detach(), fy2_l.detach()),
            "fake_x_interest": (fx1_l.detach(), fx2_l.detach()),
            "fake_y_pair": fake_y_pair,
            "fake_x_pair": fake_x_pair,
            "fy_run2_earlier": fy2_e.detach(),
        }
        return report, internals
    return report


def _baseline_step_batch(state: TrainState, x: torch.Tensor, y: torch.Tensor):
    cfg = state.config
    nets, pools = state.nets, state.pools
    G, F = nets["G"], nets["F"]

    _set_requires_grad(nets, ("D_X", "D_Y"), False)
    state.opts["G"].zero_grad()
    state.opts["F"].zero_grad()

    fy = G(x)
    rec_x = F(fy)
    fx = F(y)
    rec_y = G(fx)

    g_adv = L.lsgan_g_loss(nets["D_Y"](fy))
    f_adv = L.lsgan_g_loss(nets["D_X"](fx))
    cycle_x = (rec_x - x).abs().mean()
    cycle_y = (rec_y - y).abs().mean()

    total_g, report = L.assemble_generator_objective(
        g_adv, f_adv, 0.0, 0.0, cycle_x, cycle_y, 0.0, 0.0,
        lam=cfg.lambda_cycle, mu=cfg.mu_temporal,
    )
    if cfg.identity_weight > 0:
        total_g = total_g + _identity_term(state, y, x)
    total_g.backward()
    state.opts["G"].step()
    state.opts["F"].step()
    _set_requires_grad(nets, ("D_X", "D_Y"), True)

    d_x = _discriminator_update(
        state, "D_X", "D_X", x, pools["d_x"].query_many(fx.detach())
    )
    d_y = _discriminator_update(
        state, "D_Y", "D_Y", y, pools["d_y"].query_many(fy.detach())
    )
    report.set_discriminators(d_x, d_y)
    return report


def _triplet_to_batch(triplet: FrameTriplet) -> torch.Tensor:
    return torch.from_numpy(np.stack(triplet.frames)).unsqueeze(0)


def train_step(state: TrainState, x_triplet: FrameTriplet, y_triplet: FrameTriplet, return_internals=False):
    """One temporal training step on a pair of frame triplets."""
    if state.kind != KIND_TEMPORAL:
        raise ValueError("train_step needs a temporal TrainState")
    out = _temporal_step_batch(
        state, _triplet_to_batch(x_triplet), _triplet_to_batch(y_triplet), return_internals
    )
    state.step += 1
    return out


def train_step_baseline(state: TrainState, x_frame: np.ndarray, y_frame: np.ndarray):
    """One classic single-frame cycle step."""
    if state.kind != KIND_BASELINE:
        raise ValueError("train_step_baseline needs a baseline TrainState")
    x = torch.from_numpy(np.ascontiguousarray(x_frame)).unsqueeze(0)
    y = torch.from_numpy(np.ascontiguousarray(y_frame)).unsqueeze(0)
    report = _baseline_step_batch(state, x, y)
    state.step += 1
    return report


def checkpoint_path(out_dir, step: int) -> Path:
    return Path(out_dir) / CHECKPOINT_DIR / (CHECKPOINT_PATTERN % step)


def train(
    config: TrainConfig,
    triplets_x: list[FrameTriplet],
    triplets_y: list[FrameTriplet],
    out_dir,
    resume_from=None,
    progress=None,
) -> Path:
    """Run the epoch loop and return the final checkpoint path.

    Writes ``loss_log.csv`` (one row per step, appended when resuming) and
    ``checkpoints/step_%08d`` files under `out_dir`. Epoch shuffles and
    augmentation draws are derived from (seed, epoch, step), so a resumed run
    continues bit-identically.
    """
    if not triplets_x or not triplets_y:
        raise ValueError("empty dataset: need at least one triplet per domain")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if resume_from is not None:
        state = TrainState.load(resume_from)
        config = state.config
    else:
        state = TrainState(config)

    steps_per_epoch = min(len(triplets_x), len(triplets_y)) // config.batch_size
    if steps_per_epoch == 0:
        raise ValueError("batch_size exceeds the number of triplets per epoch")

    log_path = out_dir / LOSS_LOG_NAME
    fresh_log = not (resume_from is not None and log_path.exists())
    log_file = open(log_path, "w" if fresh_log else "a", newline="")
    writer = csv.writer(log_file)
    if fresh_log:
        writer.writerow(["step", "epoch"] + L.LossReport.field_names())

    saved_at = -1
    try:
        start_epoch = state.step // steps_per_epoch
        for epoch in range(start_epoch, config.epochs):
            order_x = spawn_rng(config.seed, "shuffle", "x", epoch).permutation(len(triplets_x))
            order_y = spawn_rng(config.seed, "shuffle", "y", epoch).permutation(len(triplets_y))
            start_step = state.step - epoch * steps_per_epoch
            for s in range(start_step, steps_per_epoch):
                rng_aug = spawn_rng(config.seed, "augment", epoch, s)
                b = config.batch_size
                xs, ys = [], []
                for i in range(b):
                    tx = triplets_x[order_x[s * b + i]]
                    ty = triplets_y[order_y[s * b + i]]
                    xs.append(augment(tx, rng_aug, config.image_size).frames)
                    ys.append(augment(ty, rng_aug, config.image_size).frames)
                xb = torch.from_numpy(np.stack([np.stack(f) for f in xs]))
                yb = torch.from_numpy(np.stack([np.stack(f) for f in ys]))

                if config.baseline:
                    report = _baseline_step_batch(state, xb[:, 2], yb[:, 2])
                else:
                    report = _temporal_step_batch(state, xb, yb)
                state.step += 1
                writer.writerow([state.step, epoch] + report.csv_row())
                if progress is not None:
                    progress(state.step, epoch, report)
                if config.checkpoint_every and state.step % config.checkpoint_every == 0:
                    state.epoch = state.step // steps_per_epoch
                    state.save(checkpoint_path(out_dir, state.step))
                    saved_at = state.step
            state.epoch = epoch + 1
            log_file.flush()
    finally:
        log_file.close()

    final = checkpoint_path(out_dir, state.step)
    if saved_at != state.step:
        state.save(final)
    return final
