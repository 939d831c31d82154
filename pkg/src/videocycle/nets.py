"""Network definitions for the translation graph.

Six networks make up the temporal model: two generators (each mapping a pair
of consecutive frames between domains), two per-frame discriminators, and two
temporal discriminators that judge pairs of consecutive frames. The
single-frame baseline reuses the same classes with ``frames=1``.

Frames are tensors of shape (3, H, W) with values in [-1, 1]; a frame pair is
stacked channel-wise to (6, H, W) wherever a network consumes or emits two
frames at once.
"""

from __future__ import annotations

from typing import NamedTuple

import torch
import torch.nn as nn


class FramePair(NamedTuple):
    """Two consecutive frames. `earlier` precedes `later` in time."""

    earlier: torch.Tensor
    later: torch.Tensor

    def stacked(self) -> torch.Tensor:
        if self.earlier.shape != self.later.shape:
            raise ValueError(
                f"frame pair shapes differ: {tuple(self.earlier.shape)} vs "
                f"{tuple(self.later.shape)}"
            )
        return torch.cat([self.earlier, self.later], dim=-3)


class ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels, affine=True),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels, affine=True),
        )

    def forward(self, x):
        return x + self.body(x)


class Generator(nn.Module):
    """Encoder / residual core / decoder translator with a tanh head.

    `frames` stacked RGB frames go in and the same number come out, so the
    input and output layers carry ``3 * frames`` channels. Two stride-2
    stages require spatial dims divisible by 4.
    """

    def __init__(self, frames: int = 2, base_width: int = 64, res_blocks: int = 8):
        super().__init__()
        if frames not in (1, 2):
            raise ValueError(f"frames must be 1 or 2, got {frames}")
        self.frames = frames
        self.base_width = base_width
        self.res_blocks = res_blocks
        io_ch = 3 * frames
        w = base_width

        layers: list[nn.Module] = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(io_ch, w, 7),
            nn.InstanceNorm2d(w, affine=True),
            nn.ReLU(inplace=True),
        ]
        for _ in range(2):
            layers += [
                nn.Conv2d(w, w * 2, 3, stride=2, padding=1),
                nn.InstanceNorm2d(w * 2, affine=True),
                nn.ReLU(inplace=True),
            ]
            w *= 2
        layers += [ResidualBlock(w) for _ in range(res_blocks)]
        for _ in range(2):
            layers += [
                nn.ConvTranspose2d(w, w // 2, 3, stride=2, padding=1, output_padding=1),
                nn.InstanceNorm2d(w // 2, affine=True),
                nn.ReLU(inplace=True),
            ]
            w //= 2
        layers += [
            nn.ReflectionPad2d(3),
            nn.Conv2d(w, io_ch, 7),
            nn.Tanh(),
        ]
        self.model = nn.Sequential(*layers)

    @property
    def in_channels(self) -> int:
        return 3 * self.frames

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-3] != self.in_channels:
            raise ValueError(
                f"expected {self.in_channels} input channels, got {x.shape[-3]}"
            )
        if x.shape[-2] % 4 != 0 or x.shape[-1] % 4 != 0:
            raise ValueError(
                f"spatial dims must be divisible by 4, got {tuple(x.shape[-2:])}"
            )
        return self.model(x)


class Discriminator(nn.Module):
    """Stride-2 convolutional stack deep enough that every output unit sees
    the complete input image, ending in a raw single-channel score map.

    `in_channels` is 3 for per-frame discriminators and 6 for temporal ones.
    """

    KERNEL = 4

    def __init__(self, in_channels: int = 3, image_size: int = 256, base_width: int = 64):
        super().__init__()
        self.in_channels = in_channels
        self.image_size = image_size
        self.base_width = base_width

        n_down = num_downsample_layers(image_size)
        specs = [(self.KERNEL, 2)] * n_down + [(self.KERNEL, 1)]
        self.layer_specs = specs

        layers: list[nn.Module] = []
        c_in = in_channels
        for i in range(n_down):
            c_out = base_width * min(2**i, 8)
            layers.append(nn.Conv2d(c_in, c_out, self.KERNEL, stride=2, padding=1))
            if i > 0:
                layers.append(nn.InstanceNorm2d(c_out, affine=True))
            layers.append(nn.LeakyReLU(0.2, inplace=True))
            c_in = c_out
        layers.append(nn.Conv2d(c_in, 1, self.KERNEL, stride=1, padding=1))
        self.model = nn.Sequential(*layers)

    def receptive_field(self) -> int:
        return receptive_field(self.layer_specs)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-3] != self.in_channels:
            raise ValueError(
                f"expected {self.in_channels} input channels, got {x.shape[-3]}"
            )
        return self.model(x)


def receptive_field(layer_specs: list[tuple[int, int]]) -> int:
    """Receptive field of one output unit for a (kernel, stride) stack."""
    rf, jump = 1, 1
    for kernel, stride in layer_specs:
        rf += (kernel - 1) * jump
        jump *= stride
    return rf


def num_downsample_layers(image_size: int, minimum: int = 2) -> int:
    """Smallest number of stride-2 layers so the stack (plus its stride-1
    head) covers `image_size` pixels."""
    n = minimum
    while receptive_field([(4, 2)] * n + [(4, 1)]) < image_size:
        n += 1
    return n


def init_weights(module: nn.Module, seed: int) -> None:
    """Gaussian(0, 0.02) conv weights, zero biases, identity norm affines."""
    gen = torch.Generator().manual_seed(seed & 0x7FFFFFFFFFFFFFFF)
    with torch.no_grad():
        for m in module.modules():
            if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
                m.weight.normal_(0.0, 0.02, generator=gen)
                if m.bias is not None:
                    m.bias.zero_()
            elif isinstance(m, nn.InstanceNorm2d) and m.affine:
                m.weight.fill_(1.0)
                m.bias.zero_()


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def generator_forward(gen: Generator, pair: FramePair) -> FramePair:
    """Run a two-frame generator on a frame pair.

    The `later` frame of the result is the frame of interest. Pure function
    of the parameters and input.
    """
    if gen.frames != 2:
        raise ValueError("generator_forward needs a two-frame generator")
    x = pair.stacked()
    batched = x.dim() == 4
    if not batched:
        x = x.unsqueeze(0)
    y = gen(x)
    if not batched:
        y = y.squeeze(0)
    return FramePair(earlier=y[..., :3, :, :], later=y[..., 3:, :, :])


def discriminator_forward(disc: Discriminator, inputs) -> torch.Tensor:
    """Score a frame (3ch) or frame pair (6ch) with a discriminator."""
    x = inputs.stacked() if isinstance(inputs, FramePair) else inputs
    batched = x.dim() == 4
    if not batched:
        x = x.unsqueeze(0)
    out = disc(x)
    return out if batched else out.squeeze(0)


TEMPORAL_NET_NAMES = ("G", "F", "D_X", "D_Y", "D_TX", "D_TY")
BASELINE_NET_NAMES = ("G", "F", "D_X", "D_Y")


def build_temporal_nets(
    image_size: int, base_width: int, res_blocks: int, seed: int
) -> dict[str, nn.Module]:
    """The six networks of the temporal model, deterministically initialized."""
    from .rng import derive_seed

    nets: dict[str, nn.Module] = {
        "G": Generator(frames=2, base_width=base_width, res_blocks=res_blocks),
        "F": Generator(frames=2, base_width=base_width, res_blocks=res_blocks),
        "D_X": Discriminator(3, image_size, base_width),
        "D_Y": Discriminator(3, image_size, base_width),
        "D_TX": Discriminator(6, image_size, base_width),
        "D_TY": Discriminator(6, image_size, base_width),
    }
    for name, net in nets.items():
        init_weights(net, derive_seed(seed, "init", name))
    return nets


def build_baseline_nets(
    image_size: int, base_width: int, res_blocks: int, seed: int
) -> dict[str, nn.Module]:
    """Single-frame generators and per-frame discriminators only."""
    from .rng import derive_seed

    nets: dict[str, nn.Module] = {
        "G": Generator(frames=1, base_width=base_width, res_blocks=res_blocks),
        "F": Generator(frames=1, base_width=base_width, res_blocks=res_blocks),
        "D_X": Discriminator(3, image_size, base_width),
        "D_Y": Discriminator(3, image_size, base_width),
    }
    for name, net in nets.items():
        init_weights(net, derive_seed(seed, "init", name))
    return nets
