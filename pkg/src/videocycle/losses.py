"""Scalar objectives for the adversarial training graph.

Least-squares adversarial losses (per-frame and temporal), L1 cycle
consistency, and the L1 terms that tie together frames of matching time and
domain produced by the two generator runs of a step.

All functions accept tensors of any floating dtype and reduce with plain
means, so they can be recomputed exactly by scalar loops in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import torch

from .nets import FramePair


def _as_tensor(x) -> torch.Tensor:
    return x.stacked() if isinstance(x, FramePair) else x


def _check_finite(name: str, t: torch.Tensor) -> None:
    if not torch.isfinite(t).all():
        raise ValueError(f"non-finite values in {name}")


def lsgan_d_loss(real_scores: torch.Tensor, fake_scores: torch.Tensor) -> torch.Tensor:
    """Discriminator objective, already halved: 0.5 * (mean((real-1)^2) + mean(fake^2)).

    The halving slows the discriminator relative to the generators.
    """
    _check_finite("real_scores", real_scores)
    _check_finite("fake_scores", fake_scores)
    return 0.5 * (((real_scores - 1.0) ** 2).mean() + (fake_scores**2).mean())


def lsgan_g_loss(fake_scores: torch.Tensor) -> torch.Tensor:
    """Generator objective: mean((fake - 1)^2)."""
    _check_finite("fake_scores", fake_scores)
    return ((fake_scores - 1.0) ** 2).mean()


def cycle_loss(original, reconstructed, lam: float) -> torch.Tensor:
    """Weighted reconstruction penalty: lam * mean(|original - reconstructed|).

    Accepts frames, frame pairs, or raw tensors; the mean runs over every
    element of the (stacked) input.
    """
    a, b = _as_tensor(original), _as_tensor(reconstructed)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    return lam * (a - b).abs().mean()


def temporal_match_loss(run1_later: torch.Tensor, run2_earlier: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference between two renderings of the same time step.

    The two generator runs of a step both emit a frame for time t-1; this
    term pulls the renderings together.
    """
    a, b = _as_tensor(run1_later), _as_tensor(run2_earlier)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    return (a - b).abs().mean()


@dataclass
class LossReport:
    """One training step's loss components.

    Cycle and temporal-match fields store their *weighted* values (lambda and
    mu already applied), so ``total_generators`` is the plain sum of the
    eight generator-side components and ``total_discriminators`` the plain
    sum of the four discriminator components.
    """

    g_adv: float = 0.0
    f_adv: float = 0.0
    g_temp_adv: float = 0.0
    f_temp_adv: float = 0.0
    cycle_x: float = 0.0
    cycle_y: float = 0.0
    temporal_match_x: float = 0.0
    temporal_match_y: float = 0.0
    d_x: float = 0.0
    d_y: float = 0.0
    d_tx: float = 0.0
    d_ty: float = 0.0
    total_generators: float = 0.0
    total_discriminators: float = 0.0

    GENERATOR_FIELDS = (
        "g_adv",
        "f_adv",
        "g_temp_adv",
        "f_temp_adv",
        "cycle_x",
        "cycle_y",
        "temporal_match_x",
        "temporal_match_y",
    )
    DISCRIMINATOR_FIELDS = ("d_x", "d_y", "d_tx", "d_ty")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def set_discriminators(self, d_x: float, d_y: float, d_tx: float = 0.0, d_ty: float = 0.0):
        self.d_x, self.d_y, self.d_tx, self.d_ty = (
            float(d_x),
            float(d_y),
            float(d_tx),
            float(d_ty),
        )
        self.total_discriminators = self.d_x + self.d_y + self.d_tx + self.d_ty

    def csv_row(self) -> list[str]:
        return [repr(getattr(self, name)) for name in self.field_names()]


def assemble_generator_objective(
    g_adv,
    f_adv,
    g_temp_adv,
    f_temp_adv,
    cycle_x,
    cycle_y,
    temporal_match_x,
    temporal_match_y,
    lam: float,
    mu: float,
) -> tuple[torch.Tensor, LossReport]:
    """Combine generator-side components into the step objective.

    Adversarial terms enter unweighted; cycle terms are scaled by `lam` and
    temporal-match terms by `mu`. Returns the differentiable total plus a
    report holding the weighted component values (discriminator fields are
    filled in later by the caller).
    """
    raw = {
        "g_adv": g_adv,
        "f_adv": f_adv,
        "g_temp_adv": g_temp_adv,
        "f_temp_adv": f_temp_adv,
        "cycle_x": cycle_x,
        "cycle_y": cycle_y,
        "temporal_match_x": temporal_match_x,
        "temporal_match_y": temporal_match_y,
    }
    weights = {"cycle_x": lam, "cycle_y": lam, "temporal_match_x": mu, "temporal_match_y": mu}

    total = None
    report = LossReport()
    for name, value in raw.items():
        t = (
            value
            if isinstance(value, torch.Tensor)
            else torch.as_tensor(value, dtype=torch.float64)
        )
        _check_finite(name, t)
        weighted = t * weights.get(name, 1.0)
        setattr(report, name, float(weighted.detach()))
        total = weighted if total is None else total + weighted
    report.total_generators = float(total.detach())
    return total, report
