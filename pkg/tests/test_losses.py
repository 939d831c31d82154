import math

import numpy as np
import pytest
import torch
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gradcheck import check_grad_wrt_tensor
from videocycle.losses import (
    LossReport,
    assemble_generator_objective,
    cycle_loss,
    lsgan_d_loss,
    lsgan_g_loss,
    temporal_match_loss,
)
from videocycle.nets import FramePair

# fixed random inputs for the frozen-oracle tests
_RNG = np.random.default_rng(20240812)
_REAL = torch.from_numpy(_RNG.uniform(-2, 2, size=(1, 5, 5)))
_FAKE = torch.from_numpy(_RNG.uniform(-2, 2, size=(1, 5, 5)))
_PAIR_A = torch.from_numpy(_RNG.uniform(-1, 1, size=(2, 3, 4, 4)))
_PAIR_B = torch.from_numpy(_RNG.uniform(-1, 1, size=(2, 3, 4, 4)))
_FRAME_1 = torch.from_numpy(_RNG.uniform(-1, 1, size=(3, 4, 4)))
_FRAME_2 = torch.from_numpy(_RNG.uniform(-1, 1, size=(3, 4, 4)))

# expected values computed by the scalar-loop oracles below
_EXPECTED_D = 1.9116184544994317
_EXPECTED_G = 1.7604834152401698
_EXPECTED_MEAN_ABS_PAIR = 0.6962304407105541
_EXPECTED_MEAN_ABS_FRAME = 0.597852846080693


def _loop_mean(values: np.ndarray) -> float:
    total, n = 0.0, 0
    for v in values.ravel().tolist():
        total += v
        n += 1
    return total / n


class TestLsganDLoss:
    def test_perfect_discriminator(self):
        real = torch.ones(1, 4, 4)
        fake = torch.zeros(1, 4, 4)
        assert float(lsgan_d_loss(real, fake)) == 0.0

    def test_zero_scores(self):
        zeros = torch.zeros(1, 4, 4)
        assert float(lsgan_d_loss(zeros, zeros)) == pytest.approx(0.5, abs=0)

    def test_matches_scalar_oracle(self):
        oracle = 0.5 * (
            _loop_mean((_REAL.numpy() - 1.0) ** 2) + _loop_mean(_FAKE.numpy() ** 2)
        )
        assert oracle == pytest.approx(_EXPECTED_D, abs=1e-12)
        assert float(lsgan_d_loss(_REAL, _FAKE)) == pytest.approx(_EXPECTED_D, rel=1e-12)

    def test_exactly_half_of_unhalved_objective(self):
        unhalved = float(((_REAL - 1.0) ** 2).mean() + (_FAKE**2).mean())
        assert float(lsgan_d_loss(_REAL, _FAKE)) * 2.0 == unhalved

    def test_rejects_non_finite(self):
        bad = torch.tensor([[float("nan")]])
        with pytest.raises(ValueError, match="non-finite"):
            lsgan_d_loss(bad, torch.zeros(1, 1))
        with pytest.raises(ValueError, match="non-finite"):
            lsgan_d_loss(torch.zeros(1, 1), bad)


class TestLsganGLoss:
    def test_perfect_generator(self):
        assert float(lsgan_g_loss(torch.ones(1, 3, 3))) == 0.0

    def test_zero_scores(self):
        assert float(lsgan_g_loss(torch.zeros(1, 3, 3))) == 1.0

    def test_matches_scalar_oracle(self):
        oracle = _loop_mean((_FAKE.numpy() - 1.0) ** 2)
        assert oracle == pytest.approx(_EXPECTED_G, abs=1e-12)
        assert float(lsgan_g_loss(_FAKE)) == pytest.approx(_EXPECTED_G, rel=1e-12)


class TestCycleLoss:
    def test_identical_pair_is_zero(self):
        pair = FramePair(torch.rand(3, 8, 8), torch.rand(3, 8, 8))
        assert float(cycle_loss(pair, pair, 10.0)) == 0.0

    def test_constant_offset(self):
        zeros = torch.zeros(2, 3, 4, 4)
        halves = torch.full((2, 3, 4, 4), 0.5)
        assert float(cycle_loss(zeros, halves, 10.0)) == pytest.approx(5.0, rel=1e-7)

    def test_matches_scalar_oracle(self):
        oracle = _loop_mean(np.abs(_PAIR_A.numpy() - _PAIR_B.numpy()))
        assert oracle == pytest.approx(_EXPECTED_MEAN_ABS_PAIR, abs=1e-12)
        got = float(cycle_loss(_PAIR_A, _PAIR_B, 1.0))
        assert got == pytest.approx(_EXPECTED_MEAN_ABS_PAIR, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            cycle_loss(torch.zeros(3, 4, 4), torch.zeros(3, 8, 8), 10.0)

    @given(
        hnp.arrays(
            np.float64,
            (3, 4, 4),
            elements=st.floats(-1, 1, allow_nan=False),
        ),
        st.floats(0, 100, allow_nan=False),
    )
    def test_self_cycle_always_zero(self, frame, lam):
        t = torch.from_numpy(frame)
        assert float(cycle_loss(t, t, lam)) == 0.0


class TestTemporalMatchLoss:
    def test_identical_frames(self):
        f = torch.rand(3, 6, 6)
        assert float(temporal_match_loss(f, f)) == 0.0

    def test_constant_difference(self):
        a = torch.zeros(3, 4, 4)
        b = torch.full((3, 4, 4), 0.25)
        assert float(temporal_match_loss(a, b)) == pytest.approx(0.25, rel=1e-7)

    def test_matches_scalar_oracle(self):
        oracle = _loop_mean(np.abs(_FRAME_1.numpy() - _FRAME_2.numpy()))
        assert oracle == pytest.approx(_EXPECTED_MEAN_ABS_FRAME, abs=1e-12)
        got = float(temporal_match_loss(_FRAME_1, _FRAME_2))
        assert got == pytest.approx(_EXPECTED_MEAN_ABS_FRAME, rel=1e-12)


class TestAssemble:
    def test_all_zero(self):
        total, report = assemble_generator_objective(
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, lam=10.0, mu=10.0
        )
        assert float(total) == 0.0
        assert report.total_generators == 0.0

    def test_single_cycle_component(self):
        total, report = assemble_generator_objective(
            0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, lam=10.0, mu=10.0
        )
        assert float(total) == pytest.approx(5.0, abs=1e-9)
        assert report.cycle_x == pytest.approx(5.0, abs=1e-9)

    def test_matches_hand_summed_total(self):
        rng = np.random.default_rng(3)
        comps = rng.uniform(0, 2, size=8).tolist()
        lam, mu = 10.0, 7.0
        total, report = assemble_generator_objective(*comps, lam=lam, mu=mu)
        hand = (
            comps[0]
            + comps[1]
            + comps[2]
            + comps[3]
            + lam * (comps[4] + comps[5])
            + mu * (comps[6] + comps[7])
        )
        assert float(total) == pytest.approx(hand, rel=1e-12)
        component_sum = sum(
            getattr(report, name) for name in LossReport.GENERATOR_FIELDS
        )
        assert report.total_generators == pytest.approx(component_sum, rel=1e-12)

    def test_domain_swap_symmetry(self):
        # mirroring X<->Y swaps (g_adv, f_adv), (cycle_x, cycle_y), and the
        # temporal terms but leaves the total unchanged
        rng = np.random.default_rng(4)
        c = rng.uniform(0, 1, size=8).tolist()
        total, _ = assemble_generator_objective(*c, lam=10.0, mu=10.0)
        mirrored = [c[1], c[0], c[3], c[2], c[5], c[4], c[7], c[6]]
        total_m, _ = assemble_generator_objective(*mirrored, lam=10.0, mu=10.0)
        assert float(total) == pytest.approx(float(total_m), rel=1e-12)

    def test_rejects_non_finite_component(self):
        with pytest.raises(ValueError, match="cycle_y"):
            assemble_generator_objective(
                0.0, 0.0, 0.0, 0.0, 0.0, float("inf"), 0.0, 0.0, lam=10.0, mu=10.0
            )

    def test_discriminator_total(self):
        _, report = assemble_generator_objective(
            0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0, 0.0, lam=10.0, mu=10.0
        )
        report.set_discriminators(0.1, 0.2, 0.3, 0.4)
        assert report.total_discriminators == pytest.approx(1.0, rel=1e-12)


class TestNonNegativity:
    @given(
        hnp.arrays(np.float64, (2, 3, 3), elements=st.floats(-1, 1, allow_nan=False)),
        hnp.arrays(np.float64, (2, 3, 3), elements=st.floats(-1, 1, allow_nan=False)),
    )
    def test_all_losses_non_negative_and_finite(self, a, b):
        ta, tb = torch.from_numpy(a), torch.from_numpy(b)
        for value in (
            lsgan_d_loss(ta, tb),
            lsgan_g_loss(ta),
            cycle_loss(ta, tb, 10.0),
            temporal_match_loss(ta, tb),
        ):
            v = float(value)
            assert v >= 0.0 and math.isfinite(v)


class TestGradients:
    """Analytic gradients vs central differences on 4x4 inputs."""

    def test_lsgan_d_real_branch(self):
        x = torch.from_numpy(np.random.default_rng(11).uniform(-1, 1, (1, 4, 4)))
        fake = torch.from_numpy(np.random.default_rng(12).uniform(-1, 1, (1, 4, 4)))
        check_grad_wrt_tensor(lambda t: lsgan_d_loss(t, fake), x)

    def test_lsgan_d_fake_branch(self):
        real = torch.from_numpy(np.random.default_rng(13).uniform(-1, 1, (1, 4, 4)))
        x = torch.from_numpy(np.random.default_rng(14).uniform(-1, 1, (1, 4, 4)))
        check_grad_wrt_tensor(lambda t: lsgan_d_loss(real, t), x)

    def test_lsgan_g(self):
        x = torch.from_numpy(np.random.default_rng(15).uniform(-1, 1, (1, 4, 4)))
        check_grad_wrt_tensor(lsgan_g_loss, x)

    def test_cycle(self):
        ref = torch.from_numpy(np.random.default_rng(16).uniform(-1, 1, (3, 4, 4)))
        x = torch.from_numpy(np.random.default_rng(17).uniform(-1, 1, (3, 4, 4)))
        check_grad_wrt_tensor(lambda t: cycle_loss(ref, t, 10.0), x)

    def test_temporal_match(self):
        ref = torch.from_numpy(np.random.default_rng(18).uniform(-1, 1, (3, 4, 4)))
        x = torch.from_numpy(np.random.default_rng(19).uniform(-1, 1, (3, 4, 4)))
        check_grad_wrt_tensor(lambda t: temporal_match_loss(ref, t), x)
