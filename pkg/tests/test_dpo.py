"""Preference-objective tests: schedule identities, energies, gradients,
and the toy alignment loop.  Gradient checks use central finite
differences as the independent oracle."""

from __future__ import annotations

import numpy as np
import pytest

from geopref.dpo import (DpoSample, EnergyQuad, NoiseSchedule,
                         cosine_schedule, dpo_loss, energy, noisy_latent,
                         separable_cohort, toy_align, velocity_target)
from geopref.errors import TrainingDivergedError, ValidationError


def _tiny_schedule():
    """Three explicit timesteps hitting the boundary coefficient values."""
    return NoiseSchedule(
        timesteps=3,
        alpha=np.array([1.0, 0.5, 0.0]),
        sigma=np.array([0.0, np.sqrt(0.75), 1.0]),
        alpha_bar=np.array([1.0, 0.25, 0.0]),
    )


def _vp_schedule(alpha_t, sigma_t):
    """One interior timestep with the given coefficients."""
    return NoiseSchedule(
        timesteps=3,
        alpha=np.array([1.0, alpha_t, 0.0]),
        sigma=np.array([0.0, sigma_t, 1.0]),
        alpha_bar=np.array([1.0, alpha_t ** 2, 0.0]),
    )


class TestNoiseSchedule:
    def test_cosine_variance_preserving(self):
        sched = cosine_schedule(1000)
        np.testing.assert_allclose(sched.alpha ** 2 + sched.sigma ** 2, 1.0,
                                   atol=1e-9)

    def test_cosine_alpha_bar_monotone(self):
        sched = cosine_schedule(1000)
        assert (np.diff(sched.alpha_bar) <= 0).all()
        assert sched.alpha_bar[0] == 1.0

    def test_non_vp_rejected(self):
        with pytest.raises(ValidationError):
            NoiseSchedule(2, np.array([1.0, 0.9]), np.array([0.0, 0.9]),
                          np.array([1.0, 0.81]))

    def test_increasing_alpha_bar_rejected(self):
        with pytest.raises(ValidationError):
            NoiseSchedule(2, np.array([0.6, 0.8]), np.array([0.8, 0.6]),
                          np.array([0.36, 0.64]))


class TestNoisyLatent:
    def test_alpha_bar_one_returns_x0(self):
        sched = _tiny_schedule()
        x0, eps = np.array([3.0, -1.0]), np.array([0.5, 0.5])
        np.testing.assert_array_equal(noisy_latent(x0, eps, sched, 0), x0)

    def test_alpha_bar_zero_returns_eps(self):
        sched = _tiny_schedule()
        x0, eps = np.array([3.0, -1.0]), np.array([0.5, 0.5])
        np.testing.assert_array_equal(noisy_latent(x0, eps, sched, 2), eps)

    def test_quarter_alpha_bar_closed_form(self):
        # alpha_bar = 0.25, x0 = (2, 0), eps = (0, 2):
        # sqrt(.25)*(2,0) + sqrt(.75)*(0,2) = (1, sqrt(3)).
        sched = _tiny_schedule()
        out = noisy_latent(np.array([2.0, 0.0]), np.array([0.0, 2.0]), sched, 1)
        np.testing.assert_allclose(out, [1.0, np.sqrt(3.0)], atol=1e-15)

    def test_dimension_mismatch_rejected(self):
        sched = _tiny_schedule()
        with pytest.raises(ValidationError):
            noisy_latent(np.zeros(2), np.zeros(3), sched, 0)

    def test_timestep_range_checked(self):
        sched = _tiny_schedule()
        with pytest.raises(ValidationError):
            noisy_latent(np.zeros(2), np.zeros(2), sched, 3)


class TestVelocityTarget:
    def test_pure_noise_limit(self):
        sched = _tiny_schedule()  # t=0: alpha=1, sigma=0
        x0, eps = np.array([3.0, -1.0]), np.array([0.5, 0.25])
        np.testing.assert_array_equal(velocity_target(x0, eps, sched, 0), eps)

    def test_pure_signal_limit(self):
        sched = _tiny_schedule()  # t=2: alpha=0, sigma=1
        x0, eps = np.array([3.0, -1.0]), np.array([0.5, 0.25])
        np.testing.assert_array_equal(velocity_target(x0, eps, sched, 2), -x0)

    def test_interior_closed_form(self):
        # alpha=0.6, sigma=0.8, x0=(1,0), eps=(0,1) -> (-0.8, 0.6).
        sched = _vp_schedule(0.6, 0.8)
        out = velocity_target(np.array([1.0, 0.0]), np.array([0.0, 1.0]),
                              sched, 1)
        np.testing.assert_allclose(out, [-0.8, 0.6], atol=1e-15)


class TestEnergy:
    def test_identical_is_zero(self, rng):
        v = rng.normal(size=8)
        assert energy(v, v) == 0.0

    def test_three_four_five(self):
        assert energy(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 25.0

    def test_matches_scalar_loop(self, rng):
        a, b = rng.normal(size=16), rng.normal(size=16)
        total = 0.0
        for x, y in zip(a, b):
            total += (y - x) ** 2
        assert energy(a, b) == pytest.approx(total, abs=1e-12)


class TestDpoLoss:
    def test_zero_margin_is_log_two(self):
        loss, gw, gl = dpo_loss(EnergyQuad(1.0, 1.0, 1.0, 1.0), beta=1.0)
        assert abs(loss - np.log(2.0)) <= 1e-12
        assert gw == pytest.approx(0.5)
        assert gl == pytest.approx(-0.5)

    def test_perfect_margin_limit(self):
        # inner -> +inf: loss -> 0 without overflow.
        q = EnergyQuad(e_theta_w=0.0, e_ref_w=1e6, e_theta_l=1e6, e_ref_l=0.0)
        loss, _, _ = dpo_loss(q, beta=1.0)
        assert loss == 0.0

    def test_catastrophic_margin_stable(self):
        # inner -> -inf: the naive -log(sigmoid(inner)) overflows; the
        # softplus form returns the exact linear asymptote.
        q = EnergyQuad(e_theta_w=1e6, e_ref_w=0.0, e_theta_l=0.0, e_ref_l=1e6)
        loss, gw, gl = dpo_loss(q, beta=1.0)
        assert loss == pytest.approx(2e6)
        assert np.isfinite(loss) and np.isfinite(gw) and np.isfinite(gl)

    def test_gradients_match_finite_differences(self, rng):
        h = 1e-6
        for _ in range(1000):
            e = rng.uniform(0.0, 4.0, size=4)
            beta = float(rng.uniform(0.5, 2.0))
            q = EnergyQuad(*e)
            _, gw, gl = dpo_loss(q, beta)
            lw_hi, _, _ = dpo_loss(EnergyQuad(e[0] + h, e[1], e[2], e[3]), beta)
            lw_lo, _, _ = dpo_loss(EnergyQuad(e[0] - h, e[1], e[2], e[3]), beta)
            ll_hi, _, _ = dpo_loss(EnergyQuad(e[0], e[1], e[2] + h, e[3]), beta)
            ll_lo, _, _ = dpo_loss(EnergyQuad(e[0], e[1], e[2] - h, e[3]), beta)
            fd_w = (lw_hi - lw_lo) / (2 * h)
            fd_l = (ll_hi - ll_lo) / (2 * h)
            assert abs(fd_w - gw) / abs(gw) < 1e-5
            assert abs(fd_l - gl) / abs(gl) < 1e-5

    def test_grad_antisymmetry(self, rng):
        for _ in range(100):
            q = EnergyQuad(*rng.uniform(0.0, 5.0, size=4))
            _, gw, gl = dpo_loss(q, beta=1.3)
            assert gw == -gl

    def test_swap_negates_inner(self, rng):
        for _ in range(100):
            e = rng.uniform(0.0, 5.0, size=4)
            loss, _, _ = dpo_loss(EnergyQuad(e[0], e[1], e[2], e[3]), 1.0)
            swapped, _, _ = dpo_loss(EnergyQuad(e[2], e[3], e[0], e[1]), 1.0)
            inner = (e[1] - e[0]) - (e[3] - e[2])
            assert loss == pytest.approx(np.logaddexp(0.0, -inner), abs=1e-12)
            assert swapped == pytest.approx(np.logaddexp(0.0, inner), abs=1e-12)

    def test_softplus_convexity_bound(self, rng):
        # loss(q) + loss(swapped q) >= 2 log 2, equality iff inner = 0.
        for _ in range(200):
            e = rng.uniform(0.0, 5.0, size=4)
            a, _, _ = dpo_loss(EnergyQuad(e[0], e[1], e[2], e[3]), 1.0)
            b, _, _ = dpo_loss(EnergyQuad(e[2], e[3], e[0], e[1]), 1.0)
            assert a + b >= 2 * np.log(2.0) - 1e-12

    def test_bad_beta_rejected(self):
        with pytest.raises(ValidationError):
            dpo_loss(EnergyQuad(1, 1, 1, 1), beta=0.0)

    def test_non_finite_energy_rejected(self):
        with pytest.raises(ValidationError):
            EnergyQuad(np.nan, 1.0, 1.0, 1.0)


class TestToyAlign:
    def test_symmetric_pairs_stay_at_log_two(self, rng):
        # Identical winner and loser latents: inner = 0 forever and the
        # winner/loser gradient contributions cancel exactly.
        sched = cosine_schedule(1000)
        pairs = []
        for _ in range(8):
            x = rng.normal(size=4)
            pairs.append(DpoSample(x, x.copy(), rng.normal(size=4), t=250))
        trace = toy_align(pairs, sched, beta=1.0, steps=60, lr=1e-2)
        np.testing.assert_allclose(trace.loss, np.log(2.0), atol=1e-12)
        np.testing.assert_allclose(trace.mean_margin, 0.0, atol=1e-9)

    def test_separable_cohort_reaches_positive_margin(self):
        sched = cosine_schedule(1000)
        pairs = separable_cohort(40, 4, seed=0)
        trace = toy_align(pairs, sched, beta=1.0, steps=500, lr=1e-2)
        assert trace.positive_fraction >= 0.9
        assert trace.mean_margin[-1] > 0.0

    def test_small_step_loss_monotone(self):
        sched = cosine_schedule(1000)
        pairs = separable_cohort(40, 4, seed=0)
        trace = toy_align(pairs, sched, beta=1.0, steps=500, lr=1e-3)
        assert (np.diff(trace.loss) <= 1e-12).all()

    def test_divergence_raises_with_step(self):
        sched = cosine_schedule(1000)
        pairs = separable_cohort(10, 4, seed=1)
        with pytest.raises(TrainingDivergedError) as err:
            toy_align(pairs, sched, beta=1.0, steps=200, lr=1e6)
        assert err.value.step is not None

    def test_trace_export(self, tmp_path):
        sched = cosine_schedule(100)
        pairs = separable_cohort(5, 3, seed=2)
        trace = toy_align(pairs, sched, beta=1.0, steps=10, lr=1e-3)
        path = tmp_path / "trace.tsv"
        trace.write(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "step\tloss\tmean_margin"
        assert len(lines) == 11

    def test_empty_pairs_rejected(self):
        with pytest.raises(ValidationError):
            toy_align([], cosine_schedule(10))

    def test_mismatched_dimensions_rejected(self, rng):
        sched = cosine_schedule(10)
        pairs = [DpoSample(np.zeros(3), np.zeros(3), np.zeros(3), t=1),
                 DpoSample(np.zeros(4), np.zeros(4), np.zeros(4), t=1)]
        with pytest.raises(ValidationError):
            toy_align(pairs, sched)
