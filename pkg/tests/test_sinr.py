import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_cfg
from noma_jpa import seeds
from noma_jpa.channel import draw_channel_block, pilot_matrix
from noma_jpa.estimation import estimate
from noma_jpa.model import LargeScaleProfile, PowerAllocation
from noma_jpa.sinr import (
    asinr_closed_form,
    instantaneous_sinr,
    sinr_terms,
    theorem1_sample,
)


def _rand_scenario(rng, K=None, M=None):
    K = K or int(rng.integers(1, 5))
    M = M or int(rng.choice([1, 2, 4]))
    nu = np.sort(np.exp(rng.normal(0, 1.5, K)))[::-1]
    cfg = make_cfg(M=M, K=K, T=max(K, 2), D=24,
                   noise_power=float(np.exp(rng.normal(0, 1))),
                   weights=np.ones(K) / K, gamma=1.0)
    alloc = PowerAllocation(alpha=np.exp(rng.normal(0, 1, K)),
                            beta=np.exp(rng.normal(0, 1, K)))
    return cfg, LargeScaleProfile(nu), alloc


def test_single_user_high_pilot_limit():
    # huge pilot power: cee -> 0, ASINR -> M nu^2 beta / noise
    cfg = make_cfg(M=3, K=1, T=1, D=10, noise_power=0.2, weights=(1.0,), gamma=1.0)
    profile = LargeScaleProfile([1.7])
    alloc = PowerAllocation(alpha=np.array([1e12]), beta=np.array([0.9]))
    bd = asinr_closed_form(alloc, profile, cfg)
    assert bd.asinr[0] == pytest.approx(3 * 1.7 * 0.9 / 0.2, rel=1e-9)
    assert bd.iui[0] == 0.0


def test_zero_payload_gives_zero_asinr():
    cfg = make_cfg()
    profile = LargeScaleProfile([4e-10, 1e-10, 5e-11, 1e-11])
    alloc = PowerAllocation(alpha=np.full(4, 0.2), beta=np.array([0.2, 0.0, 0.2, 0.2]))
    bd = asinr_closed_form(alloc, profile, cfg)
    assert bd.asinr[1] == 0.0
    assert np.all(bd.asinr[[0, 2, 3]] > 0)


def test_breakdown_identity():
    rng = np.random.default_rng(3)
    cfg, profile, alloc = _rand_scenario(rng, K=4)
    bd = asinr_closed_form(alloc, profile, cfg)
    np.testing.assert_allclose(
        bd.asinr, bd.signal / (bd.iui + bd.residual + cfg.noise_power), rtol=1e-15
    )
    assert np.all(bd.signal >= 0)


@given(seed=st.integers(0, 2**32 - 1), kappa=st.floats(1e-6, 1e6))
def test_common_power_noise_scaling_invariance(seed, kappa):
    # scaling alpha, beta, and the noise by one factor fixes every ASINR
    rng = np.random.default_rng(seed)
    cfg, profile, alloc = _rand_scenario(rng)
    bd1 = asinr_closed_form(alloc, profile, cfg)
    cfg2 = make_cfg(M=cfg.M, K=cfg.K, T=cfg.T, D=cfg.D,
                    noise_power=cfg.noise_power * kappa,
                    weights=cfg.weights, gamma=cfg.gamma)
    alloc2 = PowerAllocation(alpha=alloc.alpha * kappa, beta=alloc.beta * kappa)
    bd2 = asinr_closed_form(alloc2, profile, cfg2)
    np.testing.assert_allclose(bd1.asinr, bd2.asinr, rtol=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_monotonicity_finite_differences(seed):
    rng = np.random.default_rng(seed)
    cfg, profile, alloc = _rand_scenario(rng, K=3)
    bd = asinr_closed_form(alloc, profile, cfg)
    h = 1e-6
    for k in range(3):
        for j in range(3):
            # pilot power of any already-decoded (or own) user helps user k
            da = alloc.alpha.copy()
            da[j] *= 1 + h
            up = asinr_closed_form(PowerAllocation(da, alloc.beta), profile, cfg)
            if j <= k:
                assert up.asinr[k] > bd.asinr[k]
            else:
                assert up.asinr[k] == pytest.approx(bd.asinr[k], rel=1e-12)
            # own payload helps; anyone else's payload hurts
            db = alloc.beta.copy()
            db[j] *= 1 + h
            up = asinr_closed_form(PowerAllocation(alloc.alpha, db), profile, cfg)
            if j == k:
                assert up.asinr[k] > bd.asinr[k]
            else:
                assert up.asinr[k] < bd.asinr[k]


def test_instantaneous_perfect_csi_single_user():
    cfg = make_cfg(M=2, K=1, T=1, D=4, noise_power=0.3, weights=(1.0,), gamma=1.0)
    profile = LargeScaleProfile([1.0])
    h = np.array([[0.7 + 0.2j], [-0.4 + 0.9j]])
    from noma_jpa.estimation import EstimationResult

    est = EstimationResult(H_hat=h.copy(), cee_var=np.zeros(1))
    alloc = PowerAllocation(alpha=np.array([1.0]), beta=np.array([0.5]))
    out = instantaneous_sinr(h, est, alloc, 0.3)
    expected = np.sum(np.abs(h) ** 2) * 0.5 / 0.3
    assert out.sinr[0] == pytest.approx(expected, rel=1e-12)
    assert not out.degenerate[0]


def test_zero_error_kills_residual_term():
    # a perfect estimate (eps = 0) must zero the residual term Q
    rng = seeds.substream(11, seeds.MISC)
    profile = LargeScaleProfile(np.array([2.0, 0.5]))
    H = draw_channel_block(profile, 3, 1, rng)[0]
    s, G, Q = sinr_terms(H, H, np.array([1.0, 2.0]))
    assert np.all(Q == 0)
    assert G[1] == 0.0 and G[0] > 0


def test_degenerate_estimate_flagged():
    from noma_jpa.estimation import EstimationResult

    H = np.ones((2, 2), dtype=complex)
    est = EstimationResult(H_hat=np.zeros((2, 2), dtype=complex), cee_var=np.ones(2))
    alloc = PowerAllocation(alpha=np.zeros(2), beta=np.ones(2))
    out = instantaneous_sinr(H, est, alloc, 0.1)
    assert np.all(out.degenerate)
    assert np.all(out.sinr == 0)


def test_average_instantaneous_dominates_closed_form():
    # ratio-of-means is a lower bound for the mean of ratios
    cfg = make_cfg(M=2, K=3, T=3, D=8, noise_power=0.4,
                   weights=(1 / 3, 1 / 3, 1 / 3), gamma=1.0)
    profile = LargeScaleProfile(np.array([2.0, 1.0, 0.4]))
    alloc = PowerAllocation(alpha=np.array([0.8, 0.9, 1.1]),
                            beta=np.array([0.7, 0.8, 1.2]))
    pilots = pilot_matrix(3, 3)
    rng = seeds.substream(12, seeds.MISC)
    n = 20_000
    H = draw_channel_block(profile, 2, n, rng)
    Z = np.sqrt(cfg.noise_power / 2) * (
        rng.standard_normal((n, 2, 3)) + 1j * rng.standard_normal((n, 2, 3))
    )
    Yp = (H * np.sqrt(alloc.alpha)[None, None, :]) @ pilots + Z
    acc = np.zeros(3)
    for f in range(n):
        est = estimate(Yp[f], pilots, alloc, profile, cfg.noise_power)
        acc += instantaneous_sinr(H[f], est, alloc, cfg.noise_power).sinr
    mean_inst = acc / n
    bd = asinr_closed_form(alloc, profile, cfg)
    # allow 3 standard-error slack on the Monte Carlo side
    assert np.all(mean_inst >= bd.asinr * (1 - 3 / np.sqrt(n)))


def test_theorem1_m1_fixed_y_variance():
    stats = theorem1_sample(2.5, 1, 200_000, seeds.substream(1, seeds.THEOREM))
    assert stats.variance == pytest.approx(2.5, rel=0.02)


def test_theorem1_full_checks():
    n = 300_000
    sx2 = 0.8
    stats = theorem1_sample(sx2, 4, n, seeds.substream(2, seeds.THEOREM))
    assert abs(stats.mean) < 3 * np.sqrt(sx2 / n)
    assert stats.variance == pytest.approx(sx2, rel=0.02)
    assert abs(stats.corr_abs2) < 3 / np.sqrt(n)
