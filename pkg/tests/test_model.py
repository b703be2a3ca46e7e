import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_cfg
from noma_jpa.model import (
    LargeScaleProfile,
    PowerAllocation,
    energy_per_user,
    validate_config,
)


def test_baseline_constants_valid():
    scn = validate_config(make_cfg(), LargeScaleProfile([4e-10, 1e-10, 5e-11, 1e-11]))
    assert scn.permutation == (1, 2, 3, 4)
    assert scn.cfg.T >= scn.cfg.K


def test_t_smaller_than_k_rejected():
    with pytest.raises(ValueError, match="T < K"):
        validate_config(make_cfg(T=3), LargeScaleProfile([4e-10, 1e-10, 5e-11, 1e-11]))


def test_unsorted_profile_sorted_with_recorded_permutation():
    scn = validate_config(
        make_cfg(K=2, T=4, weights=(0.5, 0.5)), LargeScaleProfile([1.0, 2.0])
    )
    assert np.array_equal(scn.profile.nu_sq, [2.0, 1.0])
    assert scn.permutation == (2, 1)


def test_dimension_mismatches_rejected():
    with pytest.raises(ValueError, match="weights"):
        validate_config(
            make_cfg(weights=(0.5, 0.5)), LargeScaleProfile([1.0, 0.5, 0.2, 0.1])
        )
    with pytest.raises(ValueError, match="nu_sq"):
        validate_config(make_cfg(), LargeScaleProfile([1.0, 0.5]))


def test_nonpositive_constants_rejected():
    with pytest.raises(ValueError):
        validate_config(make_cfg(noise_power=0.0), LargeScaleProfile([1, 1, 1, 1]))
    with pytest.raises(ValueError):
        validate_config(make_cfg(E_max=-1.0), LargeScaleProfile([1, 1, 1, 1]))
    with pytest.raises(ValueError):
        validate_config(make_cfg(gamma=0.0), LargeScaleProfile([1, 1, 1, 1]))


def test_decreasing_weights_rejected():
    with pytest.raises(ValueError, match="non-decreasing"):
        validate_config(
            make_cfg(weights=(0.5, 0.25, 0.125, 0.125)),
            LargeScaleProfile([1.0, 0.5, 0.2, 0.1]),
        )


def test_negative_powers_rejected():
    with pytest.raises(ValueError):
        PowerAllocation(alpha=np.array([-0.1, 0.2]), beta=np.array([0.1, 0.1]))


def test_arrays_are_readonly():
    cfg = make_cfg()
    with pytest.raises(ValueError):
        cfg.weights[0] = 9.0
    alloc = PowerAllocation(alpha=np.ones(2), beta=np.ones(2))
    with pytest.raises(ValueError):
        alloc.beta[0] = 2.0


def test_energy_per_user():
    alloc = PowerAllocation(alpha=np.array([0.2, 0.2]), beta=np.array([0.2, 0.1]))
    np.testing.assert_allclose(energy_per_user(alloc, 4, 96), [20.0, 10.4])


@given(
    nu=st.lists(st.floats(1e-12, 1e3), min_size=1, max_size=6),
    wstep=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
)
def test_validate_config_idempotent(nu, wstep):
    K = min(len(nu), len(wstep))
    nu = nu[:K]
    # build a non-decreasing positive weight vector from increments
    w = np.cumsum(np.asarray(wstep[:K])) + 0.1
    cfg = make_cfg(K=K, T=max(K, 4), weights=w)
    scn1 = validate_config(cfg, LargeScaleProfile(nu))
    scn2 = validate_config(scn1.cfg, scn1.profile)
    assert scn2.permutation == tuple(range(1, K + 1))
    assert np.array_equal(scn1.profile.nu_sq, scn2.profile.nu_sq)
    assert np.all(np.diff(scn1.profile.nu_sq) <= 0)
