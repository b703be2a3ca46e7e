import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from noma_jpa.model import LargeScaleProfile, SystemConfig

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def make_cfg(
    M=2, K=4, T=4, D=96,
    noise_power=1e-13, E_max=20.0, gamma=10.0 ** 0.5,
    weights=(0.125, 0.125, 0.25, 0.5),
    symbol_duration=1.0,
) -> SystemConfig:
    return SystemConfig(
        M=M, K=K, T=T, D=D, noise_power=noise_power, E_max=E_max,
        gamma=gamma, weights=np.asarray(weights, dtype=float),
        symbol_duration=symbol_duration,
    )


@pytest.fixture
def baseline_cfg() -> SystemConfig:
    return make_cfg()


@pytest.fixture
def baseline_profile() -> LargeScaleProfile:
    # a fixed, well-spread four-user profile at urban-cell magnitudes
    return LargeScaleProfile(np.array([4.0e-10, 1.6e-10, 6.0e-11, 2.5e-11]))
