"""Cell geometry, Rayleigh channel draws, and the orthogonal pilot matrix."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import LargeScaleProfile

__all__ = [
    "CellGeometry",
    "ChannelRealization",
    "pathloss_db",
    "draw_user_drop",
    "draw_channel_block",
    "draw_channels",
    "pilot_matrix",
]


@dataclass(frozen=True)
class CellGeometry:
    """Single-cell layout for user drops.

    min_distance keeps users away from the path-loss singularity at the
    base station; 35 m is a conventional urban-macro exclusion radius.
    """

    radius: float                      # meters
    min_distance: float = 35.0         # meters
    pathloss_model: str = "3gpp-urban"
    shadowing_std_db: float = 0.0      # lognormal shadowing, 0 disables

    def __post_init__(self):
        if not (self.radius > self.min_distance >= 0):
            raise ValueError("need radius > min_distance >= 0")
        if self.pathloss_model != "3gpp-urban":
            raise ValueError(f"unknown pathloss model {self.pathloss_model!r}")
        if self.shadowing_std_db < 0:
            raise ValueError("shadowing_std_db must be non-negative")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """True channels for one frame; column k is h_k, entries CN(0, nu_k^2)."""

    H: np.ndarray          # complex, M x K
    frame_index: int


def pathloss_db(distance_m: np.ndarray | float) -> np.ndarray:
    """Urban-macro path loss, PL(dB) = 128.1 + 37.6 log10(d_km)."""
    d_km = np.asarray(distance_m, dtype=float) / 1000.0
    return 128.1 + 37.6 * np.log10(d_km)


def draw_user_drop(geom: CellGeometry, K: int, rng: np.random.Generator) -> LargeScaleProfile:
    """Drop K users area-uniformly and convert path loss to linear gain.

    Radii are drawn as r = sqrt(min^2 + u*(R^2 - min^2)), the area-uniform
    law on the annulus (it reduces to R*sqrt(u) when min_distance = 0).
    The result is sorted descending, which fixes the decoding order.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    u = rng.random(K)
    r = np.sqrt(geom.min_distance**2 + u * (geom.radius**2 - geom.min_distance**2))
    pl_db = pathloss_db(r)
    if geom.shadowing_std_db > 0:
        pl_db = pl_db + rng.normal(0.0, geom.shadowing_std_db, size=K)
    nu_sq = 10.0 ** (-pl_db / 10.0)
    return LargeScaleProfile(np.sort(nu_sq)[::-1])


def draw_channel_block(
    profile: LargeScaleProfile, M: int, n_frames: int, rng: np.random.Generator
) -> np.ndarray:
    """(n_frames, M, K) array of i.i.d. CN(0, nu_k^2) channel entries."""
    K = profile.K
    scale = np.sqrt(profile.nu_sq / 2.0)
    re = rng.standard_normal((n_frames, M, K))
    im = rng.standard_normal((n_frames, M, K))
    return (re + 1j * im) * scale[None, None, :]


def draw_channels(
    profile: LargeScaleProfile, M: int, n_frames: int, rng: np.random.Generator
) -> Iterator[ChannelRealization]:
    """Yield per-frame realizations; thin wrapper over draw_channel_block."""
    block = draw_channel_block(profile, M, n_frames, rng)
    for f in range(n_frames):
        yield ChannelRealization(H=block[f], frame_index=f)


def pilot_matrix(K: int, T: int) -> np.ndarray:
    """K x T pilot matrix with exactly orthonormal rows (first K DFT rows).

    Row k is exp(-2*pi*i*k*t/T)/sqrt(T); distinct DFT rows are orthogonal
    for any T, so the Gram matrix is the identity up to rounding.
    """
    if T < K:
        raise ValueError(f"T < K: cannot assign {K} orthogonal pilots over {T} symbols")
    if K < 1:
        raise ValueError("K must be >= 1")
    k = np.arange(K)[:, None]
    t = np.arange(T)[None, :]
    return np.exp(-2j * np.pi * k * t / T) / np.sqrt(T)
