"""Shared domain types for the uplink MIMO-NOMA power-allocation study.

Conventions used throughout the package:

* all powers are linear watts, all energies joules, symbol_duration = 1 s,
  so power times symbol count is energy with no unit juggling;
* users are indexed in SIC decoding order, i.e. descending large-scale
  fading gain nu_k^2 (user 1 is decoded first);
* the ASINR threshold ``gamma`` and the weights ``c`` are stored linear.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemConfig",
    "LargeScaleProfile",
    "PowerAllocation",
    "Scenario",
    "validate_config",
    "energy_per_user",
]


def _readonly(x, dtype=float) -> np.ndarray:
    a = np.array(x, dtype=dtype, copy=True).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Scenario constants. Immutable after construction."""

    M: int                  # receive antennas at the base station
    K: int                  # number of uplink users
    T: int                  # pilot symbols per frame
    D: int                  # payload symbols per frame
    noise_power: float      # sigma^2 in watts, per receive antenna
    E_max: float            # per-user energy budget over one frame, joules
    gamma: float            # ASINR floor, linear scale
    weights: np.ndarray     # fairness weights c_k, one per decoding slot
    symbol_duration: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))


@dataclass(frozen=True, eq=False)
class LargeScaleProfile:
    """Per-user large-scale fading gains nu_k^2 (linear power gain)."""

    nu_sq: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nu_sq", _readonly(self.nu_sq))

    @property
    def K(self) -> int:
        return self.nu_sq.size


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Pilot powers alpha_k and payload powers beta_k, watts."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", _readonly(self.alpha))
        object.__setattr__(self, "beta", _readonly(self.beta))
        if self.alpha.size != self.beta.size:
            raise ValueError("alpha and beta must have the same length")
        if np.any(self.alpha < 0) or np.any(self.beta < 0):
            raise ValueError("powers must be non-negative")

    @property
    def K(self) -> int:
        return self.alpha.size


@dataclass(frozen=True, eq=False)
class Scenario:
    """A validated (config, profile) pair.

    ``permutation`` maps sorted position -> original 1-based user index;
    it is the identity tuple when the input profile was already sorted.
    Weights are positional in the decoding order and are therefore not
    permuted alongside nu_sq.
    """

    cfg: SystemConfig
    profile: LargeScaleProfile
    permutation: tuple[int, ...]


def energy_per_user(alloc: PowerAllocation, T: int, D: int) -> np.ndarray:
    """Per-user frame energy alpha_k*T + beta_k*D (symbol_duration = 1)."""
    return alloc.alpha * T + alloc.beta * D


def validate_config(cfg: SystemConfig, profile: LargeScaleProfile) -> Scenario:
    """Check every type invariant and fix the user ordering.

    Returns a Scenario whose profile is sorted descending by nu_k^2 (the
    SIC decoding order). An unsorted input is not an error: it is sorted
    and the applied permutation recorded, since the ordering is a modeling
    convention rather than a user obligation. Raises ValueError otherwise.
    """
    for name in ("M", "K", "T", "D"):
        v = getattr(cfg, name)
        if int(v) != v or v <= 0:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    if cfg.T < cfg.K:
        raise ValueError(f"T < K: need at least K orthogonal pilot symbols (T={cfg.T}, K={cfg.K})")
    for name in ("noise_power", "E_max", "gamma", "symbol_duration"):
        v = getattr(cfg, name)
        if not np.isfinite(v) or v <= 0:
            raise ValueError(f"{name} must be positive and finite, got {v!r}")
    if cfg.weights.size != cfg.K:
        raise ValueError(f"weights length {cfg.weights.size} != K = {cfg.K}")
    if np.any(cfg.weights <= 0):
        raise ValueError("weights must be strictly positive")
    if np.any(np.diff(cfg.weights) < 0):
        raise ValueError("weights must be non-decreasing in decoding order")
    if profile.nu_sq.size != cfg.K:
        raise ValueError(f"nu_sq length {profile.nu_sq.size} != K = {cfg.K}")
    if np.any(profile.nu_sq <= 0) or not np.all(np.isfinite(profile.nu_sq)):
        raise ValueError("nu_sq entries must be positive and finite")

    # stable sort keeps ties in input order, which makes validation idempotent
    order = np.argsort(-profile.nu_sq, kind="stable")
    sorted_profile = LargeScaleProfile(profile.nu_sq[order])
    permutation = tuple(int(i) + 1 for i in order)
    return Scenario(cfg=cfg, profile=sorted_profile, permutation=permutation)
