"""Average-SINR analysis for the MRC-SIC receiver under imperfect CSI.

The receiver decodes users in descending large-scale order. After MRC
with the estimated channel h_hat_k, the post-combining SINR of user k in
one frame decomposes into

    s = ||h_hat_k||^2 beta_k                        desired signal
    G = sum_{l>k} |h_hat_k^H h_l|^2 beta_l / ||h_hat_k||^2     IUI
    Q = sum_{l<=k} |h_hat_k^H eps_l|^2 beta_l / ||h_hat_k||^2  CEE residual

where eps_l = h_l - h_hat_l. The Q sum deliberately includes l = k: the
user's own estimation error leaks past its cancellation step.

The average SINR used throughout is the ratio of expectations
E{s} / (E{G} + E{Q} + sigma^2), a lower bound on E{s/(G+Q+sigma^2)}
(the bound follows from independence of s and the denominator plus
convexity of 1/x). All three expectations have closed forms:

    E{s} = M (nu_k^2 - cee_var_k) beta_k
    E{G} = sum_{l>k} nu_l^2 beta_l
    E{Q} = sum_{l<=k} cee_var_l beta_l
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .estimation import EstimationResult, cee_variance
from .model import LargeScaleProfile, PowerAllocation, SystemConfig

__all__ = [
    "AsinrBreakdown",
    "asinr_closed_form",
    "InstantaneousSinr",
    "instantaneous_sinr",
    "sinr_terms",
    "Theorem1Stats",
    "theorem1_sample",
]


@dataclass(frozen=True, eq=False)
class AsinrBreakdown:
    """Closed-form ASINR with its numerator/denominator terms (watts)."""

    signal: np.ndarray     # K, E{s}
    iui: np.ndarray        # K, E{G}
    residual: np.ndarray   # K, E{Q}
    asinr: np.ndarray      # K, linear


def asinr_closed_form(
    alloc: PowerAllocation, profile: LargeScaleProfile, cfg: SystemConfig
) -> AsinrBreakdown:
    """Closed-form average SINR per user for a given power allocation."""
    nu_sq = profile.nu_sq
    beta = alloc.beta
    cee = cee_variance(alloc.alpha, nu_sq, cfg.noise_power)

    signal = cfg.M * (nu_sq - cee) * beta
    # iui_k sums payloads of users decoded after k; residual_k those up to k
    w = nu_sq * beta
    iui = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
    residual = np.cumsum(cee * beta)
    asinr = signal / (iui + residual + cfg.noise_power)
    return AsinrBreakdown(signal=signal, iui=iui, residual=residual, asinr=asinr)


class InstantaneousSinr(NamedTuple):
    sinr: np.ndarray        # K, linear; 0 where degenerate
    degenerate: np.ndarray  # K, bool; h_hat_k == 0 exactly


def sinr_terms(
    H: np.ndarray, H_hat: np.ndarray, beta: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-user (s, G, Q) for one frame; zeros where h_hat_k == 0.

    Kept separate from the link simulator's block-vectorized accumulation
    so the two paths can be checked against each other.
    """
    K = H.shape[1]
    eps = H - H_hat
    s = np.zeros(K)
    G = np.zeros(K)
    Q = np.zeros(K)
    for k in range(K):
        h_hat_k = H_hat[:, k]
        n2 = float(np.real(h_hat_k.conj() @ h_hat_k))
        if n2 == 0.0:
            continue
        s[k] = n2 * beta[k]
        cross = np.abs(h_hat_k.conj() @ H) ** 2         # |h_hat_k^H h_l|^2
        ecross = np.abs(h_hat_k.conj() @ eps) ** 2      # |h_hat_k^H eps_l|^2
        G[k] = float(cross[k + 1:] @ beta[k + 1:]) / n2
        Q[k] = float(ecross[: k + 1] @ beta[: k + 1]) / n2
    return s, G, Q


def instantaneous_sinr(
    H: np.ndarray,
    est: EstimationResult,
    alloc: PowerAllocation,
    noise_power: float,
) -> InstantaneousSinr:
    """Post-MRC SINR of each user for one frame.

    A zero estimate (possible only with alpha_k = 0) makes the quadratic
    forms 0/0; the SINR is defined as 0 there and flagged degenerate.
    """
    s, G, Q = sinr_terms(H, est.H_hat, alloc.beta)
    norms = np.real(np.sum(np.abs(est.H_hat) ** 2, axis=0))
    degenerate = norms == 0.0
    sinr = np.where(degenerate, 0.0, s / (G + Q + noise_power))
    return InstantaneousSinr(sinr=sinr, degenerate=degenerate)


@dataclass(frozen=True)
class Theorem1Stats:
    """Sample statistics of phi = y^H x / ||y|| against its claimed law.

    phi should be CN(0, sigma_x_sq) and independent of y for x drawn
    CN(0, sigma_x_sq I) independent of y, whatever the law of y.
    """

    mean: complex            # sample mean of phi
    variance: float          # sample variance of phi about its mean
    corr_abs2: float         # sample corr of |phi|^2 with ||y||^2
    n_samples: int


def theorem1_sample(
    sigma_x_sq: float, M: int, n_samples: int, rng: np.random.Generator
) -> Theorem1Stats:
    """Draw (x, y) pairs and summarize phi = y^H x / ||y||.

    y is intentionally non-Gaussian (lognormal modulus, uniform phase) so
    the independence claim is exercised away from the Gaussian special
    case. Draws are chunked to bound memory at large n_samples.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    chunk = 200_000
    phis = []
    ynorms = []
    remaining = n_samples
    while remaining > 0:
        n = min(chunk, remaining)
        remaining -= n
        xr = rng.standard_normal((n, M))
        xi = rng.standard_normal((n, M))
        x = (xr + 1j * xi) * np.sqrt(sigma_x_sq / 2.0)
        mod = np.exp(rng.standard_normal((n, M)))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=(n, M))
        y = mod * np.exp(1j * phase)
        ynorm = np.linalg.norm(y, axis=1)
        phi = np.sum(y.conj() * x, axis=1) / ynorm
        phis.append(phi)
        ynorms.append(ynorm)
    phi = np.concatenate(phis)
    ynorm = np.concatenate(ynorms)

    mean = complex(np.mean(phi))
    variance = float(np.mean(np.abs(phi - mean) ** 2))
    a = np.abs(phi) ** 2
    b = ynorm**2
    corr = float(np.corrcoef(a, b)[0, 1])
    return Theorem1Stats(mean=mean, variance=variance, corr_abs2=corr, n_samples=n_samples)
