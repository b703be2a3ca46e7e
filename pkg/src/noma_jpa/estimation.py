"""MMSE channel estimation and channel-estimation-error statistics.

With orthonormal pilot rows the per-user MMSE estimator collapses to a
scalar shrinkage of the matched-filter output,

    h_hat_k = w_k * (Y_p @ pilots^H)[:, k],
    w_k     = sqrt(alpha_k) * nu_k^2 / (sigma^2 + alpha_k * nu_k^2),

and the per-antenna error variance is

    cee_var_k = sigma^2 * nu_k^2 / (sigma^2 + alpha_k * nu_k^2).

That collapse is itself worth testing, so the full matrix-form estimator
(general pilot Gram, O(T^3)) is kept here as an independent oracle; the
scalar path is the production code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LargeScaleProfile, PowerAllocation

__all__ = [
    "EstimationResult",
    "cee_variance",
    "mmse_weights",
    "estimate",
    "estimate_matrix_form",
]

_GRAM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EstimationResult:
    H_hat: np.ndarray      # complex, M x K, MMSE channel estimates
    cee_var: np.ndarray    # K, per-antenna error variance sigma_k^2


def cee_variance(alpha: np.ndarray, nu_sq: np.ndarray, noise_power: float) -> np.ndarray:
    """sigma_k^2 = sigma^2 nu_k^2 / (sigma^2 + alpha_k nu_k^2)."""
    alpha = np.asarray(alpha, dtype=float)
    nu_sq = np.asarray(nu_sq, dtype=float)
    return noise_power * nu_sq / (noise_power + alpha * nu_sq)


def mmse_weights(alpha: np.ndarray, nu_sq: np.ndarray, noise_power: float) -> np.ndarray:
    """Shrinkage weights applied to the pilot matched-filter output."""
    alpha = np.asarray(alpha, dtype=float)
    nu_sq = np.asarray(nu_sq, dtype=float)
    return np.sqrt(alpha) * nu_sq / (noise_power + alpha * nu_sq)


def _check_pilots(pilots: np.ndarray) -> None:
    K = pilots.shape[0]
    gram = pilots @ pilots.conj().T
    dev = np.max(np.abs(gram - np.eye(K)))
    if dev > _GRAM_TOL:
        raise ValueError(f"pilot rows are not orthonormal (Gram deviation {dev:.3e})")


def estimate(
    Y_p: np.ndarray,
    pilots: np.ndarray,
    alloc: PowerAllocation,
    profile: LargeScaleProfile,
    noise_power: float,
) -> EstimationResult:
    """Per-user scalar MMSE estimate from the pilot observation Y_p (M x T).

    alpha_k = 0 gives h_hat_k = 0 (the prior mean) and cee_var_k = nu_k^2:
    with no pilot energy the estimator has nothing to go on.
    """
    _check_pilots(pilots)
    w = mmse_weights(alloc.alpha, profile.nu_sq, noise_power)
    H_hat = (Y_p @ pilots.conj().T) * w[None, :]
    return EstimationResult(H_hat=H_hat, cee_var=cee_variance(alloc.alpha, profile.nu_sq, noise_power))


def estimate_matrix_form(
    Y_p: np.ndarray,
    pilots: np.ndarray,
    alloc: PowerAllocation,
    profile: LargeScaleProfile,
    noise_power: float,
    M: int,
) -> EstimationResult:
    """Full matrix MMSE estimator, used as a cross-check oracle.

    With R_H = M diag(nu^2) (independent users, M antennas stacked),
    Lam = diag(sqrt(alpha)):

        Phi   = pilots^H Lam R_H Lam pilots + sigma^2 M I_T
        A     = pilots^H Lam R_H
        H_hat = Y_p Phi^{-1} A
        sigma_k^2 = nu_k^2 - (1/M) A_k^H Phi^{-1} A_k

    For orthonormal pilot rows this equals the scalar form exactly.
    """
    _check_pilots(pilots)
    K = profile.K
    T = pilots.shape[1]
    lam = np.sqrt(alloc.alpha)
    R_H = M * np.diag(profile.nu_sq)
    LamP = lam[:, None] * pilots                       # Lam @ pilots, K x T
    Phi = LamP.conj().T @ R_H @ LamP + noise_power * M * np.eye(T)
    A = LamP.conj().T @ R_H                            # T x K
    Phi_inv_A = np.linalg.solve(Phi, A)
    H_hat = Y_p @ Phi_inv_A
    quad = np.real(np.sum(A.conj() * Phi_inv_A, axis=0))   # A_k^H Phi^{-1} A_k
    cee_var = profile.nu_sq - quad / M
    return EstimationResult(H_hat=H_hat, cee_var=cee_var)
