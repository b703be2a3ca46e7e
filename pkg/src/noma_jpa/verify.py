"""Self-contained oracle suite.

Each check here validates one load-bearing piece of the package against an
independent computation: the combining statistic's distribution claim, the
scalar MMSE shortcut against the full matrix estimator, the closed-form
ASINR against a genie-mode Monte Carlo run, and the GP solver against a
cached brute-force grid search on a two-user desk scenario.

``fault`` is a deliberate sabotage hook for testing the harness itself:
"asinr-numerator" inflates the analytic signal term by 5%, which must trip
the ASINR check.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib.resources import files

import numpy as np

from . import seeds
from .estimation import estimate, estimate_matrix_form
from .channel import pilot_matrix
from .linksim import SimJob, run
from .model import LargeScaleProfile, PowerAllocation, SystemConfig, validate_config
from .optimizer import solve_jpa
from .sinr import asinr_closed_form, theorem1_sample

__all__ = [
    "CheckResult",
    "check_theorem1",
    "check_estimator_equivalence",
    "check_asinr_vs_mc",
    "check_k2_grid",
    "run_all",
    "grid_search_k2",
    "load_k2_fixture",
]

FAULTS = (None, "asinr-numerator")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


# ---------------------------------------------------------------------------
# combining statistic


def check_theorem1(seed: int = 0, n_samples: int = 1_000_000) -> CheckResult:
    """phi = y^H x / ||y|| must be CN(0, sigma_x^2) independent of y."""
    sigma_x_sq = 1.7
    M = 3
    stats = theorem1_sample(sigma_x_sq, M, n_samples, seeds.substream(seed, seeds.THEOREM))
    sx = np.sqrt(sigma_x_sq)
    mean_bound = 3.0 * sx / np.sqrt(n_samples)
    corr_bound = 3.0 / np.sqrt(n_samples)
    mean_ok = abs(stats.mean) < mean_bound
    var_ok = abs(stats.variance / sigma_x_sq - 1.0) < 0.01
    corr_ok = abs(stats.corr_abs2) < corr_bound
    detail = (
        f"|mean|={abs(stats.mean):.3e} (<{mean_bound:.3e}), "
        f"var/target-1={stats.variance / sigma_x_sq - 1.0:+.3e} (|.|<1e-2), "
        f"corr={stats.corr_abs2:+.3e} (|.|<{corr_bound:.3e})"
    )
    return CheckResult("theorem1-stats", mean_ok and var_ok and corr_ok, detail)


# ---------------------------------------------------------------------------
# estimator equivalence


def check_estimator_equivalence(seed: int = 0, n_scenarios: int = 50) -> CheckResult:
    """Scalar MMSE shortcut vs full matrix estimator, 1e-10 relative."""
    rng = seeds.substream(seed, seeds.MISC, 0)
    worst = 0.0
    for i in range(n_scenarios):
        K = int(rng.integers(1, 5))
        T = int(rng.integers(K, 9))
        M = int(rng.choice([1, 2, 4]))
        nu_sq = np.exp(rng.normal(0.0, 1.0, size=K))
        noise = float(np.exp(rng.normal(0.0, 1.0)))
        alpha = np.exp(rng.normal(0.0, 1.0, size=K))
        if i % 5 == 0 and K > 1:
            alpha[int(rng.integers(0, K))] = 0.0   # exercise the no-pilot edge
        beta = np.exp(rng.normal(0.0, 1.0, size=K))
        profile = LargeScaleProfile(np.sort(nu_sq)[::-1])
        alloc = PowerAllocation(alpha=alpha, beta=beta)
        pilots = pilot_matrix(K, T)
        Y_p = rng.standard_normal((M, T)) + 1j * rng.standard_normal((M, T))

        scalar = estimate(Y_p, pilots, alloc, profile, noise)
        matrix = estimate_matrix_form(Y_p, pilots, alloc, profile, noise, M)
        h_scale = max(float(np.max(np.abs(matrix.H_hat))), 1e-300)
        dh = float(np.max(np.abs(scalar.H_hat - matrix.H_hat))) / h_scale
        dv = float(np.max(np.abs(scalar.cee_var - matrix.cee_var) / profile.nu_sq))
        worst = max(worst, dh, dv)
    passed = worst <= 1e-10
    return CheckResult(
        "estimator-equivalence", passed, f"worst relative deviation {worst:.3e} (<=1e-10)"
    )


# ---------------------------------------------------------------------------
# closed-form ASINR vs Monte Carlo


def _mc_reference_scenario() -> tuple[SystemConfig, LargeScaleProfile, PowerAllocation]:
    cfg = SystemConfig(
        M=2, K=4, T=4, D=96,
        noise_power=1e-13, E_max=20.0, gamma=10.0 ** 0.5,
        weights=np.array([0.125, 0.125, 0.25, 0.5]),
    )
    profile = LargeScaleProfile(np.array([4.0e-10, 1.6e-10, 6.0e-11, 2.5e-11]))
    p = cfg.E_max / (cfg.T + cfg.D)
    alloc = PowerAllocation(alpha=np.full(4, p), beta=np.full(4, p))
    return cfg, profile, alloc


def check_asinr_vs_mc(
    seed: int = 0, n_frames: int = 100_000, fault: str | None = None, workers: int = 1
) -> CheckResult:
    """Term-wise closed form vs genie-mode simulation, 2% per user and term."""
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    cfg, profile, alloc = _mc_reference_scenario()
    bd = asinr_closed_form(alloc, profile, cfg)
    signal = bd.signal * (1.05 if fault == "asinr-numerator" else 1.0)

    job_seed = int(seeds.sequence(seed, seeds.MISC, 1).generate_state(1, dtype=np.uint64)[0])
    rep = run(
        SimJob(cfg=cfg, profile=profile, alloc=alloc, n_frames=n_frames,
               sic_mode="genie-data", seed=job_seed),
        workers=workers,
    )
    analytic_asinr = signal / (bd.iui + bd.residual + cfg.noise_power)

    def rel_err(emp: np.ndarray, ref: np.ndarray) -> np.ndarray:
        # a structurally zero term (e.g. no interferers after the last
        # user) must come back exactly zero from the simulation too
        out = np.where(ref == 0.0, np.where(emp == 0.0, 0.0, np.inf), 0.0)
        nz = ref != 0.0
        out = out.astype(float)
        out[nz] = np.abs(emp[nz] / ref[nz] - 1.0)
        return out

    rel = np.stack(
        [
            rel_err(rep.emp_signal, signal),
            rel_err(rep.emp_iui, bd.iui),
            rel_err(rep.emp_residual, bd.residual),
            rel_err(rep.empirical_asinr, analytic_asinr),
        ]
    )
    worst = float(np.max(rel))
    passed = worst <= 0.02
    return CheckResult(
        "asinr-closed-form-vs-mc",
        passed,
        f"worst per-user/per-term relative error {worst:.4f} (<=0.02) at {n_frames} frames",
    )


# ---------------------------------------------------------------------------
# K=2 brute-force optimality


def grid_search_k2(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    n: int = 40,
    rounds: int = 3,
) -> dict:
    """Zoomed exhaustive search over (energy fraction, pilot split) per user.

    Parametrization: user k spends e_k * E_max of energy, a fraction s_k of
    it on pilots: alpha_k = s_k e_k E / T, beta_k = (1 - s_k) e_k E / D.
    This covers the whole feasible box of the two-user problem. Each round
    evaluates an n^4 grid and zooms into 1.5 cells around the incumbent;
    the objective is the min weighted ASINR with the gamma floor enforced.
    The underlying problem is convex after a log change of variables, so
    zooming cannot lock onto a spurious basin.
    """
    if cfg.K != 2 or profile.K != 2:
        raise ValueError("grid_search_k2 is specialized to K=2")
    M, T, D, E, sig2, gamma = cfg.M, cfg.T, cfg.D, cfg.E_max, cfg.noise_power, cfg.gamma
    nu1, nu2 = float(profile.nu_sq[0]), float(profile.nu_sq[1])
    c1, c2 = float(cfg.weights[0]), float(cfg.weights[1])

    lo = np.array([1e-3, 0.0, 1e-3, 0.0])     # e1, s1, e2, s2
    hi = np.array([1.0, 0.995, 1.0, 0.995])
    best = {"objective": -np.inf}
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], n) for i in range(4)]
        e1, s1, e2, s2 = np.meshgrid(*axes, indexing="ij", sparse=True)
        a1 = s1 * e1 * E / T
        b1 = (1.0 - s1) * e1 * E / D
        a2 = s2 * e2 * E / T
        b2 = (1.0 - s2) * e2 * E / D
        cee1 = sig2 * nu1 / (sig2 + a1 * nu1)
        cee2 = sig2 * nu2 / (sig2 + a2 * nu2)
        A1 = M * (nu1 - cee1) * b1 / (nu2 * b2 + cee1 * b1 + sig2)
        A2 = M * (nu2 - cee2) * b2 / (cee1 * b1 + cee2 * b2 + sig2)
        obj = np.minimum(c1 * A1, c2 * A2)
        obj = np.where((A1 >= gamma) & (A2 >= gamma), obj, -np.inf)
        flat = int(np.argmax(obj))
        idx = np.unravel_index(flat, obj.shape)
        val = float(obj[idx])
        if val > best["objective"]:
            point = np.array([float(axes[i][idx[i]]) for i in range(4)])
            best = {
                "objective": val,
                "e": [point[0], point[2]],
                "s": [point[1], point[3]],
            }
        if "e" not in best:
            raise ValueError("no feasible point on the coarse grid; gamma too high?")
        # zoom: 1.5 coarse cells around the incumbent, clipped to the box
        cell = (hi - lo) / (n - 1)
        center = np.array([best["e"][0], best["s"][0], best["e"][1], best["s"][1]])
        lo = np.maximum(lo, center - 1.5 * cell)
        hi = np.minimum(hi, center + 1.5 * cell)

    e = np.array(best["e"])
    s = np.array(best["s"])
    alpha = s * e * E / T
    beta = (1.0 - s) * e * E / D
    return {
        "lambda_star": best["objective"],
        "alpha": alpha.tolist(),
        "beta": beta.tolist(),
        "n": n,
        "rounds": rounds,
    }


def k2_reference_scenario() -> tuple[SystemConfig, LargeScaleProfile]:
    """Two-user desk scenario behind the cached brute-force fixture."""
    cfg = SystemConfig(
        M=2, K=2, T=2, D=18,
        noise_power=0.05, E_max=10.0, gamma=1.0,
        weights=np.array([1.0 / 3.0, 2.0 / 3.0]),
    )
    profile = LargeScaleProfile(np.array([2.0, 0.5]))
    return cfg, profile


def load_k2_fixture() -> dict:
    return json.loads((files("noma_jpa.data") / "k2_grid_oracle.json").read_text())


def check_k2_grid(tol: float = 0.005) -> CheckResult:
    """Solver optimum vs the cached refined-grid brute force, 0.5%."""
    fix = load_k2_fixture()
    cfg, profile = k2_reference_scenario()
    # integrity guard: the stored allocation must reproduce the stored value
    alloc = PowerAllocation(alpha=np.array(fix["alpha"]), beta=np.array(fix["beta"]))
    bd = asinr_closed_form(alloc, profile, cfg)
    lam_from_point = float(np.min(cfg.weights * bd.asinr))
    if abs(lam_from_point / fix["lambda_star"] - 1.0) > 1e-9:
        return CheckResult(
            "k2-grid-optimality", False,
            "fixture is internally inconsistent; regenerate scripts/make_grid_oracle.py",
        )
    sol = solve_jpa(cfg, profile)
    if sol.status != "optimal":
        return CheckResult("k2-grid-optimality", False, f"solver status {sol.status}")
    rel = abs(sol.lambda_star / fix["lambda_star"] - 1.0)
    return CheckResult(
        "k2-grid-optimality",
        rel <= tol,
        f"solver {sol.lambda_star:.6f} vs grid {fix['lambda_star']:.6f}, rel {rel:.2e} (<= {tol})",
    )


def run_all(
    seed: int = 0, n_frames: int = 100_000, fault: str | None = None, workers: int = 1
) -> list[CheckResult]:
    return [
        check_theorem1(seed),
        check_estimator_equivalence(seed),
        check_asinr_vs_mc(seed, n_frames=n_frames, fault=fault, workers=workers),
        check_k2_grid(),
    ]
