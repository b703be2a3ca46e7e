"""Max-min weighted-ASINR pilot/payload allocation via geometric programming.

The joint problem (JPA) maximizes lambda = min_k c_k * ASINR_k over pilot
powers alpha, payload powers beta subject to a per-user energy budget and
a per-user ASINR floor gamma. Substituting

    t_k = sigma^2 nu_k^2 / (sigma^2 + alpha_k nu_k^2)

(the CEE variance as a free variable, alpha_k = sigma^2 (nu_k^2 - t_k) /
(nu_k^2 t_k) recovers the pilot power) turns every constraint into a
posynomial inequality, i.e. a standard GP:

    C1_k: sigma^2 T t_k^-1 + D beta_k            <= sigma^2 T / nu_k^2 + E_max
    C2_k: t_k                                    <= nu_k^2
    C3_k: gamma [ sum_{l>k} nu_l^2 b_l b_k^-1 + sum_{l<=k} t_l b_l b_k^-1
                  + sigma^2 b_k^-1 ] + M t_k     <= M nu_k^2
    C4_k: same posynomial shape with the variable lambda in place of gamma
          and the weight c_k on the M t_k term and the bound.

Constraints are kept as explicit monomial records; translation to a solver
happens in one place, after rescaling all variables to O(1) units (the raw
problem mixes 1e-13 W noise with 1e1 J budgets and is needlessly hard on
interior-point arithmetic). The solve chain is CLARABEL, then SCS with a
tight tolerance, and infeasibility is never declared from a solver status
alone: a slack-minimization phase-1 GP provides the certificate.

PPA is the same program with alpha (hence t) frozen at E_max/(T+D); EPA
fixes alpha = beta = E_max/(T+D) with no optimization at all.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .estimation import cee_variance
from .model import LargeScaleProfile, PowerAllocation, SystemConfig
from .sinr import asinr_closed_form

__all__ = [
    "Monomial",
    "Constraint",
    "GpProblem",
    "mono",
    "eval_monomial",
    "eval_posynomial",
    "constraint_ratios",
    "build_gp",
    "alpha_from_t",
    "t_from_alpha",
    "Solution",
    "solve_jpa",
    "solve_ppa",
    "epa_allocation",
    "jain_index",
]

_FEAS_SLACK_TOL = 1e-8     # phase-1 scale above 1 + this certifies infeasibility
_SOLVERS = (
    ("CLARABEL", {}),
    ("SCS", {"eps": 1e-9, "max_iters": 200_000}),
)


# ---------------------------------------------------------------------------
# posynomial records


@dataclass(frozen=True)
class Monomial:
    """coeff * prod(var**exp); exponents normalized (no zero entries)."""

    coeff: float
    exponents: tuple[tuple[str, float], ...]


def mono(coeff: float, *exps: tuple[str, float]) -> Monomial:
    """Build a monomial, merging repeated variables and dropping exponent 0.

    Merging matters: the l = k cross term t_k b_k b_k^-1 must collapse to
    plain t_k so the record states what the math states.
    """
    if coeff <= 0:
        raise ValueError("monomial coefficients must be positive")
    acc: dict[str, float] = {}
    for var, e in exps:
        acc[var] = acc.get(var, 0.0) + e
    items = tuple(sorted((v, e) for v, e in acc.items() if e != 0.0))
    return Monomial(coeff=float(coeff), exponents=items)


@dataclass(frozen=True)
class Constraint:
    """sum(terms) <= bound with bound > 0."""

    name: str
    terms: tuple[Monomial, ...]
    bound: float


@dataclass(frozen=True)
class GpProblem:
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    objective: str = "lam"     # variable maximized


def eval_monomial(m: Monomial, point: Mapping[str, float]) -> float:
    v = m.coeff
    for var, e in m.exponents:
        v *= point[var] ** e
    return v


def eval_posynomial(terms, point: Mapping[str, float]) -> float:
    return sum(eval_monomial(m, point) for m in terms)


def constraint_ratios(gp: GpProblem, point: Mapping[str, float]) -> dict[str, float]:
    """lhs/bound per constraint; 1.0 means active, > 1 violated."""
    return {c.name: eval_posynomial(c.terms, point) / c.bound for c in gp.constraints}


# ---------------------------------------------------------------------------
# problem construction


def t_from_alpha(alpha: np.ndarray, nu_sq: np.ndarray, noise_power: float) -> np.ndarray:
    return cee_variance(alpha, nu_sq, noise_power)


def alpha_from_t(t: np.ndarray, nu_sq: np.ndarray, noise_power: float) -> np.ndarray:
    """Invert the substitution; t = nu_sq (no pilot power) maps to 0."""
    return noise_power * (nu_sq - t) / (nu_sq * t)


def build_gp(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    fixed_alpha: np.ndarray | None = None,
) -> GpProblem:
    """Posynomial records for the allocation program.

    With ``fixed_alpha`` the t_k become constants folded into coefficients
    (the PPA variant): C2 disappears and C1 reduces to D beta_k <= E_max -
    alpha_k T, computed in exactly that form to avoid cancellation between
    two nearly equal large numbers.
    """
    K, M, T, D = cfg.K, cfg.M, cfg.T, cfg.D
    s2 = cfg.noise_power
    nu = profile.nu_sq
    c = cfg.weights
    joint = fixed_alpha is None
    if not joint:
        t_fixed = t_from_alpha(np.asarray(fixed_alpha, dtype=float), nu, s2)

    def tvar(i):
        return f"t{i + 1}"

    def bvar(i):
        return f"b{i + 1}"

    cons: list[Constraint] = []
    for k in range(K):
        # C1: per-user energy
        if joint:
            cons.append(
                Constraint(
                    name=f"C1_{k + 1}",
                    terms=(mono(s2 * T, (tvar(k), -1.0)), mono(D, (bvar(k), 1.0))),
                    bound=s2 * T / nu[k] + cfg.E_max,
                )
            )
        else:
            headroom = cfg.E_max - fixed_alpha[k] * T
            if headroom <= 0:
                raise ValueError(
                    f"pilot energy alone exceeds the budget for user {k + 1}"
                )
            cons.append(
                Constraint(
                    name=f"C1_{k + 1}",
                    terms=(mono(D, (bvar(k), 1.0)),),
                    bound=headroom,
                )
            )
        # C2: t_k in (0, nu_k^2]; only meaningful when t is free
        if joint:
            cons.append(
                Constraint(name=f"C2_{k + 1}", terms=(mono(1.0, (tvar(k), 1.0)),), bound=nu[k])
            )

    for k in range(K):
        # C3: hard ASINR floor at gamma; C4: epigraph rows for lambda
        c3: list[Monomial] = []
        c4: list[Monomial] = []
        for l in range(k + 1, K):
            c3.append(mono(cfg.gamma * nu[l], (bvar(l), 1.0), (bvar(k), -1.0)))
            c4.append(mono(nu[l], ("lam", 1.0), (bvar(l), 1.0), (bvar(k), -1.0)))
        for l in range(k + 1):
            if joint:
                c3.append(
                    mono(cfg.gamma, (tvar(l), 1.0), (bvar(l), 1.0), (bvar(k), -1.0))
                )
                c4.append(
                    mono(1.0, ("lam", 1.0), (tvar(l), 1.0), (bvar(l), 1.0), (bvar(k), -1.0))
                )
            else:
                c3.append(mono(cfg.gamma * t_fixed[l], (bvar(l), 1.0), (bvar(k), -1.0)))
                c4.append(mono(t_fixed[l], ("lam", 1.0), (bvar(l), 1.0), (bvar(k), -1.0)))
        c3.append(mono(cfg.gamma * s2, (bvar(k), -1.0)))
        c4.append(mono(s2, ("lam", 1.0), (bvar(k), -1.0)))
        if joint:
            c3.append(mono(M, (tvar(k), 1.0)))
            c4.append(mono(M * c[k], (tvar(k), 1.0)))
        else:
            c3.append(mono(M * t_fixed[k]))
            c4.append(mono(M * c[k] * t_fixed[k]))
        cons.append(Constraint(name=f"C3_{k + 1}", terms=tuple(c3), bound=M * nu[k]))
        cons.append(Constraint(name=f"C4_{k + 1}", terms=tuple(c4), bound=M * c[k] * nu[k]))

    variables = tuple(
        ([tvar(i) for i in range(K)] if joint else [])
        + [bvar(i) for i in range(K)]
        + ["lam"]
    )
    return GpProblem(variables=variables, constraints=tuple(cons), objective="lam")


# ---------------------------------------------------------------------------
# solving


@dataclass(frozen=True, eq=False)
class Solution:
    """Result of one allocation solve.

    kkt_residual is the maximum of (a) relative constraint violation of
    the recovered allocation over all rows and (b) the relative mismatch
    between lambda_star and min_k c_k * ASINR_k, so 0 means the returned
    point exactly certifies its own objective value.
    """

    alloc: PowerAllocation | None
    lambda_star: float
    status: str                      # optimal | infeasible | max-iter
    kkt_residual: float
    asinr: np.ndarray | None = None
    c4_gap: np.ndarray | None = None   # per-user slack fraction 1 - lhs/bound
    jfi_weighted: float | None = None
    phase1_scale: float | None = None  # certificate value when phase-1 ran


def _units_for(gp: GpProblem, cfg: SystemConfig, profile: LargeScaleProfile) -> dict[str, float]:
    """O(1) rescaling units per variable: gains by max nu^2, powers by the
    EPA level, lambda and slack dimensionless."""
    g0 = float(np.max(profile.nu_sq))
    p0 = cfg.E_max / (cfg.T + cfg.D)
    units: dict[str, float] = {}
    for v in gp.variables:
        if v.startswith("t"):
            units[v] = g0
        elif v.startswith("b"):
            units[v] = p0
        else:
            units[v] = 1.0
    return units


def _scale_records(gp: GpProblem, units: Mapping[str, float]) -> GpProblem:
    """Rewrite records in scaled variables x' = x / unit (coefficients absorb
    unit**exponent); bounds are unchanged."""
    scaled = []
    for con in gp.constraints:
        terms = []
        for m in con.terms:
            coeff = m.coeff
            for var, e in m.exponents:
                coeff *= units[var] ** e
            terms.append(Monomial(coeff=coeff, exponents=m.exponents))
        scaled.append(Constraint(name=con.name, terms=tuple(terms), bound=con.bound))
    return GpProblem(variables=gp.variables, constraints=tuple(scaled), objective=gp.objective)


def _solve_records(gp: GpProblem, units: Mapping[str, float], minimize: bool = False):
    """Translate records to cvxpy and run the solver chain.

    Returns (status, point, objective) where point maps variable name to
    its physical (unscaled) value. status is 'optimal', 'inaccurate' (best
    point kept), 'infeasible' (solver claim, uncertified), or 'failed'.
    """
    import cvxpy as cp

    sgp = _scale_records(gp, units)
    cpvars = {v: cp.Variable(pos=True, name=v) for v in sgp.variables}

    def expr(m: Monomial):
        e = m.coeff
        for var, p in m.exponents:
            e = e * cpvars[var] ** p
        return e

    constraints = []
    for con in sgp.constraints:
        constraints.append(cp.sum([expr(m) for m in con.terms]) <= con.bound)
    objvar = cpvars[sgp.objective]
    objective = cp.Minimize(objvar) if minimize else cp.Maximize(objvar)
    problem = cp.Problem(objective, constraints)

    best = None   # (status, point, objval)
    for solver, opts in _SOLVERS:
        try:
            problem.solve(gp=True, solver=solver, **opts)
        except cp.SolverError:
            continue
        st = problem.status
        if st in ("optimal", "optimal_inaccurate") and objvar.value is not None:
            point = {v: float(units[v]) * float(cpvars[v].value) for v in sgp.variables}
            rec = (st, point, float(objvar.value) * float(units[sgp.objective]))
            if st == "optimal":
                return ("optimal", rec[1], rec[2])
            if best is None:
                best = ("inaccurate", rec[1], rec[2])
        elif st in ("infeasible", "infeasible_inaccurate") and best is None:
            best = ("infeasible", None, float("nan"))
    if best is not None:
        return best
    return ("failed", None, float("nan"))


def _phase1_scale(gp: GpProblem, units: Mapping[str, float]) -> tuple[str, float, dict | None]:
    """Minimum uniform relaxation of the C3 rows keeping C1/C2 intact.

    Solves min s subject to C3_k <= s * bound_k (written as posynomial *
    s^-1 <= bound, still a GP). s <= 1 means the gamma floor is reachable
    within the energy budget; s > 1 is an infeasibility certificate.
    """
    cons = []
    for con in gp.constraints:
        if con.name.startswith("C4"):
            continue
        if con.name.startswith("C3"):
            terms = tuple(
                Monomial(coeff=m.coeff, exponents=m.exponents + (("s", -1.0),))
                for m in con.terms
            )
            cons.append(Constraint(name=con.name, terms=terms, bound=con.bound))
        else:
            cons.append(con)
    variables = tuple(v for v in gp.variables if v != "lam") + ("s",)
    p1 = GpProblem(variables=variables, constraints=tuple(cons), objective="s")
    u1 = dict(units)
    u1.pop("lam", None)
    u1["s"] = 1.0
    status, point, sval = _solve_records(p1, u1, minimize=True)
    return status, sval, point


def _finish(
    cfg: SystemConfig,
    profile: LargeScaleProfile,
    gp: GpProblem,
    point: dict,
    lam: float,
    status: str,
    phase1_scale: float | None = None,
) -> Solution:
    """Recover the allocation from a solver point and self-certify it."""
    K = cfg.K
    beta = np.array([point[f"b{i + 1}"] for i in range(K)])
    if f"t{1}" in point:
        t = np.array([point[f"t{i + 1}"] for i in range(K)])
        t = np.minimum(t, profile.nu_sq)     # C2 roundoff guard
        alpha = np.maximum(alpha_from_t(t, profile.nu_sq, cfg.noise_power), 0.0)
    else:
        alpha = point["__fixed_alpha__"]
    alloc = PowerAllocation(alpha=alpha, beta=beta)

    # evaluate the records at the point implied by the recovered allocation
    t_eff = t_from_alpha(alloc.alpha, profile.nu_sq, cfg.noise_power)
    eval_point = {f"b{i + 1}": float(beta[i]) for i in range(K)}
    for i in range(K):
        eval_point[f"t{i + 1}"] = float(t_eff[i])
    eval_point["lam"] = lam
    ratios = constraint_ratios(gp, eval_point)
    violation = max(max(r - 1.0, 0.0) for r in ratios.values())

    bd = asinr_closed_form(alloc, profile, cfg)
    lam_check = float(np.min(cfg.weights * bd.asinr))
    lam_mismatch = abs(lam - lam_check) / max(abs(lam_check), 1e-300)
    c4_gap = np.array([1.0 - ratios[f"C4_{i + 1}"] for i in range(K)])

    weighted = cfg.weights * bd.asinr
    return Solution(
        alloc=alloc,
        lambda_star=lam,
        status=status,
        kkt_residual=max(violation, lam_mismatch),
        asinr=bd.asinr,
        c4_gap=c4_gap,
        jfi_weighted=jain_index(weighted),
        phase1_scale=phase1_scale,
    )


def _solve_scheme(
    cfg: SystemConfig, profile: LargeScaleProfile, fixed_alpha: np.ndarray | None
) -> Solution:
    gp = build_gp(cfg, profile, fixed_alpha)
    units = _units_for(gp, cfg, profile)

    status, point, lam = _solve_records(gp, units)
    if status == "optimal":
        if fixed_alpha is not None:
            point["__fixed_alpha__"] = np.asarray(fixed_alpha, dtype=float)
        return _finish(cfg, profile, gp, point, lam, "optimal")

    # not cleanly solved: certify feasibility before saying anything else
    p1_status, s_star, p1_point = _phase1_scale(gp, units)
    certified_infeasible = p1_status in ("optimal", "inaccurate") and s_star > 1.0 + _FEAS_SLACK_TOL
    if certified_infeasible:
        return Solution(
            alloc=None,
            lambda_star=0.0,
            status="infeasible",
            kkt_residual=float("inf"),
            phase1_scale=s_star,
        )
    if status == "inaccurate" and point is not None:
        if fixed_alpha is not None:
            point["__fixed_alpha__"] = np.asarray(fixed_alpha, dtype=float)
        return _finish(cfg, profile, gp, point, lam, "max-iter", phase1_scale=s_star)
    if p1_point is not None and s_star <= 1.0 + _FEAS_SLACK_TOL:
        # feasible by certificate but the epigraph solve failed: return the
        # phase-1 point as a best-effort allocation, honestly labeled.
        if fixed_alpha is not None:
            p1_point["__fixed_alpha__"] = np.asarray(fixed_alpha, dtype=float)
        lam0 = 0.0
        sol = _finish(cfg, profile, gp, p1_point, lam0, "max-iter", phase1_scale=s_star)
        lam_actual = float(np.min(cfg.weights * sol.asinr))
        eval_point = {f"b{i + 1}": float(sol.alloc.beta[i]) for i in range(cfg.K)}
        t_eff = t_from_alpha(sol.alloc.alpha, profile.nu_sq, cfg.noise_power)
        for i in range(cfg.K):
            eval_point[f"t{i + 1}"] = float(t_eff[i])
        eval_point["lam"] = lam_actual
        ratios = constraint_ratios(gp, eval_point)
        violation = max(max(r - 1.0, 0.0) for r in ratios.values())
        return Solution(
            alloc=sol.alloc,
            lambda_star=lam_actual,
            status="max-iter",
            kkt_residual=violation,
            asinr=sol.asinr,
            c4_gap=np.array([1.0 - ratios[f"C4_{i + 1}"] for i in range(cfg.K)]),
            jfi_weighted=sol.jfi_weighted,
            phase1_scale=s_star,
        )
    return Solution(
        alloc=None, lambda_star=0.0, status="max-iter", kkt_residual=float("inf"),
        phase1_scale=s_star if p1_status != "failed" else None,
    )


def solve_jpa(cfg: SystemConfig, profile: LargeScaleProfile) -> Solution:
    """Jointly optimal pilot and payload powers."""
    return _solve_scheme(cfg, profile, None)


def solve_ppa(cfg: SystemConfig, profile: LargeScaleProfile) -> Solution:
    """Payload-only optimization with pilots pinned at the EPA level."""
    alpha = np.full(cfg.K, cfg.E_max / (cfg.T + cfg.D))
    try:
        return _solve_scheme(cfg, profile, alpha)
    except ValueError:
        return Solution(
            alloc=None, lambda_star=0.0, status="infeasible", kkt_residual=float("inf")
        )


def epa_allocation(cfg: SystemConfig) -> PowerAllocation:
    """alpha_k = beta_k = E_max / (T + D): spend the budget evenly."""
    p = cfg.E_max / (cfg.T + cfg.D)
    return PowerAllocation(alpha=np.full(cfg.K, p), beta=np.full(cfg.K, p))


def jain_index(values: np.ndarray) -> float:
    """(sum x)^2 / (K sum x^2), in [1/K, 1]; 1 iff all entries equal."""
    x = np.asarray(values, dtype=float)
    if x.size == 0 or np.any(x < 0):
        raise ValueError("jain_index needs a non-empty, non-negative vector")
    ss = float(np.sum(x**2))
    if ss == 0.0:
        raise ValueError("jain_index undefined for the all-zero vector")
    return float(np.sum(x)) ** 2 / (x.size * ss)
