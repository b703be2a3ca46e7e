"""Batch command-line front end.

Commands: optimize, simulate, sweep, verify. Everything is deterministic
under a fixed --seed; outputs are UTF-8 CSV with LF endings, a leading
schema_version column, and a fixed (scheme, E_max, user) row order. All
internal math is linear; dB appears only in the _db output columns.

Exit codes: 0 success; 1 bad configuration or arguments; 2 at least one
requested allocation was infeasible (records are still written); 3 a
verification check failed.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .linksim import SCHEMES, SimJob, run, sweep_energy
from .model import Scenario
from .optimizer import (
    Solution,
    epa_allocation,
    jain_index,
    solve_jpa,
    solve_ppa,
)
from .scenario import apply_overrides, build_scenario, parse_scenario
from .sinr import asinr_closed_form
from .verify import FAULTS, run_all

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3


# ---------------------------------------------------------------------------
# small formatting helpers


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _db(x: float) -> float:
    if x is None or not np.isfinite(x) or x <= 0:
        return float("nan")
    return 10.0 * np.log10(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _load(args) -> Scenario:
    raw = parse_scenario(args.scenario)
    raw = apply_overrides(raw, args.set or [])
    scenario, drew = build_scenario(raw, args.seed)
    if drew:
        print(f"drew user drop from seed {args.seed}: nu_sq = "
              + ", ".join(format(v, ".6g") for v in scenario.profile.nu_sq))
    return scenario


def _schemes(arg: str) -> list[str]:
    if arg == "all":
        return list(SCHEMES)
    return [arg]


def _solve(scheme: str, scenario: Scenario) -> tuple[Solution | None, object]:
    """Returns (solution-or-None, alloc-or-None); EPA has no Solution."""
    cfg, profile = scenario.cfg, scenario.profile
    if scheme == "epa":
        return None, epa_allocation(cfg)
    sol = solve_ppa(cfg, profile) if scheme == "ppa" else solve_jpa(cfg, profile)
    return sol, sol.alloc


# ---------------------------------------------------------------------------
# commands


def cmd_optimize(args) -> int:
    scenario = _load(args)
    cfg, profile = scenario.cfg, scenario.profile
    header = [
        "schema_version", "scheme", "user", "alpha_w", "beta_w",
        "lambda_star", "status", "asinr_db", "jfi_weighted",
    ]
    rows: list[list] = []
    any_infeasible = False
    for scheme in sorted(_schemes(args.scheme)):
        sol, alloc = _solve(scheme, scenario)
        if sol is None:
            bd = asinr_closed_form(alloc, profile, cfg)
            lam = float(np.min(cfg.weights * bd.asinr))
            jfi = jain_index(cfg.weights * bd.asinr)
            status = "fixed"
            asinr = bd.asinr
        elif sol.status == "infeasible":
            any_infeasible = True
            lam, jfi, status, asinr, alloc = float("nan"), float("nan"), sol.status, None, None
        else:
            lam, jfi, status, asinr = sol.lambda_star, sol.jfi_weighted, sol.status, sol.asinr
        for u in range(cfg.K):
            rows.append([
                SCHEMA_VERSION, scheme, u + 1,
                float("nan") if alloc is None else float(alloc.alpha[u]),
                float("nan") if alloc is None else float(alloc.beta[u]),
                lam, status,
                _db(float("nan") if asinr is None else float(asinr[u])),
                jfi,
            ])
        shown = "infeasible" if status == "infeasible" else f"{lam:.6g} ({_db(lam):.2f} dB)"
        print(f"{scheme}: status={status} min weighted asinr={shown}")
    _write_csv(Path(args.out) / "solutions.csv", header, rows)
    return EXIT_INFEASIBLE if any_infeasible else EXIT_OK


_SIM_HEADER = [
    "schema_version", "scheme", "e_max_joules", "user",
    "asinr_analytic_db", "asinr_empirical_db", "ber", "errors", "bits", "feasible",
]


def cmd_simulate(args) -> int:
    scenario = _load(args)
    cfg, profile = scenario.cfg, scenario.profile
    sic_mode = {"genie": "genie-data", "detected": "detected-data"}[args.sic_mode]
    rows: list[list] = []
    any_infeasible = False
    for scheme in sorted(_schemes(args.scheme)):
        sol, alloc = _solve(scheme, scenario)
        if alloc is None:
            any_infeasible = True
            for u in range(cfg.K):
                rows.append([
                    SCHEMA_VERSION, scheme, cfg.E_max, u + 1,
                    float("nan"), float("nan"), 0.5, 0, 0, False,
                ])
            print(f"{scheme}: infeasible, ber set to 0.5 by convention")
            continue
        report = run(
            SimJob(cfg=cfg, profile=profile, alloc=alloc, n_frames=args.frames,
                   sic_mode=sic_mode, seed=args.seed),
            workers=args.workers,
        )
        for u in range(cfg.K):
            a_db = _db(float(report.analytic_asinr[u]))
            e_db = _db(float(report.empirical_asinr[u]))
            rows.append([
                SCHEMA_VERSION, scheme, cfg.E_max, u + 1,
                a_db, e_db,
                float(report.ber[u]), int(report.error_counts[u]),
                int(report.bit_counts[u]), bool(report.feasible),
            ])
            print(f"{scheme} user {u + 1}: analytic {a_db:.3f} dB, "
                  f"empirical {e_db:.3f} dB, delta {e_db - a_db:+.3f} dB, "
                  f"ber {report.ber[u]:.3e}")
    _write_csv(Path(args.out) / "simreport.csv", _SIM_HEADER, rows)
    return EXIT_INFEASIBLE if any_infeasible else EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start_s, stop_s, step_s = spec.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise ValueError(f"--e-grid must be start:stop:step, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise ValueError("--e-grid needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def cmd_sweep(args) -> int:
    scenario = _load(args)
    sic_mode = {"genie": "genie-data", "detected": "detected-data"}[args.sic_mode]
    e_values = _parse_grid(args.e_grid)
    rows_out: list[list] = []
    sweep_rows = sweep_energy(
        scenario.cfg, scenario.profile, e_values,
        schemes=_schemes(args.scheme), n_frames=args.frames,
        seed=args.seed, sic_mode=sic_mode, workers=args.workers,
    )
    for r in sweep_rows:
        rows_out.append([
            SCHEMA_VERSION, r.scheme, r.E_max, r.user,
            _db(r.asinr_analytic), _db(r.asinr_empirical),
            r.ber, r.errors, r.bits, r.feasible,
        ])
    _write_csv(Path(args.out) / "sweep.csv", _SIM_HEADER, rows_out)
    n_infeasible = sum(1 for r in sweep_rows if not r.feasible) // max(scenario.cfg.K, 1)
    print(f"swept {len(e_values)} budgets x {len(_schemes(args.scheme))} schemes; "
          f"{n_infeasible} infeasible points recorded at ber=0.5")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(
        seed=args.seed, n_frames=args.frames, fault=args.inject_fault,
        workers=args.workers,
    )
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{tag}  {r.name:<{width}}  {r.detail}")
    return EXIT_OK if all_ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(sp, scenario_required=True):
    sp.add_argument("--scenario", required=scenario_required, help="path to a key=value scenario file")
    sp.add_argument("--out", default=".", help="output directory for CSV files")
    sp.add_argument("--seed", type=int, default=0, help="root RNG seed (unsigned 64-bit)")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                    help="override a scenario key (repeatable)")
    sp.add_argument("--workers", type=int, default=1,
                    help="thread fan-out; results are identical for any value")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="noma-jpa",
        description="Pilot/payload power allocation and link simulation "
                    "for an uplink MIMO-NOMA MRC-SIC receiver.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("optimize", help="solve allocations and write solutions.csv")
    _add_common(sp)
    sp.add_argument("--scheme", choices=["epa", "ppa", "jpa", "all"], default="all")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("simulate", help="solve then Monte Carlo simulate; writes simreport.csv")
    _add_common(sp)
    sp.add_argument("--scheme", choices=["epa", "ppa", "jpa", "all"], default="all")
    sp.add_argument("--frames", type=int, default=100_000, help="Monte Carlo frames")
    sp.add_argument("--sic-mode", choices=["genie", "detected"], default="detected")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="BER vs energy budget sweep; writes sweep.csv")
    _add_common(sp)
    sp.add_argument("--scheme", choices=["epa", "ppa", "jpa", "all"], default="all")
    sp.add_argument("--frames", type=int, default=10_000, help="Monte Carlo frames per point")
    sp.add_argument("--e-grid", required=True, metavar="START:STOP:STEP",
                    help="energy budgets in joules, e.g. 5:30:5")
    sp.add_argument("--sic-mode", choices=["genie", "detected"], default="detected")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run the self-contained oracle suite")
    _add_common(sp, scenario_required=False)
    sp.add_argument("--frames", type=int, default=100_000,
                    help="Monte Carlo frames for the ASINR check")
    sp.add_argument("--inject-fault", choices=[f for f in FAULTS if f], default=None,
                    help="sabotage hook to prove the harness can fail")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    frames = getattr(args, "frames", None)
    if frames is not None and frames < 1:
        print("error: --frames must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
