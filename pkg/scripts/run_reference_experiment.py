#!/usr/bin/env python3
"""Run the three schemes end to end on a scenario and plot the results.

Writes solutions.csv, simreport.csv, and sweep.csv into --out via the
package CLI, then renders two PNGs (per-user ASINR, BER vs energy
budget) when matplotlib is importable. Plotting is optional; the CSVs
are the deliverable.

Usage:
    python3 scripts/run_reference_experiment.py \
        --scenario scenarios/baseline.cfg --seed 24 --out results/
"""
import argparse
import csv
import sys
from pathlib import Path

from noma_jpa.cli import main as cli_main


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot(out: Path) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed, skipping figures")
        return

    sols = read_rows(out / "simreport.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for scheme, marker in (("epa", "s"), ("ppa", "^"), ("jpa", "o")):
        rows = [r for r in sols if r["scheme"] == scheme]
        users = [int(r["user"]) for r in rows]
        ana = [float(r["asinr_analytic_db"]) for r in rows]
        emp = [float(r["asinr_empirical_db"]) for r in rows]
        ax.plot(users, ana, marker + "-", label=f"{scheme} (analytic)")
        ax.plot(users, emp, marker, mfc="none", label=f"{scheme} (simulated)")
    ax.set_xlabel("user index (decode order)")
    ax.set_ylabel("ASINR [dB]")
    ax.set_xticks(sorted({int(r["user"]) for r in sols}))
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "asinr_per_user.png", dpi=150)

    sweep = read_rows(out / "sweep.csv")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for scheme, marker in (("ppa", "^"), ("jpa", "o")):
        rows = [r for r in sweep if r["scheme"] == scheme]
        by_e: dict[float, list[float]] = {}
        for r in rows:
            by_e.setdefault(float(r["e_max_joules"]), []).append(float(r["ber"]))
        es = sorted(by_e)
        ax.semilogy(es, [sum(by_e[e]) / len(by_e[e]) for e in es], marker + "-",
                    label=scheme)
    ax.set_xlabel("energy budget [J]")
    ax.set_ylabel("mean BER over users")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "ber_vs_energy.png", dpi=150)
    print(f"wrote {out}/asinr_per_user.png and {out}/ber_vs_energy.png")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="scenarios/baseline.cfg")
    ap.add_argument("--seed", type=int, default=24)
    ap.add_argument("--out", default="results")
    ap.add_argument("--frames", type=int, default=100_000)
    ap.add_argument("--sweep-frames", type=int, default=10_000)
    ap.add_argument("--e-grid", default="10:70:10")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    out = Path(args.out)
    common = ["--scenario", args.scenario, "--seed", str(args.seed),
              "--out", str(out), "--workers", str(args.workers)]
    for argv in (
        ["optimize", *common],
        ["simulate", *common, "--frames", str(args.frames)],
        ["sweep", *common, "--frames", str(args.sweep_frames),
         "--e-grid", args.e_grid],
    ):
        rc = cli_main(argv)
        if rc not in (0, 2):
            return rc
    plot(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
