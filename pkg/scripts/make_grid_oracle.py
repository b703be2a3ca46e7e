#!/usr/bin/env python3
"""Regenerate the cached two-user brute-force optimality fixture.

The fixture pins the refined-grid optimum of the desk scenario in
noma_jpa.verify.k2_reference_scenario; the verify suite compares the GP
solver against it. Rerun this script only if the desk scenario or the
grid parameters change, then commit the updated JSON.
"""
import json
import time
from pathlib import Path

from noma_jpa.verify import grid_search_k2, k2_reference_scenario

OUT = Path(__file__).resolve().parents[1] / "src" / "noma_jpa" / "data" / "k2_grid_oracle.json"


def main():
    cfg, profile = k2_reference_scenario()
    t0 = time.time()
    result = grid_search_k2(cfg, profile, n=64, rounds=4)
    elapsed = time.time() - t0
    payload = {
        "scenario": {
            "M": cfg.M, "K": cfg.K, "T": cfg.T, "D": cfg.D,
            "noise_power": cfg.noise_power, "E_max": cfg.E_max,
            "gamma": cfg.gamma, "weights": cfg.weights.tolist(),
            "nu_sq": profile.nu_sq.tolist(),
        },
        "grid": {"n": result["n"], "rounds": result["rounds"]},
        "lambda_star": result["lambda_star"],
        "alpha": result["alpha"],
        "beta": result["beta"],
        "generator_runtime_s": round(elapsed, 2),
    }
    OUT.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {OUT}")
    print(f"lambda_star = {result['lambda_star']:.8f} in {elapsed:.1f}s")


if __name__ == "__main__":
    main()
