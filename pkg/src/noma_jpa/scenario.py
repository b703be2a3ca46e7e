"""Flat key=value scenario files.

Format: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines ignored. Keys are fixed; anything unknown is rejected loudly so a
typo cannot silently fall back to a default. Lists are comma separated.

    antennas          int, receive antennas M
    users             int, K
    pilot_symbols     int, T (>= K)
    data_symbols      int, D
    noise_dbm         noise power in dBm  (XOR noise_power_watts)
    noise_power_watts noise power in watts
    e_max_joules      per-user frame energy budget
    gamma_db          ASINR floor in dB   (XOR gamma_linear)
    gamma_linear      ASINR floor, linear
    weights           K comma-separated positive floats, non-decreasing
    symbol_duration   optional, seconds, default 1.0

Large-scale fading comes from exactly one of:

    nu_sq             K comma-separated linear gains (explicit profile)
    cell_radius_m     draw a random drop in a disc of this radius,
    min_distance_m      optional exclusion radius (default 35),
    shadowing_std_db    optional lognormal shadowing (default 0)

dB and dBm values are converted to linear exactly once, here.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import seeds
from .channel import CellGeometry, draw_user_drop
from .model import LargeScaleProfile, Scenario, SystemConfig, validate_config

__all__ = [
    "KNOWN_KEYS",
    "parse_scenario_text",
    "parse_scenario",
    "apply_overrides",
    "build_scenario",
]


def _floats(s: str) -> list[float]:
    return [float(tok) for tok in s.split(",") if tok.strip() != ""]


KNOWN_KEYS = {
    "antennas": int,
    "users": int,
    "pilot_symbols": int,
    "data_symbols": int,
    "noise_dbm": float,
    "noise_power_watts": float,
    "e_max_joules": float,
    "gamma_db": float,
    "gamma_linear": float,
    "weights": _floats,
    "symbol_duration": float,
    "nu_sq": _floats,
    "cell_radius_m": float,
    "min_distance_m": float,
    "shadowing_std_db": float,
}

_REQUIRED = ("antennas", "users", "pilot_symbols", "data_symbols", "e_max_joules", "weights")


def parse_scenario_text(text: str) -> dict:
    """Parse config text to a dict of typed values. Raises on bad input."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ValueError(
                f"line {lineno}: unknown key {key!r} (known: {', '.join(sorted(KNOWN_KEYS))})"
            )
        if key in raw:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        try:
            raw[key] = KNOWN_KEYS[key](value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return raw


def parse_scenario(path: str | Path) -> dict:
    return parse_scenario_text(Path(path).read_text())


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply repeatable 'key=value' overrides on top of a parsed file."""
    out = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ValueError(f"unknown override key {key!r}")
        out[key] = KNOWN_KEYS[key](value.strip())
    return out


def _exactly_one(raw: dict, keys: tuple[str, ...], what: str) -> str:
    present = [k for k in keys if k in raw]
    if len(present) != 1:
        raise ValueError(f"need exactly one of {keys} for {what}, got {present or 'none'}")
    return present[0]


def build_scenario(raw: dict, seed: int) -> tuple[Scenario, bool]:
    """Turn parsed key=values into a validated Scenario.

    Returns (scenario, drop_was_drawn). When the profile comes from cell
    geometry, the drop uses the (seed, DROP) substream, so the same seed
    always produces the same users.
    """
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ValueError(f"missing required keys: {', '.join(missing)}")

    noise_key = _exactly_one(raw, ("noise_dbm", "noise_power_watts"), "noise power")
    noise_power = (
        10.0 ** (raw["noise_dbm"] / 10.0) * 1e-3 if noise_key == "noise_dbm" else raw["noise_power_watts"]
    )
    gamma_key = _exactly_one(raw, ("gamma_db", "gamma_linear"), "the ASINR floor")
    gamma = 10.0 ** (raw["gamma_db"] / 10.0) if gamma_key == "gamma_db" else raw["gamma_linear"]

    cfg = SystemConfig(
        M=raw["antennas"],
        K=raw["users"],
        T=raw["pilot_symbols"],
        D=raw["data_symbols"],
        noise_power=noise_power,
        E_max=raw["e_max_joules"],
        gamma=gamma,
        weights=np.asarray(raw["weights"], dtype=float),
        symbol_duration=raw.get("symbol_duration", 1.0),
    )

    profile_key = _exactly_one(raw, ("nu_sq", "cell_radius_m"), "the large-scale profile")
    if profile_key == "nu_sq":
        for geo_key in ("min_distance_m", "shadowing_std_db"):
            if geo_key in raw:
                raise ValueError(f"{geo_key} only makes sense with cell_radius_m")
        profile = LargeScaleProfile(np.asarray(raw["nu_sq"], dtype=float))
        drew = False
    else:
        geom = CellGeometry(
            radius=raw["cell_radius_m"],
            min_distance=raw.get("min_distance_m", 35.0),
            shadowing_std_db=raw.get("shadowing_std_db", 0.0),
        )
        profile = draw_user_drop(geom, cfg.K, seeds.substream(seed, seeds.DROP))
        drew = True
    return validate_config(cfg, profile), drew
