"""End-to-end CLI tests, run in process through main()."""
from pathlib import Path

import pytest

from noma_jpa.cli import main

REPO = Path(__file__).resolve().parents[1]
BASELINE = str(REPO / "scenarios" / "baseline.cfg")

EXPLICIT = """
antennas = 2
users = 4
pilot_symbols = 4
data_symbols = 96
noise_power_watts = 1e-13
e_max_joules = 20
gamma_db = 5
weights = 0.125, 0.125, 0.25, 0.5
nu_sq = 4e-10, 1.6e-10, 6e-11, 2.5e-11
"""


@pytest.fixture
def scen_file(tmp_path):
    p = tmp_path / "scen.cfg"
    p.write_text(EXPLICIT)
    return str(p)


def _read(path: Path) -> list[list[str]]:
    text = path.read_bytes().decode("utf-8")
    assert "\r" not in text
    lines = text.splitlines()
    return [line.split(",") for line in lines]


def test_optimize_all(scen_file, tmp_path, capsys):
    rc = main(["optimize", "--scenario", scen_file, "--out", str(tmp_path)])
    assert rc == 0
    rows = _read(tmp_path / "solutions.csv")
    assert rows[0] == [
        "schema_version", "scheme", "user", "alpha_w", "beta_w",
        "lambda_star", "status", "asinr_db", "jfi_weighted",
    ]
    body = rows[1:]
    assert len(body) == 3 * 4
    assert [r[1] for r in body] == ["epa"] * 4 + ["jpa"] * 4 + ["ppa"] * 4
    assert [r[2] for r in body] == ["1", "2", "3", "4"] * 3
    assert all(r[0] == "1" for r in body)
    statuses = {r[1]: r[6] for r in body}
    assert statuses == {"epa": "fixed", "jpa": "optimal", "ppa": "optimal"}
    lam = {s: float(next(r[5] for r in body if r[1] == s)) for s in ("epa", "jpa", "ppa")}
    assert lam["jpa"] >= lam["ppa"] >= lam["epa"]
    out = capsys.readouterr().out
    assert "jpa: status=optimal" in out


def test_optimize_infeasible_exit_2(scen_file, tmp_path):
    rc = main([
        "optimize", "--scenario", scen_file, "--out", str(tmp_path),
        "--scheme", "jpa", "--set", "gamma_db=50",
    ])
    assert rc == 2
    body = _read(tmp_path / "solutions.csv")[1:]
    assert all(r[6] == "infeasible" and r[3] == "nan" and r[7] == "nan" for r in body)


def test_bad_inputs_exit_1(tmp_path, capsys):
    assert main(["optimize", "--scenario", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 1
    scen = tmp_path / "bad.cfg"
    scen.write_text(EXPLICIT + "bogus = 1\n")
    assert main(["optimize", "--scenario", str(scen), "--out", str(tmp_path)]) == 1
    assert "unknown key" in capsys.readouterr().err
    ok = tmp_path / "ok.cfg"
    ok.write_text(EXPLICIT)
    assert main([
        "simulate", "--scenario", str(ok), "--out", str(tmp_path), "--frames", "0",
    ]) == 1


def test_simulate_byte_identical_and_worker_invariant(scen_file, tmp_path):
    outs = []
    for sub, workers in (("a", "1"), ("b", "1"), ("c", "3")):
        out = tmp_path / sub
        rc = main([
            "simulate", "--scenario", scen_file, "--out", str(out),
            "--frames", "2000", "--seed", "9", "--workers", workers,
        ])
        assert rc == 0
        outs.append((out / "simreport.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    rows = _read(tmp_path / "a" / "simreport.csv")
    assert rows[0][0] == "schema_version"
    body = rows[1:]
    assert len(body) == 3 * 4
    assert all(r[9] == "true" for r in body)
    # empirical within 1 dB of analytic at 2k frames for every user
    for r in body:
        assert abs(float(r[5]) - float(r[4])) < 1.0


def test_simulate_infeasible_convention(scen_file, tmp_path):
    rc = main([
        "simulate", "--scenario", scen_file, "--out", str(tmp_path),
        "--scheme", "ppa", "--set", "e_max_joules=1e-4", "--frames", "100",
    ])
    assert rc == 2
    body = _read(tmp_path / "simreport.csv")[1:]
    assert all(r[6] == "0.5" and r[7] == "0" and r[8] == "0" and r[9] == "false" for r in body)


def test_sweep(scen_file, tmp_path):
    rc = main([
        "sweep", "--scenario", scen_file, "--out", str(tmp_path),
        "--scheme", "jpa", "--e-grid", "0.0001:20:19.9999", "--frames", "200",
    ])
    assert rc == 0
    body = _read(tmp_path / "sweep.csv")[1:]
    assert len(body) == 2 * 4
    low = [r for r in body if float(r[2]) < 1]
    high = [r for r in body if float(r[2]) >= 1]
    assert all(r[9] == "false" and r[6] == "0.5" for r in low)
    assert all(r[9] == "true" for r in high)
    assert main([
        "sweep", "--scenario", scen_file, "--out", str(tmp_path),
        "--e-grid", "20:10:5", "--frames", "10",
    ]) == 1


def test_verify_pass_and_fault(tmp_path, capsys):
    # the 2% MC tolerance needs a reasonable frame count to clear
    assert main(["verify", "--frames", "20000", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4 and "FAIL" not in out
    assert main([
        "verify", "--frames", "20000", "--seed", "1",
        "--inject-fault", "asinr-numerator",
    ]) == 3
    assert "FAIL" in capsys.readouterr().out


def test_optimize_on_drawn_drop(tmp_path, capsys):
    rc = main([
        "optimize", "--scenario", BASELINE, "--out", str(tmp_path), "--seed", "23",
        "--scheme", "jpa",
    ])
    assert rc == 0
    assert "drew user drop from seed 23" in capsys.readouterr().out
