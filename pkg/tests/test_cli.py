import json
from math import pi

import pytest

from crosscav.cli import main
from crosscav.liouvillian import SymmetricDecayParameters
from crosscav.validate import check_dfs_preservation


def run_cli(args):
    return main(args)


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(["--version"])
    assert exc.value.code == 0


def test_unknown_command_exit_1(capsys):
    assert run_cli(["frobnicate"]) == 1
    assert "error:" in capsys.readouterr().err


def test_sweep_phi_schema(capsys):
    assert run_cli(["sweep-phi", "--points", "5", "--r-list", "250,750"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0].startswith("# crosscav-")
    assert lines[1] == "phi_rad,r_per_s,p_e,engine"
    rows = [l.split(",") for l in lines[2:]]
    assert len(rows) == 10  # 2 r values x 5 points
    for row in rows:
        assert len(row) == 4
        assert row[3] == "analytic"
        assert 0.0 <= float(row[2]) <= 1.0


def test_sweep_time_schema(capsys):
    assert run_cli(["sweep-time", "--points", "4", "--r-list", "1000"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[1] == "T_s,r_per_s,p_e_r,p_e_nr,D,engine"
    first = lines[2].split(",")
    assert float(first[0]) == 0.0
    assert float(first[4]) == pytest.approx(0.0, abs=1e-15)  # D(0) = 0
    for line in lines[2:]:
        f = line.split(",")
        assert float(f[4]) == pytest.approx(float(f[2]) - float(f[3]), abs=1e-14)


def test_output_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep-phi", "--points", "11", "--r-list", "600", "--jobs", "3"]
    assert run_cli(args + ["--out", str(a)]) == 0
    assert run_cli(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_engines_agree(capsys):
    assert (
        run_cli(
            ["sweep-phi", "--points", "7", "--r-list", "800", "--engine", "both"]
        )
        == 0
    )
    lines = capsys.readouterr().out.strip().split("\n")[2:]
    analytic = [l.split(",") for l in lines if l.endswith(",analytic")]
    simulated = [l.split(",") for l in lines if l.endswith(",simulated")]
    assert len(analytic) == len(simulated) == 7
    for ra, rs in zip(analytic, simulated):
        assert ra[:2] == rs[:2]
        assert abs(float(ra[2]) - float(rs[2])) < 1e-6


def write_config(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_simulate_zero_dissipation(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "decay": {"k": 0.0, "r": 0.0, "gamma": 0.0},
            "protocol": {"theta": 2.0, "phi": 1.0, "T": 1e-3, "kind": "two_cavity"},
        },
    )
    assert run_cli(["simulate", "--config", cfg]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["p_e"] == pytest.approx(1.0, abs=1e-9)
    assert result["p_e_analytic"] == pytest.approx(1.0, abs=1e-12)
    assert result["prep_fidelity"] >= 1 - 1e-9
    assert result["config"]["protocol"]["kind"] == "two_cavity"


def test_simulate_single_cavity(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "decay": {"k": 1000.0, "r": 1000.0, "gamma": pi / 2},
            "protocol": {"T": 1e-3, "kind": "single_cavity", "variant": "resonant",
                         "engine": "simulated"},
        },
    )
    assert run_cli(["simulate", "--config", cfg]) == 0
    result = json.loads(capsys.readouterr().out)
    assert "p_e_analytic" not in result
    assert result["p_e"] == pytest.approx(1.0, abs=1e-6)


def test_simulate_requires_config(capsys):
    assert run_cli(["simulate"]) == 1
    assert "config" in capsys.readouterr().err


def test_bad_config_fields_exit_1(tmp_path, capsys):
    bad = [
        {"decay": {"k": -5.0}},
        {"decay": {"k": 100.0, "r": 200.0}},
        {"protocol": {"kind": "three_cavity"}},
        {"protocol": {"G": 0.0}},
    ]
    for cfg in bad:
        path = write_config(tmp_path, cfg)
        assert run_cli(["simulate", "--config", path]) == 1
        assert "error:" in capsys.readouterr().err


def test_bad_json_exit_1(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run_cli(["sweep-phi", "--config", str(path)]) == 1


def test_validate_zero_dissipation_profile(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run_cli(["validate", "--profile", "zero-dissipation", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert all(c["passed"] for c in report["checks"])
    err = capsys.readouterr().err
    assert "[pass]" in err and "FAIL" not in err


def test_validate_exit_2_on_failure(monkeypatch, capsys):
    import crosscav.cli as cli

    fake = {
        "passed": False,
        "profile": "default",
        "checks": [
            {"name": "stub", "passed": False, "max_deviation": 1.0, "tolerance": 1e-6}
        ],
    }
    monkeypatch.setattr(cli, "run_validation", lambda profile: dict(fake))
    assert run_cli(["validate"]) == 2
    assert "[FAIL] stub" in capsys.readouterr().err


def test_dfs_check_mutation_hook_fails():
    params = SymmetricDecayParameters(1000.0, 1000.0, pi / 2)
    good = check_dfs_preservation(params, T=2e-4)
    assert good["passed"]
    mutated = check_dfs_preservation(params, state_gamma=pi / 2 + pi, T=2e-4)
    assert not mutated["passed"]
