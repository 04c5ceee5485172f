import math
from pathlib import Path

import pytest

from adiabatic.cli import main
from adiabatic.config import ConfigError, load_network, parse_toml
from adiabatic.report import read_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*argv):
    return main([str(a) for a in argv])


def test_ideal_gas_axioms_pass(tmp_path):
    assert run("check-axioms", "--config", CONFIGS / "ideal_gas.toml", "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "axioms.csv")
    assert rows and all(r["verdict"] == "PASS" for r in rows)


def test_closed_relation_passes(tmp_path):
    assert run("check-axioms", "--config", CONFIGS / "good.rel", "--out", tmp_path) == 0


def test_transitivity_hole_exits_1_with_witness(tmp_path):
    assert run("check-axioms", "--config", CONFIGS / "hole.rel", "--out", tmp_path) == 1
    a2 = next(r for r in read_csv(tmp_path / "axioms.csv") if r["check"] == "A2")
    assert a2["verdict"] == "FAIL"
    assert "X" in a2["witness"] and "Z" in a2["witness"]


def test_missing_file_exits_2(tmp_path):
    assert run("check-axioms", "--config", tmp_path / "nope.toml", "--out", tmp_path) == 2


def test_parse_error_exits_2_with_position(tmp_path, capsys):
    bad = tmp_path / "bad.rel"
    bad.write_text("A -> B\nA -> ?\n")
    assert run("check-axioms", "--config", bad, "--out", tmp_path) == 2
    assert "bad.rel:2:" in capsys.readouterr().err


def test_toml_error_has_line_and_column(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[system.gas]\nkind = \n")
    assert run("build-entropy", "--config", bad, "--out", tmp_path) == 2
    assert "bad.toml:2:" in capsys.readouterr().err
    with pytest.raises(ConfigError) as info:
        parse_toml("a = 1\nb = [\n")
    assert info.value.line >= 2


def test_unknown_command_is_usage_error():
    assert run("frobnicate") == 2


def test_build_entropy_grid(tmp_path):
    assert run("build-entropy", "--config", CONFIGS / "ideal_gas.toml", "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "entropy.csv")
    assert len(rows) == 100
    assert max(float(r["fit_residual"]) for r in rows) <= 1e-6


def test_build_entropy_single_point(tmp_path):
    cfg = tmp_path / "one.toml"
    cfg.write_text('[system.gas]\nkind = "ideal-gas"\n[entropy]\nu = [1.0, 1.0]\nv = [1.0, 1.0]\n'
                   'points = [1, 1]\nx0 = [1.0, 1.0]\nx1 = [4.0, 4.0]\n')
    assert run("build-entropy", "--config", cfg, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "entropy.csv")
    assert len(rows) == 1 and float(rows[0]["lambda"]) == pytest.approx(0.0, abs=1e-9)


def test_build_entropy_out_of_domain(tmp_path, capsys):
    cfg = tmp_path / "far.toml"
    cfg.write_text('[system.gas]\nkind = "ideal-gas"\n[entropy]\nu = [1.0, 5000.0]\nv = [1.0, 2.0]\n'
                   'points = [3, 3]\n')
    assert run("build-entropy", "--config", cfg, "--out", tmp_path) == 1
    assert "2500.5" in capsys.readouterr().err


def test_adiabat_final_energy(tmp_path):
    assert run("adiabat", "--config", CONFIGS / "ideal_gas.toml", "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "adiabat.csv")
    assert float(rows[-1]["V"]) == 8.0
    assert float(rows[-1]["u"]) == pytest.approx(0.25, abs=1e-6)


def test_split(tmp_path):
    assert run("split", "--config", CONFIGS / "split.toml", "--out", tmp_path) == 0
    row = read_csv(tmp_path / "split.csv")[0]
    assert float(row["W"]) == pytest.approx(2.0, abs=1e-6)


def test_carnot_cycle_flag(tmp_path):
    assert run("carnot", "--cycle", 100, 600, -50, 300, "--out", tmp_path) == 0
    row = read_csv(tmp_path / "carnot.csv")[0]
    assert row["allowed"] == "true" and float(row["eta"]) == 0.5


def test_carnot_config_with_audit(tmp_path):
    assert run("carnot", "--config", CONFIGS / "carnot.toml", "--out", tmp_path) == 0
    assert len(read_csv(tmp_path / "audit.csv")) == 2


def test_calibrate_water(tmp_path):
    assert run("calibrate", "--config", CONFIGS / "water.toml", "--out", tmp_path) == 0
    b = {r["node"]: r for r in read_csv(tmp_path / "constants.csv")}
    assert float(b["H"]["B"]) == 0 and float(b["O"]["B"]) == 0
    assert float(b["H2"]["B"]) == pytest.approx(1.0)
    assert (float(b["H2O"]["interval_lo"]), float(b["H2O"]["interval_hi"])) == (-2.0, -1.5)
    assert float(b["H2O"]["B"]) == -1.75
    assert float(b["O2"]["interval_lo"]) == pytest.approx(-1.5 * math.log(0.5))
    assert float(b["O2"]["interval_hi"]) == 2.0


def test_calibrate_negative_cycle(tmp_path):
    cfg = tmp_path / "cyc.toml"
    cfg.write_text("[node.A]\ncomposition = [1]\n[node.B]\ncomposition = [1]\n"
                   "[edge.A.B]\nD = 1.0\n[edge.B.A]\nD = -2.0\n")
    assert run("calibrate", "--config", cfg, "--out", tmp_path) == 1
    cert = read_csv(tmp_path / "certificate.csv")
    assert sum(float(r["weight_to_next"]) for r in cert) == pytest.approx(-1.0)


def test_outputs_are_deterministic_with_header(tmp_path):
    for sub in ("a", "b"):
        assert run("check-axioms", "--config", CONFIGS / "ideal_gas.toml", "--out", tmp_path / sub,
                   "--seed", 7) == 0
        assert run("calibrate", "--config", CONFIGS / "water.toml", "--out", tmp_path / sub, "--seed", 7) == 0
    for name in ("axioms.csv", "constants.csv", "pairs.csv"):
        a, b = (tmp_path / "a" / name).read_bytes(), (tmp_path / "b" / name).read_bytes()
        assert a == b
        first = a.decode().splitlines()[0]
        assert first.startswith("# adiabatic") and "version=" in first
        assert "config_sha256=" in first and "seed=7" in first


def test_report_summarizes(tmp_path):
    run("carnot", "--cycle", 100, 600, -50, 300, "--out", tmp_path)
    assert run("report", "--out", tmp_path) == 0
    assert (tmp_path / "report.csv").exists()


def test_network_loader_checks_products():
    cfg = parse_toml('[node.H]\ncomposition = [1]\n[node.P]\nfactors = [[2, "Q"]]\n')
    with pytest.raises(ConfigError):
        load_network(cfg)
    cfg = parse_toml('[node.H]\ncomposition = [1]\n[node.P]\nfactors = [[2, "H"]]\ncomposition = [3]\n')
    with pytest.raises(ConfigError):
        load_network(cfg)
