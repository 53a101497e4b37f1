import json
import shutil
import subprocess

import pytest

from hyperwave.cli import NEGATIVE, OK, OPERATIONAL, run_subcommand
from hyperwave.config import ConfigError, parse_config
from hyperwave.reports import ReportError, emit_report, read_artifact

PELL = "[seed]\nsites = 1\namplitudes = 0.01\np = 2\n[boxes]\nlambda_radius = 8\n"
TUNED = "[seed]\nsites = 2,2\ndelta = 0.01\np = 2\n"


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "pell.ini"
    path.write_text(PELL)
    return path


@pytest.mark.parametrize("text, fragment", [
    ("[seed]\np = 2\n", "seed.sites"),
    ("[seed]\nsites = 0\ndelta = 0.1\n", "j_k != 0"),
    ("[seed]\nsites = 1\n", "amplitudes or delta"),
    ("[seed]\nsites = 1\ndelta = 0.1\namplitudes = 0.1\n", "either"),
    ("[seed]\nsites = 1; x\ndelta = 0.1\n", "integer vectors"),
    ("[seed]\nsites = 1\ndelta = 0.1\n[boxes]\nN = 0\n", "boxes.N"),
    ("[seed]\nsites = 1\ndelta = 0.1\n[bogus]\n", "unknown section"),
    ("[seed]\nsites = 1\ndelta = 0.1\ncolour = red\n", "seed.colour"),
    ("[seed]\nsites = 1\ndelta = 0.1\n[run]\ngenericity_mode = guess\n", "genericity_mode"),
    ("[seed]\nsites = 1\ndelta = 0.1\n[h_terms]\nm1 = a.json\n", "h_terms.m1"),
])
def test_config_errors_name_the_field(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        parse_config(text)


def test_config_hash_and_rescale():
    a = parse_config(PELL)
    b = parse_config(PELL + "[run]\nrng_seed = 0\n")
    assert a.hash() == b.hash()  # explicit default, same run
    assert parse_config(PELL.replace("0.01", "0.02")).hash() != a.hash()
    s = parse_config("[seed]\nsites = 1; 2\namplitudes = 0.2, 0.1\n").seed(0.01)
    assert s.amplitudes == pytest.approx((0.01, 0.005))


def test_exit_codes(tmp_path, cfg):
    assert run_subcommand(["genericity", "--config", str(cfg), "--out",
                           str(tmp_path / "c.json")]) == OK
    tuned = tmp_path / "tuned.ini"
    tuned.write_text(TUNED)
    assert run_subcommand(["genericity", "--config", str(tuned), "--out",
                           str(tmp_path / "t.json")]) == NEGATIVE
    assert run_subcommand(["solve", "--config", str(tuned), "--out",
                           str(tmp_path / "ts.json")]) == NEGATIVE
    sol = read_artifact(tmp_path / "ts.json")
    assert sol["data"]["reason"] == "genericity refuted"
    assert run_subcommand(["solve", "--config", str(tmp_path / "missing.ini")]) == OPERATIONAL
    assert run_subcommand(["frobnicate"]) == OPERATIONAL
    assert run_subcommand(["gap", "--config", str(cfg), "--delta", "0.2",
                           "--out", str(tmp_path / "g.json")]) == OPERATIONAL  # smallness
    assert run_subcommand(["solve", "--config", str(cfg), "--max-iter", "1", "--precision", "40",
                           "--tol", "1e-35", "--out", str(tmp_path / "s.json")]) == NEGATIVE


def test_solve_with_certificate_and_report(tmp_path, cfg):
    cert = tmp_path / "cert.json"
    sol = tmp_path / "sol.json"
    assert run_subcommand(["genericity", "--config", str(cfg), "--out", str(cert)]) == OK
    assert run_subcommand(["solve", "--config", str(cfg), "--certificate", str(cert),
                           "--out", str(sol)]) == OK
    data = read_artifact(sol)
    assert data["parameters"]["certificate_generic"] is True
    assert (tmp_path / "sol.json.manifest.json").exists()
    rep = emit_report([cert, sol])
    text = rep.text
    assert "== gap ==\n  absent" in text and "== lifetime ==\n  absent" in text
    assert "converged: True" in text
    assert set(rep.csvs) == {"residual_history.csv"}


def test_flag_overrides_recorded(tmp_path, cfg):
    out = tmp_path / "cs.json"
    assert run_subcommand(["charset", "--config", str(cfg), "--box-n", "6", "--box-j", "8",
                           "--out", str(out)]) == OK
    art = read_artifact(out)
    assert art["parameters"] == {"n_radius": 6, "j_radius": 8}
    assert sorted(map(tuple, art["data"]["charset"]["plus"])) == [(-5, -7), (-5, 7), (-1, -1),
                                                                  (-1, 1)]
    gen = tmp_path / "g.json"
    assert run_subcommand(["genericity", "--config", str(cfg), "--mode", "sampled",
                           "--seed", "11", "--out", str(gen)]) == OK
    assert read_artifact(gen)["parameters"]["rng_seed"] == 11
    assert read_artifact(gen)["config_hash"] == read_artifact(out)["config_hash"]


def test_report_refuses_mixed_configs(tmp_path, cfg):
    other = tmp_path / "other.ini"
    other.write_text(PELL.replace("0.01", "0.02"))
    assert run_subcommand(["genericity", "--config", str(cfg), "--out",
                           str(tmp_path / "a.json")]) == OK
    assert run_subcommand(["charset", "--config", str(other), "--out",
                           str(tmp_path / "b.json")]) == OK
    with pytest.raises(ReportError, match="different configs"):
        emit_report([tmp_path / "a.json", tmp_path / "b.json"])
    assert run_subcommand(["report", str(tmp_path / "a.json"), str(tmp_path / "b.json"),
                           "--out", str(tmp_path / "r.txt")]) == OPERATIONAL
    art = read_artifact(tmp_path / "a.json")
    art["version"] = "0.0.0"
    with pytest.raises(ReportError, match="versions"):
        emit_report([art, read_artifact(tmp_path / "a.json")])


@pytest.mark.parametrize("kind, key", [("blockgap", "blockgap"), ("nongeneric", "nongeneric"),
                                       ("scaling", "scaling"),
                                       ("transversality", "transversality")])
def test_measure_kinds(tmp_path, cfg, kind, key):
    out = tmp_path / f"{kind}.json"
    assert run_subcommand(["measure", "--config", str(cfg), "--kind", kind, "--samples", "50",
                           "--out", str(out)]) == OK
    assert key in read_artifact(out)["data"]


def test_scaling_measure_feeds_report_csv(tmp_path, cfg):
    out = tmp_path / "scaling.json"
    assert run_subcommand(["measure", "--config", str(cfg), "--kind", "scaling", "--out",
                           str(out)]) == OK
    rep = emit_report([out])
    assert rep.csvs["delta_scaling.csv"].startswith("delta,shift,remainder\n")


@pytest.mark.skipif(shutil.which("hyperwave") is None, reason="console script not installed")
def test_console_script(tmp_path, cfg):
    out = tmp_path / "charset.json"
    proc = subprocess.run(["hyperwave", "charset", "--config", str(cfg), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["kind"] == "charset"
