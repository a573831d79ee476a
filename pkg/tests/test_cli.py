import json
import os

import numpy as np
import pytest

from nlkg.cli import main, parse_config, run_experiment
from nlkg.errors import ParseError, ValidationError


def _write(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


MINIMAL_TOY = """
[scenario]
name = "toy_ode"
eps = 0.3
t_max = 1e8
"""


def test_parse_minimal_fills_defaults(tmp_path):
    cfg = parse_config(_write(tmp_path, MINIMAL_TOY))
    assert cfg["physics"]["p"] == 3.0
    assert cfg["grid"]["dx"] == 0.05
    assert cfg.scenario == "toy_ode"


def test_parse_rejects_power_below_two(tmp_path):
    bad = MINIMAL_TOY + "\n[physics]\np = 1.5\n"
    with pytest.raises(ValidationError) as err:
        parse_config(_write(tmp_path, bad))
    assert any("p > 2" in v for v in err.value.violations)


def test_parse_rejects_cfl_violation(tmp_path):
    bad = MINIMAL_TOY + "\n[time]\ndt = 0.05\n[grid]\ndx = 0.05\n"
    with pytest.raises(ValidationError) as err:
        parse_config(_write(tmp_path, bad))
    assert any("CFL" in v for v in err.value.violations)


def test_parse_collects_all_violations(tmp_path):
    bad = """
[physics]
p = 1.0
alpha = -1.0
[scenario]
name = "nonsense"
"""
    with pytest.raises(ValidationError) as err:
        parse_config(_write(tmp_path, bad))
    assert len(err.value.violations) >= 3


def test_parse_malformed_toml(tmp_path):
    with pytest.raises(ParseError):
        parse_config(_write(tmp_path, "[scenario\nname ="))


def test_toy_scenario_artifacts_and_reproducibility(tmp_path):
    cfg = parse_config(_write(tmp_path, MINIMAL_TOY))
    out_root = str(tmp_path / "runs")
    run_dir = run_experiment(cfg, out_root=out_root)
    assert os.path.exists(os.path.join(run_dir, "manifest.json"))
    with open(os.path.join(run_dir, "toy.json")) as fh:
        payload = json.load(fh)
    assert payload["crossing_time_ratio10"] is not None
    first = open(os.path.join(run_dir, "toy.csv"), "rb").read()
    # rerun from the manifest alone: identical bytes
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    from nlkg.cli import ExperimentConfig
    run_dir2 = run_experiment(ExperimentConfig(manifest["config"]),
                              out_root=str(tmp_path / "runs2"))
    second = open(os.path.join(run_dir2, "toy.csv"), "rb").read()
    assert first == second


def test_reduced_scenario(tmp_path):
    text = """
[scenario]
name = "reduced_flow"
signs = [1, -1]
z = [-7.0, 7.0]
t_max = 200.0
"""
    cfg = parse_config(_write(tmp_path, text))
    run_dir = run_experiment(cfg, out_root=str(tmp_path / "runs"))
    with open(os.path.join(run_dir, "reduced.json")) as fh:
        payload = json.load(fh)
    assert payload["correlation"] >= 0.999


def test_single_soliton_scenario_and_exit_codes(tmp_path, capsys):
    text = """
[scenario]
name = "single_soliton"
signs = [1]
z = [0.0]
h = [0.05]
[time]
dt = 0.025
t_max = 40.0
sample_every = 10
"""
    path = _write(tmp_path, text)
    code = main(["--out", str(tmp_path / "runs"), "classify", "--config", path])
    assert code == 0
    printed = capsys.readouterr().out
    assert json.loads(printed)["kind"] == "Blowup"

    missing = main(["classify", "--config", str(tmp_path / "nope.toml")])
    assert missing == 2
    bad = _write(tmp_path, MINIMAL_TOY + "\n[physics]\np = 1.0\n", name="bad.toml")
    assert main(["classify", "--config", bad]) == 2


def test_groundstate_subcommand(tmp_path, capsys):
    out = str(tmp_path / "table.txt")
    code = main(["groundstate", "--dim", "1", "--power", "3.0",
                 "--tol", "1e-10", "--out", out])
    assert code == 0
    data = np.loadtxt(out)
    assert data.shape[1] == 2
    header = open(out).readline()
    assert "energy=" in header


def test_spectrum_subcommand(capsys):
    assert main(["spectrum", "--alpha", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "nu0_sq" in out and "c_omega_1" in out


def test_dichotomy_scenario(tmp_path):
    text = """
[scenario]
name = "dichotomy"
lambdas = [0.5, 2.0]
[time]
dt = 0.025
t_max = 30.0
"""
    cfg = parse_config(_write(tmp_path, text))
    run_dir = run_experiment(cfg, out_root=str(tmp_path / "runs"))
    with open(os.path.join(run_dir, "outcomes.json")) as fh:
        outcomes = json.load(fh)
    kinds = {o["lambda"]: o["outcome"]["kind"] for o in outcomes}
    assert kinds == {0.5: "Decay", 2.0: "Blowup"}
    assert os.path.exists(os.path.join(run_dir, "traj-lam0.5.ndjson"))
