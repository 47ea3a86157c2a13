import json
import os

import pytest

from normsys.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_NONCONVERGED, EXIT_OK, csv_text, main
from normsys.config import ConfigError, config_from_dict, parse_config

CUBIC = {"N": 1, "M": 1, "terms": [{"kind": "power", "j": 1, "nu": 1.0, "p": 4}]}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def minimize_cfg(**solver):
    return {"subcommand": "minimize", "nonlinearity": CUBIC, "mass": [1.0],
            "domain": {"kind": "RadialN", "N": 1, "r_max": 60.0, "n_points": 4096}, "solver": solver}


def test_config_round_trip():
    cfg = config_from_dict(minimize_cfg(tol=1e-9))
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert again.build_domain().n_points == 4096
    assert again.build_nonlinearity().M == 1


def test_malformed_json_reports_position():
    with pytest.raises(ConfigError, match=r"line 2 column \d+ \(char \d+\)"):
        parse_config('{"mass": [1.0],\n "seed": }')


@pytest.mark.parametrize("bad", [
    {"bogus": 1},
    {"domain": {"kind": "RadialN", "radius": 3}},
    {"mass": "1"},
    {"mass": [True]},
    {"seed": 1.5},
    {"subcommand": "fly"},
    {"nonlinearity": {"N": 1, "M": 1, "terms": [{"kind": "nope"}]}},
])
def test_config_rejects_bad_input(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_gn_const_prints_constant(tmp_path, capsys):
    assert main(["gn-const", "--N", "1", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "C^6 = 0.405285" in out
    assert (tmp_path / "summary.txt").read_text() == out
    assert json.loads((tmp_path / "gn.json").read_text())["N"] == 1


def test_minimize_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    assert main(["minimize", "--config", write_cfg(tmp_path, minimize_cfg()), "--out", str(out)]) == EXIT_OK
    res = json.loads((out / "result.json").read_text())
    assert res["converged"] and res["energy"] == pytest.approx(-1 / 96, rel=1e-4)
    for name in ("field.csv", "energy_log.csv", "summary.txt"):
        assert (out / name).exists()
    assert not [f for f in os.listdir(out) if f.startswith(".tmp-")]


def test_exit_code_config_error(tmp_path, capsys):
    assert main(["minimize", "--out", str(tmp_path)]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["minimize", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "line 1 column 2" in capsys.readouterr().err
    cfg = minimize_cfg()
    cfg["subcommand"] = "scan-m"
    assert main(["minimize", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_exit_code_nonconvergence(tmp_path):
    cfg = minimize_cfg(max_iter=2, init="gaussian")
    assert main(["minimize", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_NONCONVERGED


def test_exit_code_refusal(tmp_path):
    cfg = minimize_cfg()
    cfg["mass"] = [3.0]
    cfg["nonlinearity"] = {"N": 1, "M": 1, "terms": [{"kind": "power", "j": 1, "nu": 6.0, "p": 6}]}
    assert main(["minimize", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_FAIL


def test_eta_limits_for_cubic(tmp_path):
    cfg = {"subcommand": "eta-limits", "nonlinearity": CUBIC}
    assert main(["eta-limits", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "eta.json").read_text())
    assert data["eta0"]["closed_form"] == float("inf")
    assert data["eta_inf"]["closed_form"] == 0.0


def test_rearrange_test_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, {"rearrange": {"trials": 5, "N": 2, "r_max": 12.0, "n_points": 2000}})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["rearrange-test", "--config", cfg, "--out", str(a), "--seed", "3"]) == EXIT_OK
    assert main(["rearrange-test", "--config", cfg, "--out", str(b), "--seed", "3"]) == EXIT_OK
    assert (a / "rearrange.csv").read_bytes() == (b / "rearrange.csv").read_bytes()


def test_csv_floats_round_trip():
    text = csv_text(["x"], [[0.1 + 0.2]])
    assert float(text.splitlines()[1]) == 0.1 + 0.2
