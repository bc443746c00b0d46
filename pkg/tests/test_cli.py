from __future__ import annotations

import json

import pytest

from deltacore.cli import CONFIG_ENV, COMMANDS, main, run


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def doc(argv):
    code, out, err = run(argv)
    assert code == 0, err
    return json.loads(out)


def test_separant_json_and_text():
    assert doc(["separant", "--poly", "d(x0)^3 - x0"])["result"]["separant"] == "3*d(x0)^2"
    code, out, _ = run(["separant", "--poly", "d(x0)^3 - x0", "--format", "text"])
    assert code == 0 and "separant: 3*d(x0)^2" in out


def test_prolong_example():
    res = doc(["prolong", "--poly", "d(x0) - x0^2", "--i", "2"])["result"]
    assert res["numerator"] == "4*d(x0)*x0^2 + 2*d(x0)^2"


def test_parse_error_reports_position():
    code, out, err = run(["separant", "--poly", "d(x0 +"])
    assert code == 2 and out == ""
    assert "line 1, column 7" in err


def test_exit_codes():
    assert run(["bogus"])[0] == 2
    assert run(["check-cell", "--file", "/nonexistent/cells.json"])[0] == 3
    assert run(["dl-check", "--poly", "d(x0)^2"])[0] == 1
    assert run(["dl-check", "--poly", "d(x0)^2 + x0^2 - 1"])[0] == 0


def test_env_config_is_overridden_by_flags(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"count": 40, "seed": 3, "box": [-1, 1]}))
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    conf = doc(["dim-probe", "--formula", "y0^2 + y1^2 < 1"])["config"]
    assert (conf["count"], conf["seed"], conf["box"]) == (40, 3, ["-1", "1"])
    assert doc(["dim-probe", "--formula", "y0 > 0", "--samples", "50"])["config"]["count"] == 50


def test_bad_env_config_is_a_usage_error(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert run(["dim-probe", "--formula", "y0 > 0"])[0] == 2


def test_output_file(tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(["star", "--formula", "d(x0) = x0^2", "--output", str(target)])
    assert code == 0 and json.loads(target.read_text())["command"] == "star"


def test_cells_round_trip_through_files(tmp_path):
    out = tmp_path / "cells.json"
    assert run(["decompose1d", "--formula", "y0^2 < 2", "--output", str(out)])[0] == 0
    res = doc(["check-cell", "--file", str(out)])
    assert [v["status"] for v in res["verdicts"]] == ["pass"]


def test_same_seed_same_bytes():
    argv = ["envelope", "--formula", "d(x0) = x0^2", "--samples", "64"]
    assert run(argv) == run(argv)


def test_every_command_has_help(capsys):
    for name in COMMANDS:
        assert main([name, "--help"]) == 0
        assert "usage: deltacore " + name in capsys.readouterr().out
