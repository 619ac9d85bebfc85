from __future__ import annotations

import json

import pytest

from privroll import fraud
from privroll.cli import main


def test_run_is_deterministic(capsys, tmp_path):
    saved = tmp_path / "sc.json"
    assert main(["run", "--seed", "3", "--save-scenario", str(saved)]) == 0
    first = capsys.readouterr().out
    assert main(["run", "--scenario", str(saved)]) == 0
    assert capsys.readouterr().out == first
    report = json.loads(first)
    assert report["disputes"] == [] and report["reference_match"]


def test_seed_from_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("PRIVROLL_SEED", "3")
    out = tmp_path / "r.json"
    assert main(["run", "--out", str(out)]) == 0
    assert main(["run", "--seed", "3"]) == 0
    assert out.read_text() == capsys.readouterr().out


def test_inject(capsys):
    assert main(["inject", "--rule", "2b"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["passed"] and d["disputed_rule"] == "2b"


def test_inject_into_a_scenario(capsys, tmp_path):
    assert main(["inject", "--rule", "3e", "--seed", "2", "--at", "99"]) == 0  # --at ignored without scenario
    capsys.readouterr()
    saved = tmp_path / "sc.json"
    main(["run", "--seed", "2", "--save-scenario", str(saved)])
    capsys.readouterr()
    assert main(["inject", "--rule", "3e", "--scenario", str(saved), "--at", "99"]) == 2
    assert main(["inject", "--rule", "3e", "--scenario", str(saved), "--at", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["disputes"]


def test_lind_modes(capsys):
    assert main(["lind", "--strict", "--rounds", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["identical"] == 3
    assert main(["lind", "--rounds", "20", "--strategy", "plaintext", "--leaky"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rate"] == 1.0 and d["lost_games"] == 0


def test_blob_dump(capsys, tmp_path):
    assert main(["blob-dump", "--seed", "1", "--height", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[0] == "0" and all(len(line.split()) == 3 for line in lines)
    assert main(["blob-dump", "--seed", "1", "--height", "999"]) == 2


def test_capacity_and_rules(capsys):
    assert main(["capacity", "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["ordering"] and [r["kind"] for r in d["rows"]] == ["mint", "burn", "transfer"]
    assert main(["rules", "--depth", "16"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == len(fraud.RULES)


def test_unknown_rule_is_a_usage_error():
    with pytest.raises(SystemExit):
        main(["inject", "--rule", "9z"])
