import csv
import json
from pathlib import Path

import pytest

from specfun import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EXAMPLES = sorted(CONFIGS.glob("*.json"))
BROKEN = {
    "negative_step.json": "grid.step",
    "duplicate_frequency.json": "duplicate frequency",
    "missing_command.json": "command: missing",
    "narrow_epsilon.json": "epsilon",
    "missing_table.json": "input.function.path",
    "bad_tolerance.json": "tolerances.zero_tol",
}


@pytest.mark.parametrize("path", EXAMPLES, ids=lambda p: p.name)
def test_examples_validate_and_roundtrip(path):
    text = path.read_text()
    assert cli.validate(text, path.parent) == []
    cfg, diags = cli.parse_config(json.loads(text), path.parent)
    assert not diags
    assert cli.validate(cli.serialize(cfg), path.parent) == []


@pytest.mark.parametrize("name, needle", sorted(BROKEN.items()))
def test_broken_configs(name, needle):
    path = CONFIGS / "broken" / name
    diags = cli.validate(path.read_text(), path.parent)
    assert len(diags) == 1
    assert needle in diags[0]
    assert cli.main([json.loads(path.read_text()).get("command", "spectrum"), "--config", str(path),
                     "--validate-only"]) == 2


def test_json_syntax_error_has_position():
    diags = cli.validate('{"command": "spectrum",\n  "grid": }')
    assert diags and diags[0].startswith("line 2, column")


def test_command_mismatch(capsys):
    path = CONFIGS / "stability.json"
    assert cli.main(["spectrum", "--config", str(path), "--validate-only"]) == 2
    assert "command" in capsys.readouterr().err


def test_spectrum_run(tmp_path):
    path = CONFIGS / "spectrum_line.json"
    assert cli.main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    assert rep["command"] == "spectrum"
    peaks = [c["peak_xi"] for c in rep["results"]["carleman"]["components"]]
    assert peaks == pytest.approx([-2.0, 1.0])
    assert rep["results"]["coincidence"]["passed"]
    assert rep["tolerances"]["threshold"] == 0.05
    rows = list(csv.reader((tmp_path / "spectrum_carleman.csv").open()))
    assert rows[0] == ["xi", "score", "flagged"]
    assert all("operation" in w for w in rep["warnings"])
    assert "wall_time_s" in json.loads((tmp_path / "timing.json").read_text())


def test_stability_run(tmp_path):
    code, rep = cli.run(cli.parse_config(json.loads((CONFIGS / "stability.json").read_text()))[0], tmp_path)
    assert code == 0
    assert rep["results"]["ablv"]["verdict"] == "AllSolutionsStable"


def test_missing_command_exit(tmp_path):
    path = CONFIGS / "broken" / "missing_command.json"
    assert cli.main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert not (tmp_path / "report.json").exists()


def test_numerical_failure_exit_code(tmp_path):
    cfg = {
        "command": "laurent",
        "input": {"A": {"re": [[0.0]], "im": [[1.1]]}},
        "contour": {"center": 1.0, "radius": 0.2},
    }
    parsed, diags = cli.parse_config(cfg)
    assert not diags
    code, rep = cli.run(parsed, tmp_path)
    assert code == 3 and rep["error"]["type"] == "ContourError"


def test_precondition_reported_in_laurent(tmp_path):
    cfg = {
        "command": "laurent",
        "input": {"A": {"re": [[0.0, 1.0], [0.0, 0.0]], "im": [[1.0, 0.0], [0.0, 1.0]]}},
        "contour": {"center": 1.0, "radius": 0.5},
        "bound_constant": 1.0,
    }
    code, rep = cli.run(cli.parse_config(cfg)[0], tmp_path)
    assert code == 0
    assert rep["results"]["gelfand"]["precondition"] == "violated"
    assert rep["results"]["pole"]["classification"] == "HigherOrder"


def test_reports_byte_identical(tmp_path, monkeypatch):
    path = CONFIGS / "resolvent.json"
    cfg = cli.parse_config(json.loads(path.read_text()), path.parent)[0]
    cli.run(cfg, tmp_path / "a")
    monkeypatch.setenv("SPECFUN_THREADS", "3")
    cli.run(cfg, tmp_path / "b")
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    for name in ("resolvent_0.csv", "resolvent_1.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unknown_field():
    diags = cli.validate(json.dumps({"command": "stability", "input": {"A": [[-1.0]]}, "extra": 1}))
    assert diags == ["extra: unknown field"]
