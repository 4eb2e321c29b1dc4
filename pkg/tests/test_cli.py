import csv
import json

import pytest

from phs.cli import main
from phs.config import dumps_config, parse_config
from phs.fixtures import FIXTURES, fixture

SMALL = {"r_max": 10.0, "nodes": 501, "layout": "uniform", "stretch": 3.0}


def _write(tmp_path, name, **sim):
    cfg = fixture(name).config
    cfg.grid = dict(SMALL)
    if sim:
        cfg.simulation = dict(cfg.simulation, **sim)
    path = tmp_path / f"{name}.toml"
    path.write_text(dumps_config(cfg))
    return path


def test_fixtures_list_and_show(capsys):
    assert main(["fixtures", "list"]) == 0
    listed = capsys.readouterr().out
    assert all(name in listed for name in FIXTURES)
    assert main(["fixtures", "show", "vibrating-string-case3"]) == 0
    text = capsys.readouterr().out
    assert parse_config(text).name == "vibrating-string-case3"


def test_check_generator_and_refusal(tmp_path, capsys):
    assert main(["check", "transport-network-5", "--out", str(tmp_path / "a")]) == 0
    data = json.loads((tmp_path / "a" / "report.json").read_text())
    assert data["verdict"] == "generator"
    bad = fixture("vibrating-string-constant").config
    bad.W_B1 = bad.W_B1 * 0 + [[1.0, 1.0]]
    path = tmp_path / "bad.toml"
    path.write_text(dumps_config(bad))
    assert main(["check", str(path), "--out", str(tmp_path / "b")]) == 2
    assert json.loads((tmp_path / "b" / "report.json").read_text())["verdict"] == "not-generator"
    assert main(["simulate", str(path), "--out", str(tmp_path / "c")]) == 2
    assert "not-generator" in (tmp_path / "c" / "report.json").read_text()


def test_simulate_writes_outputs(tmp_path):
    path = _write(tmp_path, "transport-network-5", T=1.0, dt=0.02, snapshots=3)
    out = tmp_path / "run"
    assert main(["--threads", "1", "simulate", str(path), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["audit"]["passed"] and report["mode"] == "exact"
    with open(out / "timeseries.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 51
    assert (out / "snapshots" / "index.csv").is_file()
    assert len(list((out / "snapshots").glob("*.csv"))) == 1 + 3


def test_bad_inputs_exit_one(tmp_path, capsys):
    assert main(["check", "no-such-thing"]) == 1
    assert "neither a config file nor a fixture" in capsys.readouterr().err
    broken = tmp_path / "broken.toml"
    broken.write_text("[system]\nP1 = [[1.0, 2.0], [0.0, 1.0]]\n")
    assert main(["check", str(broken)]) == 1
    assert "system.P1" in capsys.readouterr().err
    nosim = fixture("transport-network-5").config
    nosim.simulation = None
    path = tmp_path / "nosim.toml"
    path.write_text(dumps_config(nosim))
    assert main(["simulate", str(path), "--out", str(tmp_path / "x")]) == 1
    with pytest.raises(SystemExit):
        main(["properties", "transport-network-5", "--suite", "bogus"])


def test_properties_command(tmp_path, capsys):
    out = tmp_path / "props.json"
    assert main(["properties", "transport-network-5", "--suite", "transfer", "--seed", "3",
                 "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["passed"] and data["seed"] == 3
    assert "PASS  transfer.output_zero" in capsys.readouterr().out
    # an outgoing-only system has no transfer function to test
    outflow = tmp_path / "outflow.toml"
    outflow.write_text('[system]\nP1 = [[1.0]]\n[[H.entry]]\nrow = 0\ncol = 0\nkind = "constant"\nvalue = 1.0\n')
    assert main(["properties", str(outflow), "--suite", "transfer"]) == 1
    assert "FAIL  transfer.applicable" in capsys.readouterr().out
