import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from vfcsim.cli import SWEEP_COLUMNS, main

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def small_config(tmp_path):
    text = (ROOT / "configs" / "default.toml").read_text()
    text = text.replace("horizon_slots = 40", "horizon_slots = 3")
    assert "horizon_slots = 3" in text
    p = tmp_path / "small.toml"
    p.write_text(text)
    return p


def test_run_writes_outputs(small_config, tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--config", str(small_config), "--policy", "jcratoa", "--seed", "3", "--out", str(out)]) == 0
    doc = json.loads((out / "metrics.json").read_text())
    assert doc["policy"] == "jcratoa" and doc["seed"] == 3 and doc["violations"] == 0
    rows = list(csv.DictReader(open(out / "slots.csv")))
    assert len(rows) == 3 and rows[0]["slot"] == "0"


def test_run_deterministic(small_config, tmp_path):
    for d in ("a", "b"):
        main(["run", "--config", str(small_config), "--policy", "nso", "--seed", "1", "--out", str(tmp_path / d)])
    assert (tmp_path / "a" / "metrics.json").read_bytes() == (tmp_path / "b" / "metrics.json").read_bytes()
    assert (tmp_path / "a" / "slots.csv").read_bytes() == (tmp_path / "b" / "slots.csv").read_bytes()


def test_seed_override_changes_metrics(small_config, tmp_path):
    for seed in ("1", "2"):
        main(["run", "--config", str(small_config), "--policy", "nro", "--seed", seed, "--out", str(tmp_path / seed)])
    assert (tmp_path / "1" / "metrics.json").read_bytes() != (tmp_path / "2" / "metrics.json").read_bytes()


def test_plot_single_policy(small_config, tmp_path):
    csv_path = tmp_path / "one.csv"
    main(["sweep", "--config", str(small_config), "--param", "n_tvs", "--values", "3,6", "--policies", "alo",
          "--out", str(csv_path)])
    svg = tmp_path / "one.svg"
    assert main(["plot", "--input", str(csv_path), "--metric", "completion_ratio", "--out", str(svg)]) == 0
    text = svg.read_text()
    ET.fromstring(text)
    assert "alo" in text   # legend label


def test_exit_codes(small_config, tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.toml"), "--policy", "alo"]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[scenario]\nn_tvs = -4\n")
    assert main(["run", "--config", str(bad), "--policy", "alo", "--out", str(tmp_path)]) == 3
    assert "n_tvs" in capsys.readouterr().err
    assert main(["run", "--config", str(small_config), "--policy", "magic", "--out", str(tmp_path)]) == 3
    assert main(["sweep", "--config", str(small_config), "--param", "n_tvs", "--values", "",
                 "--out", str(tmp_path / "s.csv")]) == 3
    assert main(["sweep", "--config", str(small_config), "--param", "speed", "--values", "1",
                 "--out", str(tmp_path / "s.csv")]) == 3
    assert main(["plot", "--input", str(tmp_path / "none.csv"), "--metric", "avg_delay_s",
                 "--out", str(tmp_path / "p.svg")]) == 2


def test_sweep_and_plot(small_config, tmp_path):
    csv_path = tmp_path / "sweep.csv"
    rc = main(["sweep", "--config", str(small_config), "--param", "n_tvs", "--values", "4,8",
               "--policies", "jcratoa,alo", "--seeds", "2", "--workers", "2", "--out", str(csv_path)])
    assert rc == 0
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 2 * 2 * 2
    assert sorted({r["seed"] for r in rows}) == ["0", "1"]
    first = csv_path.read_bytes()
    main(["sweep", "--config", str(small_config), "--param", "n_tvs", "--values", "4,8",
          "--policies", "jcratoa,alo", "--seeds", "2", "--workers", "1", "--out", str(csv_path)])
    assert csv_path.read_bytes() == first

    svg = tmp_path / "plot.svg"
    assert main(["plot", "--input", str(csv_path), "--metric", "avg_delay_s", "--out", str(svg)]) == 0
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    assert main(["plot", "--input", str(csv_path), "--metric", "latency", "--out", str(svg)]) == 3


def test_task_kb_sweep(small_config, tmp_path):
    out = tmp_path / "kb.csv"
    assert main(["sweep", "--config", str(small_config), "--param", "task_kb", "--values", "300,900",
                 "--policies", "nro", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["param_value"] for r in rows] == ["300.0", "900.0"]
