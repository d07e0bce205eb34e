import math
from pathlib import Path

import pytest

from vfcsim.config import BITS_PER_KB, DEFAULT_CONFIG, ConfigError, ScenarioConfig, config_from_mapping, dbm_to_w, load_config, w_to_dbm

ROOT = Path(__file__).resolve().parents[1]


def test_dbm_roundtrip():
    assert dbm_to_w(30.0) == pytest.approx(1.0)
    assert dbm_to_w(-98.0) == pytest.approx(1.585e-13, rel=1e-3)
    assert w_to_dbm(dbm_to_w(17.3)) == pytest.approx(17.3)


@pytest.mark.parametrize("path", [ROOT / "configs" / "default.toml", DEFAULT_CONFIG])
def test_default_file_matches_dataclass(path):
    got = load_config(path)
    ref = ScenarioConfig()
    for k, v in ref.to_dict().items():
        g = getattr(got, k)
        if isinstance(v, tuple):
            assert g == pytest.approx(v, rel=1e-12), k
        else:
            assert g == pytest.approx(v, rel=1e-12), k


def test_units_converted():
    cfg = config_from_mapping({"tasks": {"input_kb": [100, 200]}, "nodes": {"rsu_cpu_ghz": 10}})
    assert cfg.input_bits == (100 * BITS_PER_KB, 200 * BITS_PER_KB)
    assert cfg.rsu_cpu_hz == 10e9


@pytest.mark.parametrize("doc,field", [
    ({"scenario": {"n_tvs": -1}}, "n_tvs"),
    ({"scenario": {"bogus": 1}}, "scenario.bogus"),
    ({"nope": {"x": 1}}, "nope"),
    ({"mobility": {"alpha": 1.5}}, "alpha"),
    ({"tasks": {"deadline_s": [3.0, 1.0]}}, "deadline_s"),
    ({"channel": {"bandwidth_mhz": [0, 10]}}, "bandwidth_hz"),
    ({"contract": {"type_probs": [0.5, 0.6, 0.1]}}, "type_probs"),
    ({"channel": {"noise_dbm": "loud"}}, "channel.noise_dbm"),
])
def test_invalid_values_name_the_field(doc, field):
    with pytest.raises(ConfigError) as exc:
        config_from_mapping(doc)
    assert exc.value.field == field


def test_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[scenario\nn_tvs = 3\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.toml")


def test_overrides_revalidate():
    with pytest.raises(ConfigError):
        ScenarioConfig().with_overrides(slot_s=0.0)
    assert ScenarioConfig().with_overrides(n_tvs=0).n_tvs == 0
    assert math.isclose(ScenarioConfig().noise_w, dbm_to_w(-98.0))
