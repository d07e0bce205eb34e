import numpy as np
import pytest

from vfcsim import ScenarioConfig, generate_scenario
from vfcsim.config import dbm_to_w
from vfcsim.scenario import covering_rsu, generate_tasks, rsu_positions, spawn_streams
from vfcsim.types import Role, ServerKind


def test_rsu_layout():
    assert rsu_positions(3000.0, 3) == pytest.approx([500.0, 1500.0, 2500.0])
    assert list(covering_rsu([0.0, 999.9, 1000.0, 2999.9, 3000.0], 3000.0, 3)) == [0, 0, 1, 2, 2]


def test_default_scenario_shape():
    cfg = ScenarioConfig(rng_seed=3)
    sc = generate_scenario(cfg)
    assert len(sc.vehicles) == cfg.n_tvs + cfg.n_fvs
    assert [v.role for v in sc.vehicles].count(Role.TV) == cfg.n_tvs
    assert [r.position_m[0] for r in sc.rsus] == pytest.approx([500.0, 1500.0, 2500.0])
    assert sc.rsus[0].hops_to == (0, 1, 2)
    assert len(sc.fvs) == cfg.n_fvs and all(s.kind is ServerKind.FV for s in sc.fvs)
    for f in sc.fvs:
        assert f.theta == pytest.approx(f.willingness * f.f_max_hz / 1e9)
        assert cfg.willingness[0] <= f.willingness <= cfg.willingness[1]
    for tv in sc.tvs:
        assert cfg.tv_cpu_hz[0] <= tv.f_hz <= cfg.tv_cpu_hz[1]
        assert dbm_to_w(20.0) <= tv.tx_power_w <= dbm_to_w(50.0)
    assert len(sc.tasks) == cfg.horizon_slots and len(sc.tasks[0]) == cfg.n_tvs


def test_task_ranges():
    cfg = ScenarioConfig()
    tasks = generate_tasks(cfg, np.random.default_rng(0), n_slots=50)
    for row in tasks:
        for t in row:
            assert cfg.input_bits[0] <= t.input_bits <= cfg.input_bits[1]
            assert cfg.deadline_s[0] <= t.deadline_s <= cfg.deadline_s[1]
            cpb = t.cycles / t.input_bits
            assert cfg.cycles_per_bit[0] <= cpb <= cfg.cycles_per_bit[1]


def test_deterministic_and_seed_sensitive():
    a = generate_scenario(ScenarioConfig(rng_seed=11))
    b = generate_scenario(ScenarioConfig(rng_seed=11))
    c = generate_scenario(ScenarioConfig(rng_seed=12))
    assert a == b
    assert a != c


def test_streams_independent():
    s = spawn_streams(5)
    assert set(s) == {"scenario", "mobility", "channel"}
    draws = {k: g.random() for k, g in s.items()}
    assert len(set(draws.values())) == 3


def test_empty_fleet():
    sc = generate_scenario(ScenarioConfig(n_tvs=0, n_fvs=0))
    assert sc.tvs == [] and sc.fvs == [] and len(sc.rsus) == 3
    assert all(row == [] for row in sc.tasks)
