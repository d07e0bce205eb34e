import logging

import numpy as np
import pytest

from vfcsim import POLICIES, ScenarioConfig, check_constraints, generate_scenario, run
from vfcsim.engine import CONSTRAINTS, Plan, draw_rates, evaluate, iter_slots
from vfcsim.types import Dest, OffloadDecision


def first_ctx(**kw):
    return next(iter(iter_slots(ScenarioConfig(**kw))))


def test_zero_horizon():
    m = run(ScenarioConfig(horizon_slots=0), "jcratoa")
    assert m.avg_delay_s == 0.0 and m.violations == 0 and m.series_rows() == []


@pytest.mark.parametrize("policy", sorted(POLICIES))
def test_empty_fleets(policy):
    m = run(ScenarioConfig(n_tvs=0, horizon_slots=3), policy)
    assert m.avg_delay_s == 0.0 and len(m.series_rows()) == 3
    m = run(ScenarioConfig(n_fvs=0, horizon_slots=3), policy)
    assert m.violations == 0


def test_local_only_single_tv():
    cfg = ScenarioConfig(n_tvs=1, horizon_slots=10, rng_seed=4)
    sc = generate_scenario(cfg)
    f = sc.tvs[0].f_hz
    want = np.mean([row[0].cycles / f for row in sc.tasks])
    ok = np.mean([row[0].cycles / f <= row[0].deadline_s and cfg.kappa_tv * row[0].cycles * f * f <= cfg.e_max_tv_j
                  for row in sc.tasks])
    m = run(cfg, "alo")
    assert m.completion_ratio == pytest.approx(ok)
    # failed tasks are charged at least their deadline
    charged = np.mean([max(r[0].cycles / f, r[0].deadline_s) if r[0].cycles / f > r[0].deadline_s else r[0].cycles / f
                       for r in sc.tasks])
    assert m.avg_delay_s == pytest.approx(charged if ok < 1 else want)


def test_rates_shape_and_range():
    cfg = ScenarioConfig(rng_seed=2)
    sc = generate_scenario(cfg)
    q = np.array([v.position_m for v in sc.vehicles])
    r_rsu, r_fv = draw_rates(cfg, sc, q[:cfg.n_tvs], q[cfg.n_tvs:], np.random.default_rng(0))
    assert r_rsu.shape == (cfg.n_tvs,) and np.all(r_rsu > 0)
    assert r_fv.shape == (cfg.n_tvs, cfg.n_fvs)
    d = np.abs(q[:cfg.n_tvs, None, 0] - q[None, cfg.n_tvs:, 0])
    assert np.all(r_fv[d > cfg.tv_range_m] == 0)


def test_fv_overload_flags_every_member():
    ctx = first_ctx(rng_seed=1)
    reach = np.argwhere(ctx.fv_reachable)
    m = None
    for fv in range(ctx.n_fvs):
        tvs = reach[reach[:, 1] == fv, 0]
        if len(tvs) >= 2:
            m, pair = fv, tvs[:2]
            break
    assert m is not None
    decisions = [OffloadDecision.local(n) for n in range(ctx.n_tvs)]
    f = np.full(ctx.n_tvs, np.nan)
    for n in pair:
        decisions[n] = OffloadDecision.fv(n, m)
        f[n] = ctx.fv_fmax[m]
    out = evaluate(ctx, Plan(decisions, f))
    rep = check_constraints(out)
    assert set(rep) == set(CONSTRAINTS)
    assert len(rep["fv_capacity"]) == 1 and set(rep["fv_capacity"][0].tvs) == set(pair)
    assert not out.success[pair].any()
    assert np.all(out.delay_s[pair] >= ctx.deadline[pair])


def test_unreachable_and_one_hot():
    ctx = first_ctx(rng_seed=1)
    n = 0
    far = np.flatnonzero(~ctx.fv_reachable[n])
    decisions = [OffloadDecision.local(i) for i in range(ctx.n_tvs)]
    decisions[n] = OffloadDecision.fv(n, int(far[0]))
    decisions[1] = OffloadDecision(1, Dest.NONE)
    out = evaluate(ctx, Plan(decisions, np.full(ctx.n_tvs, 1e9)))
    rep = check_constraints(out)
    assert rep["reachability"][0].tvs == (0,)
    assert rep["one_hot"][0].tvs == (1,)
    assert not out.success[0] and not out.success[1]


def test_wrong_decision_count():
    ctx = first_ctx()
    with pytest.raises(ValueError):
        evaluate(ctx, Plan([], np.zeros(0)))


@pytest.mark.parametrize("policy", ["jcratoa", "nro", "kmmto", "broldra", "alo"])
def test_policies_clean(policy):
    m = run(ScenarioConfig(horizon_slots=8, rng_seed=5), policy)
    assert m.violations == 0
    assert 0.0 <= m.completion_ratio <= 1.0


def test_common_random_numbers():
    cfg = ScenarioConfig(horizon_slots=3, rng_seed=9)
    a = [ctx.rate_rsu.copy() for ctx in iter_slots(cfg)]
    b = [ctx.rate_rsu.copy() for ctx in iter_slots(cfg)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_on_slot_and_outcomes():
    seen = []
    m, outs = run(ScenarioConfig(horizon_slots=4), "jcratoa", on_slot=lambda c, o: seen.append(o.slot),
                  keep_outcomes=True)
    assert seen == [0, 1, 2, 3] and len(outs) == 4
    assert "matching" in outs[0].extras


def test_warns_when_nothing_succeeds(caplog):
    cfg = ScenarioConfig(horizon_slots=2, n_tvs=2, deadline_s=(1e-6, 1e-6))
    with caplog.at_level(logging.WARNING, logger="vfcsim"):
        m = run(cfg, "alo")
    assert m.completion_ratio == 0.0
    assert "no task succeeded" in caplog.text
