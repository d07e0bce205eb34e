import numpy as np
import pytest

from vfcsim import POLICIES, ScenarioConfig, get_policy
from vfcsim.baselines import broldra, kmmto, nfo, nro, nso, server_slots
from vfcsim.engine import evaluate, iter_slots
from vfcsim.jcratoa import candidate_tables, jcratoa
from vfcsim.types import Dest


def contexts(n=3, **kw):
    for i, ctx in enumerate(iter_slots(ScenarioConfig(horizon_slots=n, **kw))):
        yield ctx


def test_registry():
    assert set(POLICIES) == {"jcratoa", "alo", "nro", "nfo", "nso", "kmmto", "broldra"}
    assert get_policy("JCRATOA") is jcratoa
    with pytest.raises(ValueError):
        get_policy("greedy")


def test_nro_uses_covering_rsu():
    for ctx in contexts(rng_seed=1):
        plan = nro(ctx)
        for n, d in enumerate(plan.decisions):
            assert d.dest is Dest.LOCAL or (d.dest is Dest.RSU and d.server == ctx.cover[n])


def test_nfo_nearest_or_local():
    for ctx in contexts(rng_seed=2):
        near = ctx.nearest_fv()
        plan = nfo(ctx)
        for n, d in enumerate(plan.decisions):
            if near[n] < 0:
                assert d.dest is Dest.LOCAL
            elif d.dest is Dest.FV:
                assert d.server == near[n]
                assert plan.f_hz[n] == ctx.contract_fv_f[n, near[n]]


def test_nso_picks_between_the_two_nearest():
    for ctx in contexts(rng_seed=3):
        near = ctx.nearest_fv()
        for n, d in enumerate(nso(ctx).decisions):
            assert (d.dest is Dest.LOCAL or (d.dest is Dest.RSU and d.server == ctx.cover[n])
                    or (d.dest is Dest.FV and d.server == near[n]))


def test_kmmto_slots_and_acceptability():
    for ctx in contexts(rng_seed=4):
        delay, _, demand, ok = candidate_tables(ctx)
        cols = server_slots(ctx, demand, ok)
        assert np.all(np.bincount(cols[cols >= ctx.n_rsus] - ctx.n_rsus, minlength=ctx.n_fvs) <= ctx.config.fv_max_tvs)
        plan = kmmto(ctx)
        rows, assigned = plan.extras["assignment"]
        cost = plan.extras["cost"]
        # assignment never costs more than keeping everyone local
        assert cost[rows, assigned].sum() <= ctx.local_delay.sum() + 1e-9
        for n, d in enumerate(plan.decisions):
            if d.dest is Dest.FV:
                assert ok[n, ctx.n_rsus + d.server]


def test_broldra_forwards_within_segment():
    for ctx in contexts(rng_seed=5):
        plan = broldra(ctx)
        used = [d.server for d in plan.decisions if d.dest is Dest.FV]
        assert len(used) == len(set(used))
        for n, d in enumerate(plan.decisions):
            if d.dest is Dest.FV:
                assert plan.via_rsu[n] and ctx.fv_cover[d.server] == ctx.cover[n]
        assert evaluate(ctx, plan).violations == []


def test_jcratoa_plan_properties():
    for ctx in contexts(n=5, rng_seed=6):
        plan = jcratoa(ctx)
        delay, _, demand, ok = candidate_tables(ctx)
        match = plan.extras["matching"]
        for n, s in enumerate(match.tv_to_server):
            if s >= 0:
                assert ok[n, s]
        # quotas hold on the provisional demands
        for s, tvs in enumerate(match.server_to_tvs):
            assert demand[tvs, s].sum() <= plan.extras["quotas"][s]
        fv_load = np.bincount([d.server for d in plan.decisions if d.dest is Dest.FV], minlength=ctx.n_fvs)
        assert np.all(fv_load <= ctx.config.fv_max_tvs)
        out = evaluate(ctx, plan)
        assert out.violations == []
        # nobody offloads when running locally would be faster
        off = np.array([d.dest is not Dest.LOCAL for d in plan.decisions])
        assert np.all(out.delay_s[off] <= ctx.local_delay[off] + 1e-12)


@pytest.mark.parametrize("policy", sorted(POLICIES))
def test_policies_deterministic(policy):
    ctx_a = next(iter(iter_slots(ScenarioConfig(horizon_slots=1, rng_seed=8))))
    ctx_b = next(iter(iter_slots(ScenarioConfig(horizon_slots=1, rng_seed=8))))
    a, b = get_policy(policy)(ctx_a), get_policy(policy)(ctx_b)
    assert a.decisions == b.decisions
    assert np.array_equal(a.f_hz, b.f_hz, equal_nan=True)
