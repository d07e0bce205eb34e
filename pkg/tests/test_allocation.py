import numpy as np
import pytest
from hypothesis import given, strategies as st

from vfcsim.allocation import AllocationRequest, per_task_bounds, solve_sp1, sp1_objective
from oracles import sp1_grid


def request(cycles, slack, e_cap, f_max, kappa=1e-28, **kw):
    return AllocationRequest(np.array(cycles, float), np.array(slack, float), np.array(e_cap, float), f_max, kappa, **kw)


def test_unconstrained_closed_form():
    # interior optimum: f_n proportional to sqrt(C_n)
    c = np.array([1e9, 4e9, 9e9])
    res = solve_sp1(request(c, [10.0] * 3, [1e3] * 3, 6e9))
    assert res.accepted.all()
    assert res.f_hz == pytest.approx([1e9, 2e9, 3e9], rel=1e-9)
    assert res.total_hz == pytest.approx(6e9, rel=1e-9)


def test_budget_slack_gives_hi():
    res = solve_sp1(request([1e9, 1e9], [10.0, 10.0], [0.1, 0.4], 1e12))
    # hi = sqrt(E / (kappa C))
    assert res.f_hz == pytest.approx([1e9, 2e9], rel=1e-12)
    assert res.multiplier == 0.0


def test_deadline_floor_binds():
    # task 0 needs 5e9 to meet its deadline; the interior split would give it less
    res = solve_sp1(request([1e9, 9e9], [0.2, 100.0], [1e3, 1e3], 8e9))
    assert res.f_hz[0] == pytest.approx(5e9, rel=1e-9)
    assert res.f_hz[1] == pytest.approx(3e9, rel=1e-9)


def test_eviction_lowest_priority_first():
    # each task needs 4e9 and only 2 fit
    res = solve_sp1(request([4e9] * 3, [1.0] * 3, [1e3] * 3, 8e9, priority=np.array([3.0, 1.0, 2.0])))
    assert list(res.accepted) == [True, False, True]
    assert list(res.evicted) == [False, True, False]
    assert np.isnan(res.f_hz[1])


def test_infeasible_tasks_rejected_not_evicted():
    res = solve_sp1(request([1e9, 1e9], [0.0, 1.0], [1e3, 1e-12], 1e10))
    assert not res.accepted.any() and not res.evicted.any()
    lo, hi, ok = per_task_bounds(request([1e9], [0.5], [1.0], 1e10))
    assert lo[0] == pytest.approx(2e9) and ok[0]


def test_empty():
    res = solve_sp1(request([], [], [], 1e9))
    assert res.f_hz.size == 0


def random_instance(rng, n):
    while True:
        c = rng.uniform(1e8, 1e10, n)
        f_max = rng.uniform(1e9, 3e10)
        slack = rng.uniform(0.2, 20.0, n)
        e_cap = rng.uniform(0.05, 50.0, n)
        req = request(c, slack, e_cap, f_max)
        lo, hi, ok = per_task_bounds(req)
        if ok.all() and lo.sum() <= f_max and np.all(lo <= np.minimum(hi, f_max)):
            return req, lo, hi


@pytest.mark.parametrize("seed", range(20))
def test_grid_oracle_small(seed):
    rng = np.random.default_rng(seed)
    req, lo, hi = random_instance(rng, 1 + seed % 3)
    res = solve_sp1(req)
    assert res.accepted.all()
    ref = sp1_grid(req.cycles, lo, hi, req.f_max_hz)
    got = sp1_objective(req.cycles, res.f_hz)
    assert got <= ref * (1 + 1e-5)


@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_feasible_and_kkt(n, seed):
    rng = np.random.default_rng(seed)
    req, lo, hi = random_instance(rng, n)
    res = solve_sp1(req)
    f = res.f_hz
    hi = np.minimum(hi, req.f_max_hz)
    assert np.all(f >= lo * (1 - 1e-9)) and np.all(f <= hi * (1 + 1e-9))
    assert f.sum() <= req.f_max_hz * (1 + 1e-9)
    lam = res.multiplier
    if lam > 0:
        assert req.f_max_hz - f.sum() <= 1e-6 * req.f_max_hz
        free = (f > lo * (1 + 1e-9)) & (f < hi * (1 - 1e-9))
        assert np.all(np.abs(f[free] - np.sqrt(req.cycles[free] / lam)) <= 1e-6 * req.f_max_hz)
    else:
        assert np.allclose(f, hi)
