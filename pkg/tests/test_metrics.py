import numpy as np
import pytest
from hypothesis import given, strategies as st

from vfcsim.engine import SlotOutcome
from vfcsim.metrics import aggregate, completion_ratio, jain_fairness, throughput


def test_jain_examples():
    assert jain_fairness([1, 1, 1, 1]) == pytest.approx(1.0)
    assert jain_fairness([1, 0, 0, 0]) == pytest.approx(0.25)
    assert jain_fairness([1, 2, 3]) == pytest.approx(36 / 42)
    assert jain_fairness([0, 0]) == 1.0
    with pytest.raises(ValueError):
        jain_fairness([])
    with pytest.raises(ValueError):
        jain_fairness([-1, 1])


@given(st.lists(st.floats(0, 1e12), min_size=1, max_size=30))
def test_jain_bounds(x):
    j = jain_fairness(x)
    assert 1 / len(x) - 1e-12 <= j <= 1 + 1e-12


def outcome(slot, delay, success, bits, alloc=None, e=0.0):
    n = len(delay)
    return SlotOutcome(slot, [], np.array(delay, float), np.array(success, bool), np.full(n, e),
                       np.zeros(2), np.zeros(2), np.ones(n) if alloc is None else np.array(alloc, float),
                       np.array(bits, float))


def test_throughput_and_completion():
    outs = [outcome(0, [0.1, 0.2], [True, False], [1e5, 5e5]), outcome(1, [0.3, 0.4], [True, True], [2e5, 1e5])]
    assert throughput(outs, 2.0) == pytest.approx(2e5)
    assert completion_ratio(outs) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        throughput(outs, 0.0)


def test_aggregate():
    outs = [outcome(0, [0.1, 0.3], [True, True], [1e5, 1e5], alloc=[1, 3], e=0.5),
            outcome(1, [0.2, 0.2], [False, True], [1e5, 1e5], alloc=[1, 1], e=0.5)]
    m = aggregate(outs, 2, 1.0)
    assert m.avg_delay_s == pytest.approx(0.2)
    assert m.completion_ratio == pytest.approx(0.75)
    assert m.throughput_bps == pytest.approx(1.5e5)
    assert m.avg_energy_j == pytest.approx(1.0)
    assert m.jain_fairness == pytest.approx(jain_fairness([2, 4]))
    rows = m.series_rows()
    assert [r["slot"] for r in rows] == [0, 1]
    assert rows[1]["completion_ratio"] == pytest.approx(0.5)


def test_aggregate_empty():
    m = aggregate([], 5, 1.0)
    assert m.avg_delay_s == 0.0 and m.completion_ratio == 0.0 and m.series_rows() == []
