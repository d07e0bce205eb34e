"""Run-level metrics: delay, completion, throughput, fairness, energy."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

SUMMARY_FIELDS = ("avg_delay_s", "completion_ratio", "throughput_bps", "jain_fairness", "avg_energy_j")
SERIES_FIELDS = ("slot", "avg_delay_s", "completion_ratio", "throughput_bps", "energy_j", "violations")


def jain_fairness(x):
    """(sum x)^2 / (N sum x^2). An all-zero vector counts as perfectly fair (1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("need at least one value")
    if np.any(x < 0):
        raise ValueError("values must be >= 0")
    sq = float(np.sum(x * x))
    if sq == 0.0:
        return 1.0
    return float(np.sum(x) ** 2 / (x.size * sq))


def throughput(outcomes, horizon_s):
    """Successfully processed input bits per second of horizon."""
    if horizon_s <= 0:
        raise ValueError("horizon_s must be > 0")
    bits = sum(float(np.sum(o.input_bits[o.success])) for o in outcomes)
    return bits / horizon_s


def completion_ratio(outcomes):
    total = sum(o.success.size for o in outcomes)
    if total == 0:
        return 0.0
    return sum(int(np.count_nonzero(o.success)) for o in outcomes) / total


@dataclass
class RunMetrics:
    avg_delay_s: float = 0.0
    completion_ratio: float = 0.0
    throughput_bps: float = 0.0
    jain_fairness: float = 1.0
    avg_energy_j: float = 0.0
    violations: int = 0
    series: dict = field(default_factory=lambda: {k: [] for k in SERIES_FIELDS})

    def summary(self):
        return {k: getattr(self, k) for k in SUMMARY_FIELDS}

    def to_dict(self):
        return asdict(self)

    def series_rows(self):
        cols = [self.series[k] for k in SERIES_FIELDS]
        return [dict(zip(SERIES_FIELDS, vals)) for vals in zip(*cols)]


def aggregate(outcomes, n_tvs, slot_s):
    """Fold per-slot outcomes into ``RunMetrics``."""
    m = RunMetrics()
    T = len(outcomes)
    if T == 0:
        return m
    delays = np.concatenate([o.delay_s for o in outcomes]) if n_tvs else np.zeros(0)
    m.avg_delay_s = float(delays.mean()) if delays.size else 0.0
    m.completion_ratio = completion_ratio(outcomes)
    m.throughput_bps = throughput(outcomes, T * slot_s)
    m.avg_energy_j = float(sum(o.total_energy_j for o in outcomes) / T)
    m.violations = int(sum(len(o.violations) for o in outcomes))
    if n_tvs:
        x = np.sum([o.allocated_hz for o in outcomes], axis=0)
        m.jain_fairness = jain_fairness(x)
    for o in outcomes:
        n = o.success.size
        m.series["slot"].append(o.slot)
        m.series["avg_delay_s"].append(float(o.delay_s.mean()) if n else 0.0)
        m.series["completion_ratio"].append(float(o.success.mean()) if n else 0.0)
        m.series["throughput_bps"].append(float(np.sum(o.input_bits[o.success])) / slot_s)
        m.series["energy_j"].append(o.total_energy_j)
        m.series["violations"].append(len(o.violations))
    return m
