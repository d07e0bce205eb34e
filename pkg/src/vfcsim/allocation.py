"""Convex RSU frequency allocation.

For one RSU and its assigned tasks, minimise the total computation time
sum(C_n / f_n) subject to the RSU frequency budget, each task's deadline
(lower bound on f) and energy cap (upper bound on f). The KKT conditions
give f_n = clip(sqrt(C_n / lam), lo_n, hi_n); lam is found by bisection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass
class AllocationRequest:
    cycles: np.ndarray
    slack_s: np.ndarray          # deadline minus upload and relay delay
    e_cap_j: np.ndarray
    f_max_hz: float
    kappa: float
    priority: np.ndarray = None  # server preference; lowest evicted first
    ids: np.ndarray = None

    def __post_init__(self):
        self.cycles = np.atleast_1d(np.asarray(self.cycles, dtype=np.float64))
        n = self.cycles.shape[0]
        self.slack_s = np.broadcast_to(np.asarray(self.slack_s, dtype=np.float64), (n,)).copy()
        self.e_cap_j = np.broadcast_to(np.asarray(self.e_cap_j, dtype=np.float64), (n,)).copy()
        if self.ids is None:
            self.ids = np.arange(n)
        if self.priority is None:
            lo, _, ok = per_task_bounds(self)
            with np.errstate(divide="ignore"):
                self.priority = np.where(ok, 1.0 / (self.kappa * self.cycles * lo * lo), 0.0)
        else:
            self.priority = np.asarray(self.priority, dtype=np.float64)

    def __len__(self):
        return self.cycles.shape[0]


@dataclass
class AllocationResult:
    f_hz: np.ndarray              # nan where rejected
    accepted: np.ndarray          # bool
    multiplier: float = 0.0
    evicted: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def total_hz(self):
        return float(np.nansum(self.f_hz))


def per_task_bounds(request):
    """Per-task frequency box [lo, hi] and a feasibility flag.

    lo = C / slack meets the deadline (inf when slack <= 0); hi is the
    largest f whose energy kappa*C*f^2 stays within the task's energy cap.
    """
    c = request.cycles
    slack = request.slack_s
    with np.errstate(divide="ignore"):
        lo = np.where(slack > 0, c / np.where(slack > 0, slack, 1.0), np.inf)
    hi = np.sqrt(request.e_cap_j / (request.kappa * c))
    ok = (slack > 0) & (lo <= hi)
    return lo, hi, ok


def sp1_objective(cycles, f_hz):
    return float(np.sum(np.asarray(cycles) / np.asarray(f_hz)))


def solve_sp1(request):
    n = len(request)
    f = np.full(n, np.nan)
    if n == 0:
        return AllocationResult(f, np.zeros(0, dtype=bool), 0.0, np.zeros(0, dtype=bool))
    lo, hi, ok = per_task_bounds(request)
    # single-task boxes also respect the RSU budget
    hi = np.minimum(hi, request.f_max_hz)
    ok &= lo <= hi
    accepted = ok.copy()
    evicted = np.zeros(n, dtype=bool)
    if lo[accepted].sum() > request.f_max_hz:
        # lowest server preference goes first; ties evict the larger id
        order = sorted(np.flatnonzero(accepted), key=lambda i: (request.priority[i], -request.ids[i]))
        budget = lo[accepted].sum()
        for i in order:
            if budget <= request.f_max_hz:
                break
            accepted[i] = False
            evicted[i] = True
            budget -= lo[i]
    idx = np.flatnonzero(accepted)
    if idx.size == 0:
        return AllocationResult(f, accepted, 0.0, evicted)
    f_acc, lam = _kernels.sp1_kkt(request.cycles[idx], lo[idx], hi[idx], request.f_max_hz)
    f[idx] = f_acc
    return AllocationResult(f, accepted, float(lam), evicted)
