"""Comparison policies. All share the engine's allocators and constraint checker."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .engine import Plan
from .jcratoa import candidate_tables
from .types import Dest, OffloadDecision

BIG_COST = 1e9


def _resolve_rsus(ctx, decisions, f):
    """Final SP1 per RSU on its assigned set; rejected tasks run locally."""
    for k in range(ctx.n_rsus):
        members = [n for n, d in enumerate(decisions) if d.dest is Dest.RSU and d.server == k]
        alloc = ctx.solve_rsu(members, k)
        for n in members:
            if n in alloc:
                f[n] = alloc[n]
            else:
                decisions[n] = OffloadDecision.local(n)
                f[n] = np.nan
    return decisions, f


def alo(ctx):
    return Plan([OffloadDecision.local(n) for n in range(ctx.n_tvs)], np.full(ctx.n_tvs, np.nan))


def nro(ctx):
    decisions = [OffloadDecision.rsu(n, ctx.cover[n]) for n in range(ctx.n_tvs)]
    decisions, f = _resolve_rsus(ctx, decisions, np.full(ctx.n_tvs, np.nan))
    return Plan(decisions, f)


def nfo(ctx):
    """Nearest in-range FV with its contract item; overloads are left to the checker."""
    near = ctx.nearest_fv()
    f_fv = ctx.contract_fv_f
    decisions, f = [], np.full(ctx.n_tvs, np.nan)
    for n, m in enumerate(near):
        if m >= 0 and f_fv[n, m] > 0:
            decisions.append(OffloadDecision.fv(n, m))
            f[n] = f_fv[n, m]
        else:
            decisions.append(OffloadDecision.local(n))
    return Plan(decisions, f)


def nso(ctx):
    """Better of the nearest RSU and the nearest FV by estimated delay; ties go to the RSU."""
    near = ctx.nearest_fv()
    f_fv = ctx.contract_fv_f
    rsu_d = ctx.rsu_delay(np.nan_to_num(ctx.provisional_rsu_f))
    fv_d = ctx.fv_delay(f_fv)
    decisions, f = [], np.full(ctx.n_tvs, np.nan)
    for n in range(ctx.n_tvs):
        k, m = ctx.cover[n], near[n]
        d_fv = fv_d[n, m] if m >= 0 else np.inf
        if d_fv < rsu_d[n, k]:
            decisions.append(OffloadDecision.fv(n, m))
            f[n] = f_fv[n, m]
        else:
            decisions.append(OffloadDecision.rsu(n, k))
    decisions, f = _resolve_rsus(ctx, decisions, f)
    return Plan(decisions, f)


def server_slots(ctx, demand, ok):
    """Server index per unit slot: floor(f_max / mean demand) slots per RSU."""
    cols = []
    for k in range(ctx.n_rsus):
        d = demand[ok[:, k], k]
        if d.size:
            cols += [k] * int(min(ctx.n_tvs, max(1, np.floor(ctx.rsu_fmax[k] / d.mean()))))
    for m in range(ctx.n_fvs):
        if ok[:, ctx.n_rsus + m].any():
            cols += [ctx.n_rsus + m] * ctx.config.fv_max_tvs
    return np.array(cols, dtype=np.int64)


def kmmto(ctx):
    """Min-total-delay assignment of TVs to server unit slots or their own Local column."""
    N = ctx.n_tvs
    if N == 0:
        return Plan([], np.zeros(0))
    delay, _, demand, ok = candidate_tables(ctx)
    cols = server_slots(ctx, demand, ok)
    cost = np.full((N, cols.size + N), BIG_COST)
    if cols.size:
        cost[:, : cols.size] = np.where(ok[:, cols], delay[:, cols], BIG_COST)
    cost[np.arange(N), cols.size + np.arange(N)] = ctx.local_delay
    rows, assigned = linear_sum_assignment(cost)
    decisions = [OffloadDecision.local(n) for n in range(N)]
    f = np.full(N, np.nan)
    f_fv = ctx.contract_fv_f
    for n, c in zip(rows, assigned):
        if c >= cols.size or cost[n, c] >= BIG_COST:
            continue
        s = cols[c]
        if s < ctx.n_rsus:
            decisions[n] = OffloadDecision.rsu(n, s)
        else:
            decisions[n] = OffloadDecision.fv(n, s - ctx.n_rsus)
            f[n] = f_fv[n, s - ctx.n_rsus]
    decisions, f = _resolve_rsus(ctx, decisions, f)
    return Plan(decisions, f, extras={"cost": cost, "assignment": (rows, assigned)})


def broldra(ctx):
    """Upload to the nearest RSU, which keeps the task or forwards it to an FV.

    The RSU scans its TVs in id order and forwards to the unused FV in its
    segment that minimises upload + one fiber hop + compute, when that
    beats its own estimate.
    """
    N = ctx.n_tvs
    f_fv = ctx.contract_fv_f
    rsu_d = ctx.rsu_delay(np.nan_to_num(ctx.provisional_rsu_f))
    decisions, f = [], np.full(N, np.nan)
    via = np.zeros(N, dtype=bool)
    used = np.zeros(ctx.n_fvs, dtype=bool)
    for n in range(N):
        k = ctx.cover[n]
        best, best_d = -1, rsu_d[n, k]
        pre = ctx.upload_rsu_s[n] + ctx.input_bits[n] / ctx.config.fiber_bps
        for m in np.flatnonzero((ctx.fv_cover == k) & ~used):
            if f_fv[n, m] > 0:
                d = pre + ctx.cycles[n] / f_fv[n, m]
                if d < best_d:
                    best, best_d = m, d
        if best >= 0:
            used[best] = True
            via[n] = True
            decisions.append(OffloadDecision.fv(n, best))
            f[n] = f_fv[n, best]
        else:
            decisions.append(OffloadDecision.rsu(n, k))
    decisions, f = _resolve_rsus(ctx, decisions, f)
    return Plan(decisions, f, via_rsu=via)
