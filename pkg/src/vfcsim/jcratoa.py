"""Joint resource allocation and task offloading policy.

Per slot: tentative RSU frequencies from the convex allocator, FV
frequencies from the contract menu, preference lists from delay and
server energy, deferred acceptance under frequency budgets, then a final
convex re-solve on each RSU's accepted set.
"""
from __future__ import annotations

import numpy as np

from .engine import Plan
from .matching import build_preferences, decisions_from_matching, deferred_acceptance
from .types import Dest, OffloadDecision


def candidate_tables(ctx):
    """(N, S) delay, server energy, demand and acceptability over RSUs then FVs."""
    cfg = ctx.config
    f_rsu = ctx.provisional_rsu_f
    f_fv = ctx.contract_fv_f
    demand = np.concatenate([f_rsu, f_fv], axis=1)
    delay = np.concatenate([ctx.rsu_delay(np.nan_to_num(f_rsu)), ctx.fv_delay(f_fv)], axis=1)
    kappa = np.array([s.kappa for s in ctx.rsus] + [s.kappa for s in ctx.fvs])
    with np.errstate(invalid="ignore"):
        energy = kappa[None, :] * ctx.cycles[:, None] * demand ** 2
        tx = np.concatenate([np.repeat(ctx.tx_energy_rsu[:, None], ctx.n_rsus, axis=1), ctx.tx_energy_fv], axis=1)
        ok = (np.isfinite(demand) & (demand > 0) & np.isfinite(delay)
              & (delay <= ctx.deadline[:, None]) & (delay < ctx.local_delay[:, None])
              & (tx <= cfg.e_max_tv_j))
    return delay, energy, demand, ok


def quotas(ctx):
    q = np.concatenate([ctx.rsu_fmax, ctx.fv_fmax])
    counts = np.concatenate([np.zeros(ctx.n_rsus, np.int64), np.full(ctx.n_fvs, ctx.config.fv_max_tvs)])
    return q, counts


def finalize(ctx, decisions, f_fv):
    """Re-solve each RSU's allocation and send TVs Local where that is faster.

    Tasks the re-solve rejects go Local. A TV leaving an RSU frees budget
    for the rest, so the loop repeats until no decision changes.
    """
    decisions = list(decisions)
    f = np.full(ctx.n_tvs, np.nan)
    for n, d in enumerate(decisions):
        if d.dest is Dest.FV:
            f[n] = f_fv[n, d.server]
    changed = True
    while changed:
        changed = False
        for k in range(ctx.n_rsus):
            members = [n for n, d in enumerate(decisions) if d.dest is Dest.RSU and d.server == k]
            alloc = ctx.solve_rsu(members, k)
            for n in members:
                if n not in alloc:
                    decisions[n] = OffloadDecision.local(n)
                    f[n] = np.nan
                    changed = True
                    continue
                f[n] = alloc[n]
                if ctx.pre_compute_rsu_s[n, k] + ctx.cycles[n] / f[n] > ctx.local_delay[n]:
                    decisions[n] = OffloadDecision.local(n)
                    f[n] = np.nan
                    changed = True
        for n, d in enumerate(decisions):
            if d.dest is Dest.FV:
                m = d.server
                if ctx.upload_fv_s[n, m] + ctx.cycles[n] / f[n] > ctx.local_delay[n]:
                    decisions[n] = OffloadDecision.local(n)
                    f[n] = np.nan
    return decisions, f


def jcratoa(ctx):
    delay, energy, demand, ok = candidate_tables(ctx)
    prefs = build_preferences(delay, energy, ok)
    q, counts = quotas(ctx)
    match = deferred_acceptance(prefs, q, demand, counts)
    decisions, f = finalize(ctx, decisions_from_matching(match, ctx.n_rsus), ctx.contract_fv_f)
    extras = {"matching": match, "prefs": prefs, "quotas": q, "demands": demand, "count_caps": counts}
    return Plan(decisions, f, extras=extras)
