"""Two-sided many-to-one matching between task vehicles and servers.

Servers are indexed 0..S-1 (RSUs first, then FVs). A TV ranks servers by
1/delay; a server ranks TVs by 1/energy it would spend on them. Servers
hold a frequency budget and optionally a head-count limit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .types import OffloadDecision


@dataclass
class PreferenceTable:
    tv_prefs: list            # tv_prefs[n] -> servers, best first
    server_prefs: list        # server_prefs[s] -> TVs, best first
    phi_tv: np.ndarray        # (N, S) 1/delay, nan if unacceptable
    phi_server: np.ndarray    # (S, N) 1/energy, nan if unacceptable

    @property
    def n_tvs(self):
        return self.phi_tv.shape[0]

    @property
    def n_servers(self):
        return self.phi_tv.shape[1]

    def server_rank(self):
        """(S, N) int rank of each TV at each server; N for unlisted TVs."""
        rank = np.full((self.n_servers, self.n_tvs), self.n_tvs, dtype=np.int64)
        for s, lst in enumerate(self.server_prefs):
            for r, n in enumerate(lst):
                rank[s, n] = r
        return rank

    def tv_rank(self, n, s):
        lst = self.tv_prefs[n]
        return lst.index(s) if s in lst else len(lst)


@dataclass
class Matching:
    tv_to_server: np.ndarray      # -1 unmatched
    server_to_tvs: list
    rejected: list = field(default_factory=list)   # rejected[n] -> servers that turned n down
    proposals: int = 0

    def is_consistent(self):
        for s, tvs in enumerate(self.server_to_tvs):
            if any(self.tv_to_server[n] != s for n in tvs):
                return False
        return all(n in self.server_to_tvs[s] for n, s in enumerate(self.tv_to_server) if s >= 0)

    def to_records(self):
        """Line-delimited JSON trace: one record per TV."""
        return "\n".join(
            json.dumps({"tv": n, "server": int(s), "rejected_by": [int(x) for x in self.rejected[n]]})
            for n, s in enumerate(self.tv_to_server)
        )


def _order(values, ids):
    # descending value, ascending id
    return [int(i) for i in sorted(ids, key=lambda i: (-values[i], i))]


def build_preferences(delay_s, energy_j, acceptable=None):
    """Preference lists from (N, S) delay and energy estimates.

    Pairs that are not acceptable (unreachable, infinite delay, or masked
    out by ``acceptable``) are left off both lists.
    """
    delay_s = np.asarray(delay_s, dtype=np.float64)
    energy_j = np.asarray(energy_j, dtype=np.float64)
    ok = np.isfinite(delay_s) & (delay_s > 0) & np.isfinite(energy_j) & (energy_j > 0)
    if acceptable is not None:
        ok &= np.asarray(acceptable, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_tv = np.where(ok, 1.0 / delay_s, np.nan)
        phi_srv = np.where(ok, 1.0 / energy_j, np.nan).T
    n_tv, n_srv = delay_s.shape
    tv_prefs = [_order(phi_tv[n], np.flatnonzero(ok[n])) for n in range(n_tv)]
    server_prefs = [_order(phi_srv[s], np.flatnonzero(ok[:, s])) for s in range(n_srv)]
    return PreferenceTable(tv_prefs, server_prefs, phi_tv, phi_srv)


def _pref_matrix(prefs):
    width = max((len(p) for p in prefs.tv_prefs), default=0)
    mat = np.full((prefs.n_tvs, max(width, 1)), -1, dtype=np.int64)
    for n, lst in enumerate(prefs.tv_prefs):
        mat[n, : len(lst)] = lst
    return mat


def _count_caps(count_caps, n_srv):
    if count_caps is None:
        return np.zeros(n_srv, dtype=np.int64)
    return np.asarray(count_caps, dtype=np.int64)


def deferred_acceptance(prefs, quotas, demands, count_caps=None):
    """TV-proposing deferred acceptance (rounds of simultaneous proposals).

    A server walks proposers plus incumbents best-first and keeps each one
    that still fits ``quotas`` (and ``count_caps`` when > 0); the others are
    rejected and cross it off. TVs that run out of servers stay
    unmatched (-1) and fall back to local execution downstream.
    """
    n_srv = prefs.n_servers
    if prefs.n_tvs == 0:
        return Matching(np.zeros(0, dtype=np.int64), [[] for _ in range(n_srv)], [], 0)
    quotas = np.asarray(quotas, dtype=np.float64)
    demands = np.nan_to_num(np.asarray(demands, dtype=np.float64), nan=np.inf)
    match, proposals = _kernels.deferred_acceptance(
        _pref_matrix(prefs), prefs.server_rank(), demands, quotas, _count_caps(count_caps, n_srv))
    match = np.asarray(match, dtype=np.int64)
    server_to_tvs = [[] for _ in range(n_srv)]
    rank = prefs.server_rank()
    for n, s in enumerate(match):
        if s >= 0:
            server_to_tvs[s].append(n)
    for s in range(n_srv):
        server_to_tvs[s].sort(key=lambda n: (rank[s, n], n))
    rejected = []
    for n, lst in enumerate(prefs.tv_prefs):
        s = match[n]
        rejected.append(lst[: lst.index(s)] if s >= 0 else list(lst))
    return Matching(match, server_to_tvs, rejected, int(proposals))


def would_admit(s, n, matching, rank, quotas, demands, count_caps):
    """True if server ``s`` would keep ``n`` next to its current partners.

    Admission is greedy in rank order, so ``n`` gets in iff the partners
    it outranks leave enough room.
    """
    above = [t for t in matching.server_to_tvs[s] if rank[s, t] < rank[s, n]]
    used = 0.0
    for t in above:
        used += demands[t, s]
    if used + demands[n, s] > quotas[s]:
        return False
    limit = count_caps[s]
    return not (limit > 0 and len(above) + 1 > limit)


def audit_stability(matching, prefs, quotas, demands, count_caps=None):
    """All blocking pairs (n, s): n prefers s to its match and s would admit n."""
    rank = prefs.server_rank()
    quotas = np.asarray(quotas, dtype=np.float64)
    demands = np.asarray(demands, dtype=np.float64)
    caps = _count_caps(count_caps, prefs.n_servers)
    out = []
    for n, lst in enumerate(prefs.tv_prefs):
        cur = matching.tv_to_server[n]
        better = lst[: lst.index(cur)] if cur >= 0 else lst
        for s in better:
            if would_admit(s, n, matching, rank, quotas, demands, caps):
                out.append((n, int(s)))
    return out


def decisions_from_matching(matching, n_rsus):
    """One-hot decisions; unmatched TVs execute locally."""
    out = []
    for n, s in enumerate(matching.tv_to_server):
        if s < 0:
            out.append(OffloadDecision.local(n))
        elif s < n_rsus:
            out.append(OffloadDecision.rsu(n, s))
        else:
            out.append(OffloadDecision.fv(n, s - n_rsus))
    return out
