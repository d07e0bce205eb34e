"""Pure-Python reference versions of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Inputs are plain float/int sequences or 1-D/2-D numpy arrays; outputs are
numpy arrays so both backends are interchangeable.
"""
import math

import numpy as np

BISECT_RTOL = 1e-10
BISECT_MAX_ITER = 200


def sp1_kkt(cycles, lo, hi, f_max):
    """Minimise sum(C/f) s.t. sum(f) <= f_max and lo <= f <= hi.

    Every box must be non-empty and ``sum(lo) <= f_max``; the caller handles
    eviction. Returns ``(f, lam)`` with ``lam`` the capacity multiplier.
    """
    cycles = np.asarray(cycles, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    n = cycles.shape[0]
    if n == 0:
        return np.zeros(0), 0.0
    if hi.sum() <= f_max:
        return hi.copy(), 0.0

    sq = np.sqrt(cycles)
    # f(lam) = clip(sqrt(C/lam), lo, hi); sum is non-increasing in lam
    lam_a = float(np.min(cycles / (hi * hi)))   # every task at hi
    lam_b = float(np.max(cycles / (lo * lo)))   # every task at lo
    log_a, log_b = math.log(lam_a), math.log(lam_b)
    for _ in range(BISECT_MAX_ITER):
        if lam_b - lam_a <= BISECT_RTOL * lam_b:
            break
        log_m = 0.5 * (log_a + log_b)
        lam_m = math.exp(log_m)
        total = np.clip(sq / math.sqrt(lam_m), lo, hi).sum()
        if total > f_max:
            log_a, lam_a = log_m, lam_m
        else:
            log_b, lam_b = log_m, lam_m

    # polish: fix the clamped set at lam_b and solve the free set exactly
    raw = sq / math.sqrt(lam_b)
    at_lo = raw <= lo
    at_hi = raw >= hi
    free = ~(at_lo | at_hi)
    f = np.clip(raw, lo, hi)
    if free.any():
        budget = f_max - f[at_lo].sum() - f[at_hi].sum()
        s = budget / sq[free].sum()
        cand = s * sq[free]
        if s > 0 and np.all(cand >= lo[free]) and np.all(cand <= hi[free]):
            f[free] = cand
            return f, 1.0 / (s * s)
    return f, lam_b


def pava_clip(target, weight, upper):
    """Weighted non-decreasing fit of ``target`` inside ``[0, upper]``.

    Pool-adjacent-violators over the separable pieces w*(f - t)^2 restricted
    to [0, u]: a pooled block takes its weighted mean clipped to zero and the
    smallest upper bound in the block, and adjacent blocks merge while their
    clipped values decrease.
    """
    n = len(target)
    sw = [0.0] * n      # sum of weights
    swt = [0.0] * n     # sum of weight * target
    st = [0.0] * n      # plain sum of targets (zero-weight blocks)
    cap = [0.0] * n
    vals = [0.0] * n
    sizes = [0] * n
    top = -1

    def value(b):
        m = swt[b] / sw[b] if sw[b] > 0.0 else st[b] / sizes[b]
        return min(max(m, 0.0), cap[b])

    for i in range(n):
        top += 1
        w, t = float(weight[i]), float(target[i])
        sw[top], swt[top], st[top], cap[top], sizes[top] = w, w * t, t, float(upper[i]), 1
        vals[top] = value(top)
        while top > 0 and vals[top - 1] > vals[top]:
            sw[top - 1] += sw[top]
            swt[top - 1] += swt[top]
            st[top - 1] += st[top]
            cap[top - 1] = min(cap[top - 1], cap[top])
            sizes[top - 1] += sizes[top]
            top -= 1
            vals[top] = value(top)
    out = np.empty(n)
    pos = 0
    for b in range(top + 1):
        out[pos:pos + sizes[b]] = vals[b]
        pos += sizes[b]
    return out


def deferred_acceptance(prefs, rank, demand, cap, count_cap):
    """TV-proposing deferred acceptance with budget and head-count quotas.

    prefs:     (N, S) int, each row the TV's servers best-first, padded with -1
    rank:      (S, N) int, the server's rank of each TV (0 = best)
    demand:    (N, S) float, resource a TV consumes at a server
    cap:       (S,) float resource budget per server
    count_cap: (S,) int max TVs per server (<= 0 means unlimited)

    Each round, every free TV with servers left proposes to its best
    remaining one. A server walks proposers and incumbents best-first and
    keeps each one that still fits both quotas; a TV that does not fit is
    rejected and strikes that server, and the walk goes on.

    Returns ``(match, proposals)`` with ``match[n] = -1`` for unmatched TVs.
    """
    prefs = np.asarray(prefs)
    rank = np.asarray(rank)
    demand = np.asarray(demand, dtype=np.float64)
    n_tv = prefs.shape[0]
    n_srv = rank.shape[0]
    width = prefs.shape[1] if prefs.ndim == 2 else 0
    nxt = [0] * n_tv
    match = [-1] * n_tv
    held = [[] for _ in range(n_srv)]
    proposals = 0
    while True:
        incoming = [[] for _ in range(n_srv)]
        any_prop = False
        for n in range(n_tv):
            if match[n] >= 0 or nxt[n] >= width:
                continue
            s = int(prefs[n, nxt[n]])
            if s < 0:
                nxt[n] = width
                continue
            nxt[n] += 1
            incoming[s].append(n)
            proposals += 1
            any_prop = True
        if not any_prop:
            break
        for s in range(n_srv):
            if not incoming[s]:
                continue
            pool = held[s] + incoming[s]
            pool.sort(key=lambda t: (rank[s, t], t))
            kept = []
            used = 0.0
            limit = int(count_cap[s])
            for t in pool:
                if used + demand[t, s] > cap[s] or (0 < limit <= len(kept)):
                    match[t] = -1
                    continue
                used += demand[t, s]
                kept.append(t)
                match[t] = s
            held[s] = kept
    return np.array(match, dtype=np.int64), proposals
