"""Contract-based incentive design for fog vehicles under hidden types.

The base station offers one item (f_l, w_l) per FV type, where the type
theta_l = sigma_l * f_l^max (willingness times capacity, capacity in GHz).
A type-l FV that takes item (f, w) earns theta_l*w - e*kappa*C*f^2.

Units: resources are passed in Hz but priced per GHz, so the price ``c``
and the reward constraint w_L < c are in per-GHz units. The energy term
e*kappa*C*f^2 is the same number whichever unit f is expressed in.

Solver: with the IR constraint of the lowest type and every local downward
IC constraint binding, each reward is a function of the resources,

    w_1 = a f_1^2 / theta_1,  w_l = w_{l-1} + a (f_l^2 - f_{l-1}^2) / theta_l,

with a = e*kappa*C. Substituting into the base-station utility gives a
separable concave quadratic sum_j (c M_j f_j - q_j f_j^2). Maximising it
over non-decreasing f inside [0, cap] is a bounded weighted isotonic
regression, solved exactly by pool-adjacent-violators where each pooled
block is clipped to its tightest cap. The reward cap
w_L <= c is handled with a Lagrange multiplier found by bisection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

GHZ = 1e9
W_CAP_MARGIN = 1e-9
FEAS_RTOL = 1e-9


class ContractError(ValueError):
    pass


@dataclass(frozen=True)
class FvType:
    theta: float
    f_cap_hz: float
    count: float


@dataclass
class ContractMenu:
    f_hz: np.ndarray
    w: np.ndarray
    price: float
    energy_cost: float
    multiplier: float = 0.0   # on the reward cap

    @property
    def items(self):
        return list(zip(self.f_hz.tolist(), self.w.tolist()))

    def __len__(self):
        return len(self.w)


@dataclass
class FeasibilityReport:
    worst_violation: float
    violations: list = field(default_factory=list)   # (kind, i, j, relative amount)

    @property
    def feasible(self):
        return self.worst_violation <= FEAS_RTOL


def classify_types(fv_profiles, n_types, probs=None):
    """Bucket FVs into at most ``n_types`` quantile groups of theta.

    Bucket sizes follow ``probs`` (uniform by default, largest-remainder
    rounding). A bucket's theta is its members' mean theta and its cap is
    the smallest member capacity, so every member can supply the item.
    Buckets with identical theta are merged. Returns (types, labels) with
    labels[i] the bucket index of ``fv_profiles[i]``.
    """
    thetas = np.array([p.theta for p in fv_profiles], dtype=np.float64)
    caps = np.array([p.f_max_hz for p in fv_profiles], dtype=np.float64)
    m = thetas.shape[0]
    if m == 0:
        raise ContractError("at least one FV is required")
    if n_types < 1:
        raise ContractError("n_types must be >= 1")
    p = np.full(n_types, 1.0 / n_types) if probs is None or len(probs) == 0 else np.asarray(probs, float)
    raw = p * m
    sizes = np.floor(raw).astype(int)
    for i in sorted(range(n_types), key=lambda i: (-(raw[i] - sizes[i]), i))[: m - sizes.sum()]:
        sizes[i] += 1
    order = np.lexsort((np.arange(m), thetas))
    groups = []
    start = 0
    for s in sizes:
        if s > 0:
            groups.append(order[start:start + s])
        start += s
    merged = []
    for g in groups:
        if merged and np.isclose(thetas[merged[-1]].mean(), thetas[g].mean(), rtol=1e-12, atol=0.0):
            merged[-1] = np.concatenate([merged[-1], g])
        else:
            merged.append(g)
    labels = np.empty(m, dtype=np.int64)
    types = []
    for l, g in enumerate(merged):
        labels[g] = l
        types.append(FvType(theta=float(thetas[g].mean()), f_cap_hz=float(caps[g].min()), count=float(len(g))))
    return types, labels


def fv_utility(theta, item, cycles, e, kappa_fv):
    f, w = item
    return theta * w - e * kappa_fv * cycles * f * f


def mbs_utility(menu, types):
    counts = np.array([t.count for t in types])
    thetas = np.array([t.theta for t in types])
    return float(np.sum(menu.price * counts * menu.f_hz / GHZ) - np.sum(counts * thetas * menu.w))


def rewards_from_resources(f_ghz, thetas, a):
    """Rewards implied by tight IR (lowest type) and tight local downward IC."""
    f_ghz = np.asarray(f_ghz, dtype=np.float64)
    sq = f_ghz * f_ghz
    inc = a * np.diff(np.concatenate([[0.0], sq])) / np.asarray(thetas)
    return np.cumsum(inc)


def _arrays(types):
    thetas = np.array([t.theta for t in types], dtype=np.float64)
    counts = np.array([t.count for t in types], dtype=np.float64)
    caps = np.array([t.f_cap_hz for t in types], dtype=np.float64) / GHZ
    return thetas, counts, caps


def solve_contract(types, cycles, price, energy_cost, kappa_fv, f_limit_hz=None, verify=True):
    """Optimal menu for one task of ``cycles`` cycles.

    ``f_limit_hz`` optionally caps every type's resource (e.g. an FV energy
    budget), on top of each type's own capacity.
    """
    thetas, counts, caps = _arrays(types)
    L = thetas.shape[0]
    if L == 0:
        raise ContractError("no FV types")
    if np.any(np.diff(thetas) <= 0):
        raise ContractError("types must have strictly increasing theta")
    if np.any(thetas <= 0) or np.any(counts < 0):
        raise ContractError("theta must be > 0 and counts >= 0")
    if price < 0:
        raise ContractError("price must be >= 0")
    if f_limit_hz is not None:
        caps = np.minimum(caps, f_limit_hz / GHZ)
    # f_j <= f_k <= cap_k for all k >= j
    upper = np.minimum.accumulate(caps[::-1])[::-1]
    a = energy_cost * kappa_fv * cycles * GHZ * GHZ

    mt = counts * thetas
    suffix = np.cumsum(mt[::-1])[::-1]
    ratio = suffix / thetas
    q = a * (ratio - np.append(ratio[1:], 0.0))
    g = 1.0 / thetas - np.append(1.0 / thetas[1:], 0.0)
    w_cap = price * (1.0 - W_CAP_MARGIN)

    def fit(mu):
        wt = q + mu * a * g
        with np.errstate(divide="ignore", invalid="ignore"):
            tgt = np.where(wt > 0, price * counts / (2.0 * wt), 0.0)
        return _kernels.pava_clip(tgt, wt, upper)

    mu = 0.0
    f = fit(0.0)
    w = rewards_from_resources(f, thetas, a)
    if w[-1] > w_cap:
        lo_mu, hi_mu = 0.0, 1.0
        while rewards_from_resources(fit(hi_mu), thetas, a)[-1] > w_cap:
            lo_mu, hi_mu = hi_mu, hi_mu * 2.0
            if hi_mu > 1e300:
                raise ContractError("reward cap cannot be met")
        for _ in range(200):
            mid = 0.5 * (lo_mu + hi_mu)
            if hi_mu - lo_mu <= 1e-13 * hi_mu:
                break
            if rewards_from_resources(fit(mid), thetas, a)[-1] > w_cap:
                lo_mu = mid
            else:
                hi_mu = mid
        mu = hi_mu
        f = fit(mu)
        w = rewards_from_resources(f, thetas, a)

    menu = ContractMenu(f_hz=f * GHZ, w=w, price=price, energy_cost=energy_cost, multiplier=mu)
    if verify:
        rep = verify_feasibility(menu, types, cycles, energy_cost, kappa_fv)
        if not rep.feasible:
            raise ContractError(f"solved menu violates IR/IC: {rep.violations[:3]}")
    return menu


def _rel(lhs, rhs):
    """Relative shortfall of lhs >= rhs."""
    gap = rhs - lhs
    if gap <= 0:
        return 0.0
    return gap / max(abs(lhs), abs(rhs), 1e-300)


def verify_feasibility(menu, types, cycles, e, kappa_fv):
    """Check all L IR and L(L-1) IC inequalities plus monotonicity."""
    thetas = [t.theta for t in types]
    items = menu.items
    L = len(items)
    viol = []
    for i in range(L):
        theta = thetas[i]
        u_own = fv_utility(theta, items[i], cycles, e, kappa_fv)
        cost = e * kappa_fv * cycles * items[i][0] ** 2
        r = _rel(theta * items[i][1], cost)
        if r > 0:
            viol.append(("IR", i, i, r))
        for j in range(L):
            if j == i:
                continue
            u_other = fv_utility(theta, items[j], cycles, e, kappa_fv)
            scale = max(abs(theta * items[i][1]), abs(theta * items[j][1]), cost, 1e-300)
            gap = u_other - u_own
            if gap > 0:
                viol.append(("IC", i, j, gap / scale))
    for i in range(1, L):
        for kind, seq in (("mono_f", menu.f_hz), ("mono_w", menu.w)):
            if seq[i] < seq[i - 1]:
                viol.append((kind, i - 1, i, (seq[i - 1] - seq[i]) / max(abs(seq[i - 1]), 1e-300)))
    if L and menu.w[0] < 0:
        viol.append(("w_nonneg", 0, 0, 1.0))
    if L and menu.w[-1] >= menu.price and menu.price > 0:
        viol.append(("w_cap", L - 1, L - 1, (menu.w[-1] - menu.price) / menu.price))
    worst = max((v[3] for v in viol), default=0.0)
    return FeasibilityReport(worst_violation=worst, violations=viol)


def fv_allocation_for(label, menu):
    """Resource (Hz) an FV in bucket ``label`` contributes to this task."""
    return float(menu.f_hz[label])
