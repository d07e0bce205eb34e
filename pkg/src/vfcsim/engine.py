"""Time-slotted simulation loop, per-slot state and constraint accounting.

Each slot: draw the channel for the current positions, ask the policy for
decisions and frequencies, evaluate delays and energies, check the system
constraints, then move the vehicles. Budgets are per slot and tasks never
carry over: a task that misses its deadline is simply failed. A task that
cannot be executed as planned (unreachable server, no frequency, a violated
budget) is dropped and charged at least its deadline as delay.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import channel
from .allocation import AllocationRequest, solve_sp1
from .contract import ContractError, classify_types, solve_contract
from .metrics import aggregate
from .mobility import advance_positions, gauss_markov_velocity
from .scenario import covering_rsu, generate_scenario, spawn_streams
from .types import Dest

log = logging.getLogger(__name__)

CONSTRAINTS = ("one_hot", "reachability", "tv_energy", "fv_energy", "rsu_energy",
               "fv_capacity", "rsu_capacity")
RTOL = 1e-9


@dataclass
class Plan:
    """What a policy returns for one slot.

    ``f_hz[n]`` is the server frequency given to TV n (ignored for Local).
    ``via_rsu[n]`` marks FV tasks relayed through the covering RSU instead
    of sent over V2V. ``extras`` carries policy internals (matching, prefs).
    """
    decisions: list
    f_hz: np.ndarray
    via_rsu: np.ndarray = None
    extras: dict = field(default_factory=dict)


@dataclass
class Violation:
    constraint: str
    node: str
    tvs: tuple
    amount: float


@dataclass
class SlotOutcome:
    slot: int
    decisions: list
    delay_s: np.ndarray
    success: np.ndarray
    tv_energy_j: np.ndarray
    server_energy_j: np.ndarray        # RSUs then FVs
    server_alloc_hz: np.ndarray
    allocated_hz: np.ndarray           # per TV: local f or server f
    input_bits: np.ndarray
    violations: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def total_energy_j(self):
        return float(self.tv_energy_j.sum() + self.server_energy_j.sum())


class SlotContext:
    """Everything a policy may look at in one slot.

    Arrays are indexed by TV n, RSU k and FV m. ``rate_rsu[n]`` is the
    uplink rate to the covering RSU ``cover[n]``; ``rate_fv[n, m]`` is the
    V2V rate, zero when m is outside TV n's range.
    """

    def __init__(self, config, scenario, slot, tasks, tv_pos, fv_pos, rate_rsu, rate_fv,
                 fv_types=None, fv_labels=None):
        self.config = config
        self.scenario = scenario
        self.slot = slot
        self.tasks = tasks
        self.tv_pos = tv_pos
        self.fv_pos = fv_pos
        self.rate_rsu = rate_rsu
        self.rate_fv = rate_fv
        self.fv_types = fv_types or []
        self.fv_labels = fv_labels if fv_labels is not None else np.zeros(0, dtype=np.int64)
        self.rsus = scenario.rsus
        self.fvs = scenario.fvs
        self.n_tvs = len(tasks)
        self.n_rsus = len(self.rsus)
        self.n_fvs = len(self.fvs)
        L = config.road_length_m
        self.cover = covering_rsu(tv_pos[:, 0], L, self.n_rsus) if self.n_tvs else np.zeros(0, np.int64)
        self.fv_cover = covering_rsu(fv_pos[:, 0], L, self.n_rsus) if self.n_fvs else np.zeros(0, np.int64)
        self.hops = np.array([r.hops_to for r in self.rsus], dtype=np.int64)
        self.cycles = np.array([t.cycles for t in tasks], dtype=np.float64)
        self.input_bits = np.array([t.input_bits for t in tasks], dtype=np.float64)
        self.deadline = np.array([t.deadline_s for t in tasks], dtype=np.float64)
        tv = scenario.tvs[: self.n_tvs]
        self.f_tv = np.array([p.f_hz for p in tv], dtype=np.float64)
        self.tx_power = np.array([p.tx_power_w for p in tv], dtype=np.float64)
        self.rsu_fmax = np.array([r.f_max_hz for r in self.rsus])
        self.fv_fmax = np.array([f.f_max_hz for f in self.fvs])
        self._menus = {}

    # local execution
    @cached_property
    def local_delay(self):
        return self.cycles / self.f_tv

    @cached_property
    def local_energy(self):
        return self.config.kappa_tv * self.cycles * self.f_tv ** 2

    # uploads
    @cached_property
    def upload_rsu_s(self):
        with np.errstate(divide="ignore"):
            return np.where(self.rate_rsu > 0, self.input_bits / np.maximum(self.rate_rsu, 1e-300), np.inf)

    @cached_property
    def upload_fv_s(self):
        with np.errstate(divide="ignore"):
            return np.where(self.rate_fv > 0, self.input_bits[:, None] / np.maximum(self.rate_fv, 1e-300), np.inf)

    @cached_property
    def fv_reachable(self):
        return self.rate_fv > 0

    @cached_property
    def pre_compute_rsu_s(self):
        """(N, K) upload plus fiber relay time before computing at RSU k."""
        h = self.hops[self.cover] if self.n_tvs else np.zeros((0, self.n_rsus))
        return self.upload_rsu_s[:, None] + h * self.input_bits[:, None] / self.config.fiber_bps

    @cached_property
    def tx_energy_rsu(self):
        return self.tx_power * self.upload_rsu_s

    @cached_property
    def tx_energy_fv(self):
        return self.tx_power[:, None] * self.upload_fv_s

    # RSU allocation
    def rsu_request(self, tv_ids, k):
        tv_ids = np.asarray(tv_ids, dtype=np.int64)
        size = max(len(tv_ids), 1)
        return AllocationRequest(
            cycles=self.cycles[tv_ids],
            slack_s=self.deadline[tv_ids] - self.pre_compute_rsu_s[tv_ids, k],
            e_cap_j=np.full(len(tv_ids), self.rsus[k].e_max_j / size),
            f_max_hz=self.rsus[k].f_max_hz,
            kappa=self.rsus[k].kappa,
            ids=tv_ids,
        )

    def solve_rsu(self, tv_ids, k):
        """SP1 on ``tv_ids`` at RSU k; returns {tv: f} for accepted tasks."""
        if len(tv_ids) == 0:
            return {}
        res = solve_sp1(self.rsu_request(tv_ids, k))
        return {int(n): float(f) for n, f, ok in zip(tv_ids, res.f_hz, res.accepted) if ok}

    @cached_property
    def provisional_rsu_f(self):
        """(N, K) tentative RSU frequencies, nan where SP1 would reject.

        A TV covered by RSU k gets its share of SP1 over k's coverage set;
        any other TV gets its share of SP1 over that set plus itself.
        """
        f = np.full((self.n_tvs, self.n_rsus), np.nan)
        for k in range(self.n_rsus):
            home = np.flatnonzero(self.cover == k)
            for n, v in self.solve_rsu(home, k).items():
                f[n, k] = v
            for n in np.flatnonzero(self.cover != k):
                alloc = self.solve_rsu(np.append(home, n), k)
                if int(n) in alloc:
                    f[n, k] = alloc[int(n)]
        return f

    # FV contract
    def menu_for(self, n):
        if n not in self._menus:
            c = self.cycles[n]
            limit = np.sqrt(self.config.e_max_fv_j / (self.config.kappa_fv * c))
            try:
                self._menus[n] = solve_contract(self.fv_types, c, self.config.unit_price,
                                                self.config.energy_cost, self.config.kappa_fv,
                                                f_limit_hz=limit)
            except ContractError as exc:
                log.warning("slot %d TV %d: no contract (%s)", self.slot, n, exc)
                self._menus[n] = None
        return self._menus[n]

    @cached_property
    def contract_fv_f(self):
        """(N, M) FV frequency each TV's task would receive from each FV."""
        f = np.zeros((self.n_tvs, self.n_fvs))
        if self.n_fvs == 0:
            return f
        for n in range(self.n_tvs):
            menu = self.menu_for(n)
            if menu is not None:
                f[n] = menu.f_hz[self.fv_labels]
        return f

    # delay estimates
    def rsu_delay(self, f):
        """(N, K) delay for RSU frequencies ``f`` (nan/0 -> inf)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            comp = np.where(f > 0, self.cycles[:, None] / f, np.inf)
        return self.pre_compute_rsu_s + comp

    def fv_delay(self, f):
        with np.errstate(divide="ignore", invalid="ignore"):
            comp = np.where(f > 0, self.cycles[:, None] / f, np.inf)
        return self.upload_fv_s + comp

    def nearest_fv(self):
        """Nearest in-range FV per TV, -1 if none (ties -> lower id)."""
        out = np.full(self.n_tvs, -1, dtype=np.int64)
        if self.n_fvs == 0:
            return out
        d = np.abs(self.tv_pos[:, None, 0] - self.fv_pos[None, :, 0])
        d = np.where(self.fv_reachable, d, np.inf)
        best = np.argmin(d, axis=1)
        ok = np.isfinite(d[np.arange(self.n_tvs), best])
        out[ok] = best[ok]
        return out


def _hypot(a, b):
    return np.hypot(a[..., 0] - b[..., 0], a[..., 1] - b[..., 1])


def draw_rates(config, scenario, tv_pos, fv_pos, rng):
    """Uplink rate to the covering RSU and V2V rates for one slot."""
    n_tv, n_fv = tv_pos.shape[0], fv_pos.shape[0]
    tv = scenario.tvs[:n_tv]
    bw = np.array([p.bandwidth_hz for p in tv])
    pw = np.array([p.tx_power_w for p in tv])
    rsu_xy = np.array([r.position_m for r in scenario.rsus])
    cover = covering_rsu(tv_pos[:, 0], config.road_length_m, len(rsu_xy))
    rate_rsu = np.zeros(n_tv)
    rate_fv = np.zeros((n_tv, n_fv))
    if n_tv == 0:
        return rate_rsu, rate_fv
    d_h = _hypot(tv_pos, rsu_xy[cover])
    g = channel.v2i_gains(d_h, config, rng)
    rate_rsu = channel.transmission_rate(bw, pw, g, config.noise_w)
    if n_fv:
        d = _hypot(tv_pos[:, None, :], fv_pos[None, :, :])
        g = channel.v2v_gains(d, config, rng)
        rate_fv = channel.transmission_rate(bw[:, None], pw[:, None], g, config.noise_w)
        rate_fv = np.where(d <= config.tv_range_m, rate_fv, 0.0)
    return np.atleast_1d(rate_rsu), rate_fv


def _over(value, cap):
    return value > cap * (1.0 + RTOL)


def evaluate(ctx, plan):
    """Delays, energies and constraint checks for one slot's plan."""
    N, K, M = ctx.n_tvs, ctx.n_rsus, ctx.n_fvs
    cfg = ctx.config
    f = np.asarray(plan.f_hz, dtype=np.float64)
    via = np.zeros(N, dtype=bool) if plan.via_rsu is None else np.asarray(plan.via_rsu, dtype=bool)
    delay = np.zeros(N)
    e_tv = np.zeros(N)
    alloc = np.zeros(N)
    srv_e = np.zeros(K + M)
    srv_f = np.zeros(K + M)
    members = [[] for _ in range(K + M)]
    failed = np.zeros(N, dtype=bool)
    viol = []

    def flag(kind, node, tvs, amount):
        viol.append(Violation(kind, node, tuple(int(t) for t in tvs), float(amount)))
        failed[list(tvs)] = True

    if len(plan.decisions) != N:
        raise ValueError(f"policy returned {len(plan.decisions)} decisions for {N} TVs")
    for n, d in enumerate(plan.decisions):
        if d.tv_id != n or d.dest is Dest.NONE:
            flag("one_hot", f"tv{n}", [n], 1.0)
            delay[n] = ctx.deadline[n]
            continue
        c = ctx.cycles[n]
        if d.dest is Dest.LOCAL:
            delay[n] = ctx.local_delay[n]
            e_tv[n] = ctx.local_energy[n]
            alloc[n] = ctx.f_tv[n]
            continue
        fn = f[n]
        if d.dest is Dest.RSU:
            k = d.server
            if not (0 <= k < K) or not np.isfinite(ctx.upload_rsu_s[n]):
                flag("reachability", f"rsu{k}", [n], 1.0)
                delay[n] = ctx.deadline[n]
                continue
            s = k
            pre = ctx.pre_compute_rsu_s[n, k]
            e_tv[n] = ctx.tx_energy_rsu[n]
            kappa = ctx.rsus[k].kappa
        else:
            m = d.server
            if not (0 <= m < M):
                flag("reachability", f"fv{m}", [n], 1.0)
                delay[n] = ctx.deadline[n]
                continue
            s = K + m
            kappa = ctx.fvs[m].kappa
            if via[n]:
                ok = np.isfinite(ctx.upload_rsu_s[n]) and ctx.fv_cover[m] == ctx.cover[n]
                pre = ctx.upload_rsu_s[n] + ctx.input_bits[n] / cfg.fiber_bps
                e_tv[n] = ctx.tx_energy_rsu[n]
            else:
                ok = bool(ctx.fv_reachable[n, m])
                pre = ctx.upload_fv_s[n, m]
                e_tv[n] = ctx.tx_energy_fv[n, m]
            if not ok:
                flag("reachability", f"fv{m}", [n], 1.0)
                delay[n] = ctx.deadline[n]
                continue
        if not (np.isfinite(fn) and fn > 0):
            flag("rsu_capacity" if s < K else "fv_capacity", f"srv{s}", [n], 1.0)
            delay[n] = ctx.deadline[n]
            continue
        delay[n] = pre + c / fn
        alloc[n] = fn
        members[s].append(n)
        srv_f[s] += fn
        srv_e[s] += kappa * c * fn * fn

    for n in range(N):
        if _over(e_tv[n], cfg.e_max_tv_j):
            flag("tv_energy", f"tv{n}", [n], e_tv[n] - cfg.e_max_tv_j)
    for s in range(K + M):
        prof = ctx.rsus[s] if s < K else ctx.fvs[s - K]
        kind = "rsu" if s < K else "fv"
        name = f"{kind}{prof.id}"
        if _over(srv_e[s], prof.e_max_j):
            flag(f"{kind}_energy", name, members[s], srv_e[s] - prof.e_max_j)
        if _over(srv_f[s], prof.f_max_hz):
            flag(f"{kind}_capacity", name, members[s], srv_f[s] - prof.f_max_hz)

    # a violated budget means the allocation cannot be honoured: the task is dropped
    delay = np.where(failed, np.maximum(delay, ctx.deadline), delay)
    success = (~failed) & (delay <= ctx.deadline)
    for v in viol:
        log.debug("slot %d: %s violated at %s by %.3g (TVs %s)", ctx.slot, v.constraint, v.node, v.amount, v.tvs)
    return SlotOutcome(ctx.slot, list(plan.decisions), delay, success, e_tv, srv_e, srv_f, alloc,
                       ctx.input_bits.copy(), viol, dict(plan.extras))


def check_constraints(outcome):
    """Violation report of an evaluated slot: {constraint id: [Violation]}."""
    report = {c: [] for c in CONSTRAINTS}
    for v in outcome.violations:
        report[v.constraint].append(v)
    return report


def resolve_policy(policy):
    if callable(policy):
        return policy
    from .policies import get_policy
    return get_policy(policy)


def iter_slots(config, scenario=None):
    """Yield a ``SlotContext`` per slot; vehicles move after each yield."""
    streams = spawn_streams(config.rng_seed)
    if scenario is None:
        scenario = generate_scenario(config, streams["scenario"])
    n_tv = config.n_tvs
    fvs = scenario.fvs
    types, labels = classify_types(fvs, config.n_types, config.type_probs or None) if fvs else ([], None)
    q = np.array([v.position_m for v in scenario.vehicles], dtype=np.float64).reshape(-1, 2)
    v = np.array([v.velocity_mps for v in scenario.vehicles], dtype=np.float64).reshape(-1, 2)
    v_bar = np.array([v.mean_velocity_mps for v in scenario.vehicles], dtype=np.float64).reshape(-1, 2)
    sigma = (config.sigma_mps, config.sigma_y_mps)
    for t in range(config.horizon_slots):
        tv_pos, fv_pos = q[:n_tv], q[n_tv:]
        rate_rsu, rate_fv = draw_rates(config, scenario, tv_pos, fv_pos, streams["channel"])
        yield SlotContext(config, scenario, t, scenario.tasks[t], tv_pos.copy(), fv_pos.copy(),
                          rate_rsu, rate_fv, types, labels)
        q = advance_positions(q, v, config.slot_s, config.road_length_m)
        v = gauss_markov_velocity(v, v_bar, config.alpha, sigma, streams["mobility"])


def run(config, policy, on_slot=None, keep_outcomes=False):
    """Simulate ``config.horizon_slots`` slots under ``policy``.

    ``policy`` is a registered name or a callable ``SlotContext -> Plan``.
    ``on_slot(ctx, outcome)`` is called after every slot. Returns
    ``RunMetrics`` (and the outcome list if ``keep_outcomes``).
    """
    fn = resolve_policy(policy)
    outcomes = []
    for ctx in iter_slots(config):
        out = evaluate(ctx, fn(ctx))
        if on_slot is not None:
            on_slot(ctx, out)
        if not keep_outcomes:
            out.extras = {}
        outcomes.append(out)
    metrics = aggregate(outcomes, config.n_tvs, config.slot_s)
    if config.horizon_slots and config.n_tvs and metrics.completion_ratio == 0.0:
        log.warning("no task succeeded in %d slots", config.horizon_slots)
    return (metrics, outcomes) if keep_outcomes else metrics
