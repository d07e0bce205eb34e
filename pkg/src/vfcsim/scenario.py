"""Scenario generation: road layout, node profiles and the task stream.

Randomness contract: one ``SeedSequence`` built from ``config.rng_seed``
spawns three independent streams (scenario, mobility, channel). Every
policy run on the same config therefore sees the same vehicles, tasks,
trajectories and fading draws.
"""
from __future__ import annotations

import numpy as np

from .config import dbm_to_w, w_to_dbm
from .types import Role, Scenario, ServerKind, ServerProfile, Task, TvProfile, VehicleState

STREAMS = ("scenario", "mobility", "channel")


def spawn_streams(seed):
    """Independent generators keyed by stream name."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(c) for name, c in zip(STREAMS, children)}


def rsu_positions(road_length_m, n_rsus):
    """Centers of ``n_rsus`` equal road segments."""
    seg = road_length_m / n_rsus
    return (np.arange(n_rsus) + 0.5) * seg


def coverage_radius(road_length_m, n_rsus):
    return road_length_m / (2.0 * n_rsus)


def covering_rsu(x, road_length_m, n_rsus):
    """Index of the RSU whose segment contains ``x`` (the nearest one)."""
    k = np.floor(np.asarray(x, dtype=np.float64) / (road_length_m / n_rsus)).astype(np.int64)
    return np.clip(k, 0, n_rsus - 1)


def _uniform(rng, bounds, size=None):
    return rng.uniform(bounds[0], bounds[1], size=size)


def generate_tasks(config, rng, n_slots=None, n_tvs=None):
    """tasks[t][n] for every slot and TV, drawn from the configured ranges."""
    T = config.horizon_slots if n_slots is None else n_slots
    N = config.n_tvs if n_tvs is None else n_tvs
    if T == 0 or N == 0:
        return [[] for _ in range(T)]
    shape = (T, N)
    d_in = _uniform(rng, config.input_bits, shape)
    d_out = _uniform(rng, config.output_bits, shape)
    cpb = _uniform(rng, config.cycles_per_bit, shape)
    ddl = _uniform(rng, config.deadline_s, shape)
    cycles = d_in * cpb
    return [[Task(float(d_in[t, n]), float(d_out[t, n]), float(cycles[t, n]), float(ddl[t, n]))
             for n in range(N)] for t in range(T)]


def generate_scenario(config, rng=None):
    """Initial vehicles, TV profiles, servers (RSUs then FVs) and tasks.

    Vehicles start uniformly on the road at y=0, moving at the mean speed.
    Transmit power is drawn uniformly in dBm. FV type theta = sigma * f_max
    with f_max in GHz.
    """
    if rng is None:
        rng = spawn_streams(config.rng_seed)["scenario"]
    L, K = config.road_length_m, config.n_rsus
    n_tv, n_fv = config.n_tvs, config.n_fvs
    v_bar = (config.mean_speed_mps, 0.0)

    xs = rng.uniform(0.0, L, size=n_tv + n_fv)
    vehicles = []
    for i, x in enumerate(xs):
        role = Role.TV if i < n_tv else Role.FV
        vehicles.append(VehicleState(i, (float(x), 0.0), v_bar, v_bar, role))

    f_tv = _uniform(rng, config.tv_cpu_hz, n_tv)
    bw = _uniform(rng, config.bandwidth_hz, n_tv)
    p_dbm = _uniform(rng, (w_to_dbm(config.tx_power_w[0]), w_to_dbm(config.tx_power_w[1])), n_tv)
    tvs = [TvProfile(n, float(f_tv[n]), float(bw[n]), float(dbm_to_w(p_dbm[n]))) for n in range(n_tv)]

    servers = []
    for k, x in enumerate(rsu_positions(L, K)):
        hops = tuple(abs(k - j) for j in range(K))
        servers.append(ServerProfile(k, ServerKind.RSU, (float(x), 0.0), config.rsu_cpu_hz,
                                     config.e_max_rsu_j, config.kappa_rsu, hops_to=hops))
    f_fv = _uniform(rng, config.fv_cpu_hz, n_fv)
    sigma = _uniform(rng, config.willingness, n_fv)
    for m in range(n_fv):
        v = vehicles[n_tv + m]
        servers.append(ServerProfile(m, ServerKind.FV, v.position_m, float(f_fv[m]), config.e_max_fv_j,
                                     config.kappa_fv, theta=float(sigma[m] * f_fv[m] / 1e9),
                                     willingness=float(sigma[m])))

    tasks = generate_tasks(config, rng)
    return Scenario(vehicles=vehicles, tvs=tvs, servers=servers, tasks=tasks)
