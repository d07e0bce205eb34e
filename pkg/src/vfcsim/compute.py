"""Delay and energy accounting for local, RSU and FV execution.

Result download is not modelled: the feedback delay is identically zero.
"""
from __future__ import annotations

from dataclasses import dataclass

from .types import Dest


class UnreachableLink(ValueError):
    """Offloading over a link with zero rate."""


@dataclass(frozen=True)
class DelayBreakdown:
    upload_s: float = 0.0
    relay_s: float = 0.0
    compute_s: float = 0.0

    @property
    def total_s(self):
        return self.upload_s + self.relay_s + self.compute_s

    @property
    def feedback_s(self):
        return 0.0


@dataclass(frozen=True)
class EnergyBreakdown:
    tv_j: float = 0.0
    server_j: float = 0.0


def local_delay(task, f_tv_hz):
    if f_tv_hz <= 0:
        raise ValueError("f_tv_hz must be > 0")
    return task.cycles / f_tv_hz


def rsu_offload_delay(task, rate_to_nearest_bps, hops, fiber_rate_bps, f_alloc_hz):
    """Upload to the covering RSU, relay ``hops`` fiber hops, then compute.

    The relay term moves the input data over fiber (bits / bit rate).
    """
    if rate_to_nearest_bps <= 0:
        raise UnreachableLink("zero uplink rate to the covering RSU")
    if f_alloc_hz <= 0:
        raise ValueError("f_alloc_hz must be > 0")
    if hops < 0:
        raise ValueError("hops must be >= 0")
    return DelayBreakdown(
        upload_s=task.input_bits / rate_to_nearest_bps,
        relay_s=hops * task.input_bits / fiber_rate_bps if hops else 0.0,
        compute_s=task.cycles / f_alloc_hz,
    )


def fv_offload_delay(task, rate_bps, f_alloc_hz):
    if rate_bps <= 0:
        raise UnreachableLink("zero V2V rate")
    if f_alloc_hz <= 0:
        raise ValueError("f_alloc_hz must be > 0")
    return DelayBreakdown(upload_s=task.input_bits / rate_bps, compute_s=task.cycles / f_alloc_hz)


def total_delay(decision, local_s=None, rsu=None, fv=None):
    """Pick the branch matching ``decision``; branches are seconds or DelayBreakdowns."""
    branch = {Dest.LOCAL: local_s, Dest.RSU: rsu, Dest.FV: fv}.get(decision.dest)
    if decision.dest is Dest.NONE:
        return 0.0
    if branch is None:
        raise ValueError(f"no delay supplied for destination {decision.dest}")
    return branch.total_s if isinstance(branch, DelayBreakdown) else float(branch)


def computation_energy(kappa, cycles, f_hz):
    return kappa * cycles * f_hz * f_hz


def tv_energy(decision, task, f_tv_hz, kappa_tv, tx_power_w, rate_bps):
    """Local: computation energy. Offload: transmit power times upload time."""
    if decision.dest is Dest.LOCAL:
        return computation_energy(kappa_tv, task.cycles, f_tv_hz)
    if decision.dest is Dest.NONE:
        return 0.0
    if rate_bps <= 0:
        raise UnreachableLink("zero uplink rate")
    return tx_power_w * task.input_bits / rate_bps


def server_energy(task, f_alloc_hz, kappa_s):
    if f_alloc_hz <= 0:
        raise ValueError("f_alloc_hz must be > 0")
    return computation_energy(kappa_s, task.cycles, f_alloc_hz)
