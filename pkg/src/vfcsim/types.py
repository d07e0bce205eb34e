"""Domain types shared across the simulator."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np


class Role(str, enum.Enum):
    TV = "tv"
    FV = "fv"


class ServerKind(str, enum.Enum):
    RSU = "rsu"
    FV = "fv"


class Dest(str, enum.Enum):
    LOCAL = "local"
    RSU = "rsu"
    FV = "fv"
    NONE = "none"   # task not executed this slot


@dataclass(frozen=True)
class Task:
    """One slot's computation job for a task vehicle (SI units)."""
    input_bits: float
    output_bits: float
    cycles: float
    deadline_s: float

    def __post_init__(self):
        if not self.input_bits > 0:
            raise ValueError("input_bits must be > 0")
        if not self.cycles > 0:
            raise ValueError("cycles must be > 0")
        if not self.deadline_s > 0:
            raise ValueError("deadline_s must be > 0")
        if self.output_bits < 0:
            raise ValueError("output_bits must be >= 0")


@dataclass(frozen=True)
class VehicleState:
    id: int
    position_m: tuple[float, float]
    velocity_mps: tuple[float, float]
    mean_velocity_mps: tuple[float, float]
    role: Role


@dataclass(frozen=True)
class TvProfile:
    """Radio and CPU attributes of a task vehicle, fixed for a run."""
    id: int
    f_hz: float
    bandwidth_hz: float
    tx_power_w: float


@dataclass(frozen=True)
class ServerProfile:
    id: int
    kind: ServerKind
    position_m: tuple[float, float]
    f_max_hz: float
    e_max_j: float
    kappa: float
    hops_to: Optional[tuple[int, ...]] = None   # RSU only
    theta: Optional[float] = None               # FV only
    willingness: Optional[float] = None         # FV only

    def __post_init__(self):
        if not (self.f_max_hz > 0 and self.e_max_j > 0 and self.kappa > 0):
            raise ValueError(f"server {self.id}: f_max_hz, e_max_j and kappa must be > 0")


@dataclass(frozen=True)
class OffloadDecision:
    """Exactly one destination for a TV in one slot."""
    tv_id: int
    dest: Dest
    server: Optional[int] = None   # RSU index or FV index, per ``dest``

    def __post_init__(self):
        needs_server = self.dest in (Dest.RSU, Dest.FV)
        if needs_server != (self.server is not None):
            raise ValueError(f"decision for TV {self.tv_id}: server index inconsistent with {self.dest}")

    @classmethod
    def local(cls, tv_id):
        return cls(tv_id, Dest.LOCAL)

    @classmethod
    def rsu(cls, tv_id, k):
        return cls(tv_id, Dest.RSU, int(k))

    @classmethod
    def fv(cls, tv_id, m):
        return cls(tv_id, Dest.FV, int(m))

    def one_hot(self, n_rsus, n_fvs):
        """Indicator vector over [local, rsu_0.., fv_0..]."""
        v = np.zeros(1 + n_rsus + n_fvs, dtype=np.int8)
        if self.dest is Dest.LOCAL:
            v[0] = 1
        elif self.dest is Dest.RSU:
            v[1 + self.server] = 1
        elif self.dest is Dest.FV:
            v[1 + n_rsus + self.server] = 1
        return v


@dataclass
class Scenario:
    """Output of scenario generation: initial vehicles, servers and tasks."""
    vehicles: list
    tvs: list
    servers: list
    tasks: list                       # tasks[t][n] -> Task

    @property
    def rsus(self):
        return [s for s in self.servers if s.kind is ServerKind.RSU]

    @property
    def fvs(self):
        return [s for s in self.servers if s.kind is ServerKind.FV]
