"""Policy registry: name -> callable(SlotContext) -> Plan."""
from __future__ import annotations

from . import baselines
from .jcratoa import jcratoa

POLICIES = {
    "jcratoa": jcratoa,
    "alo": baselines.alo,
    "nro": baselines.nro,
    "nfo": baselines.nfo,
    "nso": baselines.nso,
    "kmmto": baselines.kmmto,
    "broldra": baselines.broldra,
}


def get_policy(name):
    try:
        return POLICIES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {', '.join(POLICIES)}") from None
