"""Scenario configuration: SI-unit dataclass plus a TOML loader.

The file format uses conventional units (KB, MHz, GHz, dBm); values are
converted to bits, Hz, W and J when loaded. See ``configs/default.toml``
and the README for the full schema. Unknown sections or keys are rejected.
"""
from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

BITS_PER_KB = 8000.0
DEFAULT_CONFIG = Path(__file__).parent / "data" / "default.toml"   # same as configs/default.toml


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field, msg):
        super().__init__(f"{field}: {msg}")
        self.field = field


def dbm_to_w(dbm):
    return 10.0 ** (dbm / 10.0) / 1000.0


def w_to_dbm(w):
    return 10.0 * math.log10(w * 1000.0)


@dataclass(frozen=True)
class ScenarioConfig:
    # geometry and horizon
    road_length_m: float = 3000.0
    n_tvs: int = 20
    n_fvs: int = 12
    n_rsus: int = 3
    tv_range_m: float = 200.0
    slot_s: float = 1.0
    horizon_slots: int = 40
    rng_seed: int = 0
    # channel
    bandwidth_hz: tuple = (20e6, 40e6)
    tx_power_w: tuple = (0.1, 100.0)          # 20..50 dBm
    noise_w: float = dbm_to_w(-98.0)
    carrier_hz: float = 5.9e9
    shadow_db: float = 4.0
    rsu_height_m: float = 10.0
    vehicle_height_m: float = 1.5
    m_v2i_los: float = 3.0
    m_v2i_nlos: float = 1.0
    m_v2v_los: float = 2.0
    m_v2v_nlos: float = 1.0
    # mobility
    alpha: float = 0.9
    sigma_mps: float = 5.0
    sigma_y_mps: float = 0.05
    mean_speed_mps: float = 25.0
    # contract
    n_types: int = 3
    energy_cost: float = 1.0                  # e, per joule
    unit_price: float = 2.0                   # c, per GHz of FV resource
    willingness: tuple = (0.5, 1.0)           # sigma range
    type_probs: tuple = ()                    # lambda_l; empty -> uniform
    # tasks
    input_bits: tuple = (300 * BITS_PER_KB, 1000 * BITS_PER_KB)
    output_bits: tuple = (10 * BITS_PER_KB, 50 * BITS_PER_KB)
    cycles_per_bit: tuple = (100.0, 300.0)
    deadline_s: tuple = (0.5, 5.0)
    # nodes
    tv_cpu_hz: tuple = (0.5e9, 1.0e9)
    fv_cpu_hz: tuple = (1.0e9, 10.0e9)
    rsu_cpu_hz: float = 30e9
    fiber_bps: float = 1e9
    kappa_tv: float = 1e-28
    kappa_fv: float = 1e-28
    kappa_rsu: float = 1e-28
    e_max_tv_j: float = 5.0
    e_max_fv_j: float = 10.0
    e_max_rsu_j: float = 100.0
    fv_max_tvs: int = 1

    def __post_init__(self):
        validate(self)

    def with_overrides(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        return asdict(self)


_RANGES = ("bandwidth_hz", "tx_power_w", "willingness", "input_bits", "output_bits",
           "cycles_per_bit", "deadline_s", "tv_cpu_hz", "fv_cpu_hz")
_POSITIVE = ("road_length_m", "tv_range_m", "slot_s", "noise_w", "carrier_hz",
             "rsu_height_m", "vehicle_height_m", "rsu_cpu_hz", "fiber_bps",
             "kappa_tv", "kappa_fv", "kappa_rsu", "e_max_tv_j", "e_max_fv_j",
             "e_max_rsu_j", "mean_speed_mps", "energy_cost", "unit_price")
_COUNTS = ("n_tvs", "n_fvs", "horizon_slots")


def validate(cfg):
    for name in _POSITIVE:
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(name, f"must be a positive finite number, got {v!r}")
    for name in _COUNTS:
        v = getattr(cfg, name)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ConfigError(name, f"must be a non-negative integer, got {v!r}")
    if not isinstance(cfg.n_rsus, int) or cfg.n_rsus < 1:
        raise ConfigError("n_rsus", "must be an integer >= 1")
    if not isinstance(cfg.n_types, int) or cfg.n_types < 1:
        raise ConfigError("n_types", "must be an integer >= 1")
    if not isinstance(cfg.fv_max_tvs, int) or cfg.fv_max_tvs < 1:
        raise ConfigError("fv_max_tvs", "must be an integer >= 1")
    for name in _RANGES:
        r = getattr(cfg, name)
        if len(r) != 2 or not all(math.isfinite(x) for x in r) or r[0] > r[1]:
            raise ConfigError(name, f"must be a [low, high] pair with low <= high, got {r!r}")
        lo_ok = r[0] >= 0 if name == "output_bits" else r[0] > 0
        if not lo_ok:
            raise ConfigError(name, f"range must be strictly positive, got {r!r}")
    if not 0.0 <= cfg.alpha <= 1.0:
        raise ConfigError("alpha", f"must lie in [0, 1], got {cfg.alpha}")
    for name in ("sigma_mps", "sigma_y_mps", "shadow_db"):
        if getattr(cfg, name) < 0:
            raise ConfigError(name, "must be >= 0")
    for name in ("m_v2i_los", "m_v2i_nlos", "m_v2v_los", "m_v2v_nlos"):
        if getattr(cfg, name) < 0.5:
            raise ConfigError(name, "Nakagami m must be >= 0.5")
    if not isinstance(cfg.rng_seed, int) or cfg.rng_seed < 0:
        raise ConfigError("rng_seed", "must be a non-negative integer")
    if cfg.type_probs:
        p = cfg.type_probs
        if len(p) != cfg.n_types:
            raise ConfigError("type_probs", f"needs {cfg.n_types} entries, got {len(p)}")
        if any(x < 0 for x in p) or abs(sum(p) - 1.0) > 1e-9:
            raise ConfigError("type_probs", "must be non-negative and sum to 1")


# file section -> {file key: (field name, converter)}
_ident = lambda v: v
_pair = lambda scale: (lambda v: (float(v[0]) * scale, float(v[1]) * scale))
_pair_dbm = lambda v: (dbm_to_w(float(v[0])), dbm_to_w(float(v[1])))

SCHEMA = {
    "scenario": {
        "road_length_m": ("road_length_m", float),
        "n_tvs": ("n_tvs", _ident),
        "n_fvs": ("n_fvs", _ident),
        "n_rsus": ("n_rsus", _ident),
        "tv_range_m": ("tv_range_m", float),
        "slot_s": ("slot_s", float),
        "horizon_slots": ("horizon_slots", _ident),
        "seed": ("rng_seed", _ident),
    },
    "channel": {
        "bandwidth_mhz": ("bandwidth_hz", _pair(1e6)),
        "tx_power_dbm": ("tx_power_w", _pair_dbm),
        "noise_dbm": ("noise_w", lambda v: dbm_to_w(float(v))),
        "carrier_ghz": ("carrier_hz", lambda v: float(v) * 1e9),
        "shadow_db": ("shadow_db", float),
        "rsu_height_m": ("rsu_height_m", float),
        "vehicle_height_m": ("vehicle_height_m", float),
    },
    "channel.nakagami": {
        "v2i_los": ("m_v2i_los", float),
        "v2i_nlos": ("m_v2i_nlos", float),
        "v2v_los": ("m_v2v_los", float),
        "v2v_nlos": ("m_v2v_nlos", float),
    },
    "mobility": {
        "alpha": ("alpha", float),
        "sigma_mps": ("sigma_mps", float),
        "sigma_y_mps": ("sigma_y_mps", float),
        "mean_speed_mps": ("mean_speed_mps", float),
    },
    "contract": {
        "n_types": ("n_types", _ident),
        "energy_cost": ("energy_cost", float),
        "unit_price": ("unit_price", float),
        "willingness": ("willingness", _pair(1.0)),
        "type_probs": ("type_probs", lambda v: tuple(float(x) for x in v)),
    },
    "tasks": {
        "input_kb": ("input_bits", _pair(BITS_PER_KB)),
        "output_kb": ("output_bits", _pair(BITS_PER_KB)),
        "cycles_per_bit": ("cycles_per_bit", _pair(1.0)),
        "deadline_s": ("deadline_s", _pair(1.0)),
    },
    "nodes": {
        "tv_cpu_ghz": ("tv_cpu_hz", _pair(1e9)),
        "fv_cpu_ghz": ("fv_cpu_hz", _pair(1e9)),
        "rsu_cpu_ghz": ("rsu_cpu_hz", lambda v: float(v) * 1e9),
        "fiber_gbps": ("fiber_bps", lambda v: float(v) * 1e9),
        "kappa_tv": ("kappa_tv", float),
        "kappa_fv": ("kappa_fv", float),
        "kappa_rsu": ("kappa_rsu", float),
        "e_max_tv_j": ("e_max_tv_j", float),
        "e_max_fv_j": ("e_max_fv_j", float),
        "e_max_rsu_j": ("e_max_rsu_j", float),
        "fv_max_tvs": ("fv_max_tvs", _ident),
    },
}

FIELD_NAMES = {f.name for f in fields(ScenarioConfig)}


def _flatten(doc, prefix=""):
    """Yield (section, key, value) for every leaf, nested tables joined by '.'."""
    for k, v in doc.items():
        if isinstance(v, dict):
            section = f"{prefix}.{k}" if prefix else k
            if section not in SCHEMA:
                raise ConfigError(section, "unknown section")
            yield from _flatten(v, section)
        else:
            if not prefix:
                raise ConfigError(k, "top-level keys must live inside a section")
            yield prefix, k, v


def config_from_mapping(doc):
    kw = {}
    for section, key, value in _flatten(doc):
        spec = SCHEMA[section].get(key)
        if spec is None:
            raise ConfigError(f"{section}.{key}", "unknown key")
        name, conv = spec
        try:
            kw[name] = conv(value)
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"{section}.{key}", f"cannot convert {value!r}: {exc}") from None
    return ScenarioConfig(**kw)


def load_config(path):
    """Read a TOML scenario file. Raises FileNotFoundError or ConfigError."""
    text = Path(path).read_bytes()
    try:
        doc = tomllib.loads(text.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"not valid TOML: {exc}") from None
    return config_from_mapping(doc)
