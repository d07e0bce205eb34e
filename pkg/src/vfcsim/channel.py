"""Probabilistic-LoS V2I/V2V channel: path loss, Nakagami fading and rate.

Carrier frequency enters the log terms of the path-loss formulas in GHz
(3GPP TR 38.901 convention); distances are in meters. Gains are linear
power gains (attenuation, <= 1 for any realistic distance).
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 3e8
V2I_MIN_DIST_M = 10.0
V2I_MAX_DIST_M = 5000.0
V2V_MIN_DIST_M = 1.0


class LinkClass(enum.Enum):
    V2I_LOS = ("v2i", True)
    V2I_NLOS = ("v2i", False)
    V2V_LOS = ("v2v", True)
    V2V_NLOS = ("v2v", False)

    @property
    def is_v2i(self):
        return self.value[0] == "v2i"

    @property
    def is_los(self):
        return self.value[1]

    def nakagami_m(self, cfg):
        return {
            LinkClass.V2I_LOS: cfg.m_v2i_los,
            LinkClass.V2I_NLOS: cfg.m_v2i_nlos,
            LinkClass.V2V_LOS: cfg.m_v2v_los,
            LinkClass.V2V_NLOS: cfg.m_v2v_nlos,
        }[self]


@dataclass(frozen=True)
class ChannelDraw:
    los_prob: float
    large_scale_db: float      # LoS-branch loss
    small_scale: float         # LoS-branch amplitude
    gain: float


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def los_probability_v2i(horizontal_distance_m):
    d = np.asarray(horizontal_distance_m, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("distance must be >= 0")
    safe = np.maximum(d, 18.0)
    p = 18.0 / safe + np.exp(-safe / 36.0) * (1.0 - 18.0 / safe)
    p = np.where(d <= 18.0, 1.0, p)
    return _scalar_or_array(p, horizontal_distance_m)


def los_probability_v2v(distance_m):
    d = np.asarray(distance_m, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("distance must be >= 0")
    p = np.minimum(1.0, 1.05 * np.exp(-0.014 * d))
    return _scalar_or_array(p, distance_m)


def breakpoint_distance(rsu_height_m, vehicle_height_m, carrier_hz):
    return 4.0 * rsu_height_m * vehicle_height_m * carrier_hz / SPEED_OF_LIGHT


def _clamp(d, lo, hi, what):
    d = np.asarray(d, dtype=np.float64)
    out = np.clip(d, lo, hi)
    if np.any(out != d):
        log.debug("%s distance outside [%g, %g] m clamped", what, lo, hi)
    return out


def v2i_los_db(d_h, cfg, shadow_db=0.0):
    """V2I LoS loss. ``d_h`` horizontal distance; heights come from ``cfg``."""
    d_h = _clamp(d_h, V2I_MIN_DIST_M, V2I_MAX_DIST_M, "V2I")
    dh_ant = cfg.rsu_height_m - cfg.vehicle_height_m
    d3 = np.hypot(d_h, dh_ant)
    fc = cfg.carrier_hz / 1e9
    d_bp = breakpoint_distance(cfg.rsu_height_m, cfg.vehicle_height_m, cfg.carrier_hz)
    near = 32.4 + 21.0 * np.log10(d3) + 20.0 * math.log10(fc)
    far = (32.4 + 40.0 * np.log10(d3) + 20.0 * math.log10(fc)
           - 9.5 * math.log10(d_bp ** 2 + dh_ant ** 2))
    return np.where(d_h <= d_bp, near, far) + shadow_db


def v2i_nlos_db(d_h, cfg, shadow_db=0.0):
    los = v2i_los_db(d_h, cfg, shadow_db)
    d_h = _clamp(d_h, V2I_MIN_DIST_M, V2I_MAX_DIST_M, "V2I")
    d3 = np.hypot(d_h, cfg.rsu_height_m - cfg.vehicle_height_m)
    fc = cfg.carrier_hz / 1e9
    nlos = 35.3 * np.log10(d3) + 22.4 + 21.3 * math.log10(fc) - 0.3 * (cfg.vehicle_height_m - 1.5)
    return np.maximum(los, nlos)


def v2v_los_db(d, cfg):
    d = _clamp(d, V2V_MIN_DIST_M, np.inf, "V2V")
    return 38.77 + 16.7 * np.log10(d) + 18.2 * math.log10(cfg.carrier_hz / 1e9)


def v2v_nlos_db(d, cfg):
    d = _clamp(d, V2V_MIN_DIST_M, np.inf, "V2V")
    return 36.85 + 30.0 * np.log10(d) + 18.9 * math.log10(cfg.carrier_hz / 1e9)


def large_scale_db(link, distance_3d_m, horizontal_distance_m, cfg, shadow_db=0.0):
    """Path loss in dB for ``link``.

    V2I formulas are driven by the horizontal distance (the 3-D distance is
    rebuilt from the antenna heights after clamping to the valid range);
    V2V formulas use ``distance_3d_m`` which is planar for vehicle pairs.
    """
    if link is LinkClass.V2I_LOS:
        out = v2i_los_db(horizontal_distance_m, cfg, shadow_db)
    elif link is LinkClass.V2I_NLOS:
        out = v2i_nlos_db(horizontal_distance_m, cfg, shadow_db)
    elif link is LinkClass.V2V_LOS:
        out = v2v_los_db(distance_3d_m, cfg)
    else:
        out = v2v_nlos_db(distance_3d_m, cfg)
    return _scalar_or_array(out, horizontal_distance_m if link.is_v2i else distance_3d_m)


def sample_nakagami(m_param, mean_power, rng, size=None):
    """Nakagami-m amplitude; its square is Gamma(m, mean_power/m)."""
    if m_param < 0.5:
        raise ValueError("Nakagami m must be >= 0.5")
    if mean_power <= 0:
        raise ValueError("mean_power must be > 0")
    return np.sqrt(rng.gamma(m_param, mean_power / m_param, size=size))


def combine_gain(los_prob, amp_los, loss_los_db, amp_nlos, loss_nlos_db):
    """LoS-probability-weighted mixture of the two branch power gains."""
    g_los = amp_los ** 2 * 10.0 ** (-np.asarray(loss_los_db) / 10.0)
    g_nlos = amp_nlos ** 2 * 10.0 ** (-np.asarray(loss_nlos_db) / 10.0)
    return los_prob * g_los + (1.0 - los_prob) * g_nlos


def v2i_gains(d_h, cfg, rng):
    """Vectorised V2I gains for horizontal distances ``d_h`` (any shape)."""
    d_h = np.asarray(d_h, dtype=np.float64)
    shadow = rng.normal(0.0, cfg.shadow_db, size=d_h.shape)
    a_l = sample_nakagami(cfg.m_v2i_los, 1.0, rng, size=d_h.shape)
    a_n = sample_nakagami(cfg.m_v2i_nlos, 1.0, rng, size=d_h.shape)
    return combine_gain(los_probability_v2i(d_h), a_l, v2i_los_db(d_h, cfg, shadow),
                        a_n, v2i_nlos_db(d_h, cfg, shadow))


def v2v_gains(d, cfg, rng):
    d = np.asarray(d, dtype=np.float64)
    a_l = sample_nakagami(cfg.m_v2v_los, 1.0, rng, size=d.shape)
    a_n = sample_nakagami(cfg.m_v2v_nlos, 1.0, rng, size=d.shape)
    return combine_gain(los_probability_v2v(d), a_l, v2v_los_db(d, cfg), a_n, v2v_nlos_db(d, cfg))


def channel_gain(is_v2i, horizontal_distance_m, cfg, rng):
    """One gain draw for a single link; returns a ``ChannelDraw``."""
    d = float(horizontal_distance_m)
    if is_v2i:
        shadow = float(rng.normal(0.0, cfg.shadow_db))
        p = los_probability_v2i(d)
        l_db, n_db = float(v2i_los_db(d, cfg, shadow)), float(v2i_nlos_db(d, cfg, shadow))
        a_l = float(sample_nakagami(cfg.m_v2i_los, 1.0, rng))
        a_n = float(sample_nakagami(cfg.m_v2i_nlos, 1.0, rng))
    else:
        p = los_probability_v2v(d)
        l_db, n_db = float(v2v_los_db(d, cfg)), float(v2v_nlos_db(d, cfg))
        a_l = float(sample_nakagami(cfg.m_v2v_los, 1.0, rng))
        a_n = float(sample_nakagami(cfg.m_v2v_nlos, 1.0, rng))
    g = float(combine_gain(p, a_l, l_db, a_n, n_db))
    return ChannelDraw(los_prob=p, large_scale_db=l_db, small_scale=a_l, gain=g)


def transmission_rate(bandwidth_hz, tx_power_w, gain, noise_w):
    """Shannon rate B*log2(1 + p*h/N0) in bit/s."""
    if np.any(np.asarray(bandwidth_hz) <= 0) or noise_w <= 0:
        raise ValueError("bandwidth and noise must be > 0")
    if np.any(np.asarray(tx_power_w) < 0) or np.any(np.asarray(gain) < 0):
        raise ValueError("power and gain must be >= 0")
    r = bandwidth_hz * np.log2(1.0 + np.asarray(tx_power_w) * np.asarray(gain) / noise_w)
    return float(r) if np.ndim(r) == 0 else r
