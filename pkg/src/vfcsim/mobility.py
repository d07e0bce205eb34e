"""Gauss-Markov velocity and position updates."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


def gauss_markov_velocity(v, v_mean, alpha, sigma, rng):
    """Vectorised Gauss-Markov update.

    ``v`` and ``v_mean`` are (..., 2) arrays; ``sigma`` is a scalar or a
    per-axis pair. Noise is drawn independently per axis.
    """
    _check_alpha(alpha)
    v = np.asarray(v, dtype=np.float64)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (2,))
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    w = rng.standard_normal(v.shape) * sigma
    return alpha * v + (1.0 - alpha) * np.asarray(v_mean) + math.sqrt(1.0 - alpha * alpha) * w


def advance_positions(q, v, slot_s, road_length_m=None):
    """q' = q + v*tau, with x wrapped onto [0, road_length) when given."""
    if slot_s <= 0:
        raise ValueError("slot_s must be > 0")
    q = np.asarray(q, dtype=np.float64) + np.asarray(v, dtype=np.float64) * slot_s
    if road_length_m is not None:
        q[..., 0] = np.mod(q[..., 0], road_length_m)
    return q


def step_velocity(state, alpha, sigma, rng):
    """Next velocity of one ``VehicleState`` as a tuple."""
    v = gauss_markov_velocity(np.array(state.velocity_mps), np.array(state.mean_velocity_mps),
                              alpha, sigma, rng)
    return (float(v[0]), float(v[1]))


def step_position(state, slot_s, road_length_m=None):
    q = advance_positions(np.array(state.position_m), np.array(state.velocity_mps), slot_s, road_length_m)
    return (float(q[0]), float(q[1]))


def step_state(state, alpha, sigma, slot_s, rng, road_length_m=None):
    """Move with the current velocity, then draw the next velocity."""
    pos = step_position(state, slot_s, road_length_m)
    vel = step_velocity(state, alpha, sigma, rng)
    return replace(state, position_m=pos, velocity_mps=vel)
