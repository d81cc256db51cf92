"""Smooth saturation, neighbor velocity prediction and the two control laws.

Both laws share one batched kernel, :func:`compute_controls`, which works on
stacked neighbor views of shape ``(n_obs, n, m)`` with a boolean mask marking
which columns are actual neighbors. The per-agent functions
:func:`reactive_control` and :func:`fda_control` are thin wrappers around it,
so the simulator and the per-agent API evaluate identical arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import D_MIN, DegeneracyError, FlockParams, FlockState

# Relative head-room kept below x_max so that the rounded output norm never
# reaches the bound, even where tanh(...) rounds to exactly 1.0.
_SAT_HEADROOM = 1.0 - 1e-14


@dataclass(frozen=True)
class ControlCommand:
    raw: np.ndarray
    applied: np.ndarray


def saturate(x_cmd, x_max: float) -> np.ndarray:
    """Scale ``x_cmd`` to magnitude ``x_max * tanh(|x_cmd| / x_max)``.

    Direction is preserved and the zero vector maps to zero. Operates on the
    last axis, so stacks of vectors are saturated row by row.
    """
    x = np.asarray(x_cmd, dtype=float)
    mag = np.sqrt(np.einsum("...i,...i->...", x, x))[..., None]
    target = np.minimum(x_max * np.tanh(mag / x_max), x_max * _SAT_HEADROOM)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(mag > 0, target / mag, 0.0)
    return x * scale


def predict_velocity(v_j, u_j, t_ph: float, v_max: float) -> np.ndarray:
    """Short-horizon extrapolation ``v_j + t_ph * u_j``, saturated to ``v_max``."""
    return saturate(np.asarray(v_j, dtype=float) + t_ph * np.asarray(u_j, dtype=float), v_max)


def compute_controls(p_self, v_self, p_view, v_view, u_view, mask, params: FlockParams,
                     model: str | None = None, observers=None):
    """Raw and saturated commands for a batch of observers.

    Parameters
    ----------
    p_self, v_self : (n_obs, m) true own position and velocity.
    p_view, v_view, u_view : (n_obs, n, m) perceived neighbor states.
    mask : (n_obs, n) bool, True where column j is a neighbor of the observer.
    model : "reactive" or "fda"; defaults to ``params.model``.
    observers : agent index of each row, used only in error messages.

    Returns
    -------
    raw, applied : (n_obs, m) arrays.
    """
    model = params.model if model is None else model
    p_self = np.asarray(p_self, dtype=float)
    v_self = np.asarray(v_self, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    m3 = mask[..., None]
    k = mask.sum(axis=1)

    diff = p_view - p_self[:, None, :]
    dist = np.sqrt(np.einsum("...i,...i->...", diff, diff))
    bad = mask & (dist <= D_MIN)
    if bad.any():
        row, j = (int(x) for x in np.argwhere(bad)[0])
        i = row if observers is None else int(observers[row])
        raise DegeneracyError(
            f"agents {i} and {j} at perceived distance {dist[row, j]:.3g} m (floor {D_MIN} m)",
            pair=(i, j),
        )
    kk = np.maximum(k, 1)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(mask, 1.0 - params.delta * kk / dist, 0.0)
    cohesion = np.where(m3, weight[..., None] * diff, 0.0).sum(axis=1)

    phi = (1.0 / kk)
    sum_v = np.where(m3, v_view - v_self[:, None, :], 0.0).sum(axis=1)
    if model == "reactive":
        align = phi * sum_v
    elif model == "fda":
        theta = params.theta
        v_pred = predict_velocity(v_view, u_view, params.t_ph, params.v_max)
        sum_pred = np.where(m3, v_pred - v_self[:, None, :], 0.0).sum(axis=1)
        align = (1 - theta) * phi * sum_v + theta * phi * sum_pred
    else:
        raise ValueError(f"unknown model {model!r}")

    raw = np.where((k > 0)[:, None], cohesion + align, 0.0)
    return raw, saturate(raw, params.u_max)


def _single(i: int, states: FlockState, neighbor_views: Sequence, params: FlockParams, model: str):
    n, m = states.n, states.m
    p_view = np.zeros((1, n, m))
    v_view = np.zeros((1, n, m))
    u_view = np.zeros((1, n, m))
    mask = np.zeros((1, n), dtype=bool)
    for view in neighbor_views:
        j = view.index
        p_view[0, j], v_view[0, j], u_view[0, j] = view.p, view.v, view.u
        mask[0, j] = True
    raw, applied = compute_controls(
        states.positions[i:i + 1], states.velocities[i:i + 1], p_view, v_view, u_view,
        mask, params, model=model, observers=[i],
    )
    return ControlCommand(raw[0], applied[0])


def reactive_control(i: int, states: FlockState, neighbor_views, params: FlockParams) -> ControlCommand:
    """Reactive law: cohesion-separation plus alignment with current neighbor velocities."""
    return _single(i, states, neighbor_views, params, "reactive")


def fda_control(i: int, states: FlockState, neighbor_views, params: FlockParams) -> ControlCommand:
    """Blended law: alignment split between current and predicted neighbor velocities.

    ``params.theta`` weights the predicted part; the cohesion-separation term
    is not blended.
    """
    return _single(i, states, neighbor_views, params, "fda")
