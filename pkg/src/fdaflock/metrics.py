"""Flocking quality metrics: alignment, spacing, centroid travel, connectivity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS_SPEED, FlockState
from .interaction import adjacency, pairwise_distances


@dataclass(frozen=True)
class MetricsSample:
    t: float
    gamma: float
    d_min: float
    d_mean: float
    d_max: float
    centroid: np.ndarray
    S_cum: float
    components: int
    isolated: int = 0


def _cosine_matrix(velocities) -> np.ndarray:
    v = np.asarray(velocities, dtype=float)
    speed = np.linalg.norm(v, axis=1)
    ok = speed >= EPS_SPEED
    unit = np.where(ok[:, None], v / np.where(ok, speed, 1.0)[:, None], 0.0)
    return np.clip(unit @ unit.T, -1.0, 1.0)


def alignment_gamma(velocities, neighbor_mask, isolated: str = "exclude") -> float:
    """Flock-averaged mean cosine similarity between each agent and its neighbors.

    ``neighbor_mask`` is an ``(n, n)`` boolean adjacency (or a list of
    NeighborSet). Agents without neighbors are left out of the outer mean by
    default; ``isolated="zero"`` counts them as 0 instead. Returns 0 if no
    agent has a neighbor.
    """
    v = np.asarray(velocities, dtype=float)
    n = v.shape[0]
    mask = _as_mask(neighbor_mask, n)
    k = mask.sum(axis=1)
    cos = _cosine_matrix(v)
    per_agent = np.where(k > 0, np.where(mask, cos, 0.0).sum(axis=1) / np.maximum(k, 1), 0.0)
    if isolated == "zero":
        return float(per_agent.mean()) if k.any() else 0.0
    if not k.any():
        return 0.0
    return float(per_agent[k > 0].mean())


def _as_mask(neighbor_mask, n: int) -> np.ndarray:
    if isinstance(neighbor_mask, np.ndarray) and neighbor_mask.dtype == bool:
        return neighbor_mask
    mask = np.zeros((n, n), dtype=bool)
    for ns in neighbor_mask:
        mask[ns.owner, list(ns.members)] = True
    return mask


def distance_stats(positions) -> tuple[float, float, float]:
    """Min, mean and max distance over all unordered pairs."""
    d = pairwise_distances(positions)
    iu = np.triu_indices(d.shape[0], k=1)
    pairs = d[iu]
    return float(pairs.min()), float(pairs.mean()), float(pairs.max())


def centroid_path_length(centroids) -> float:
    c = np.asarray(centroids, dtype=float)
    if len(c) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(c, axis=0), axis=1).sum())


def count_components(mask) -> int:
    """Connected components of an undirected graph given as a boolean matrix."""
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    seen = np.zeros(n, dtype=bool)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        seen[start] = True
        frontier = [start]
        while frontier:
            reach = mask[frontier].any(axis=0) & ~seen
            seen |= reach
            frontier = np.flatnonzero(reach).tolist()
    return count


def interaction_components(positions, r: float) -> int:
    p = np.asarray(positions, dtype=float)
    if len(p) <= 1:
        return 1
    return count_components(adjacency(p, r))


def sample_metrics(state: FlockState, r: float, S_cum: float, isolated: str = "exclude") -> MetricsSample:
    d = pairwise_distances(state.positions)
    mask = d <= r
    np.fill_diagonal(mask, False)
    pairs = d[np.triu_indices(state.n, k=1)]
    return MetricsSample(
        t=state.time,
        gamma=alignment_gamma(state.velocities, mask, isolated=isolated),
        d_min=float(pairs.min()),
        d_mean=float(pairs.mean()),
        d_max=float(pairs.max()),
        centroid=state.centroid,
        S_cum=S_cum,
        components=count_components(mask),
        isolated=int((mask.sum(axis=1) == 0).sum()),
    )


def _components_batch(mask) -> np.ndarray:
    """Component counts for a stack of ``(K, n, n)`` adjacency matrices."""
    K, n, _ = mask.shape
    labels = np.broadcast_to(np.arange(n), (K, n)).copy()
    big = n
    for _ in range(n):
        nb = np.where(mask, labels[:, None, :], big).min(axis=2)
        new = np.minimum(labels, nb)
        if np.array_equal(new, labels):
            break
        labels = new
    return (labels == np.arange(n)).sum(axis=1)


def metrics_series(times, positions, velocities, r: float, isolated: str = "exclude") -> dict:
    """Vectorized metrics over a stack of snapshots.

    ``positions`` and ``velocities`` have shape ``(K, n, m)``. Returns a dict
    of arrays keyed like the MetricsSample fields; ``S_cum`` is the running
    centroid path length along the given stack.
    """
    P = np.asarray(positions, dtype=float)
    V = np.asarray(velocities, dtype=float)
    K, n, _ = P.shape
    diff = P[:, None, :, :] - P[:, :, None, :]
    d = np.sqrt(np.einsum("kijm,kijm->kij", diff, diff))
    eye = np.eye(n, dtype=bool)
    mask = (d <= r) & ~eye
    iu = np.triu_indices(n, k=1)
    pairs = d[:, iu[0], iu[1]]

    speed = np.linalg.norm(V, axis=2)
    ok = speed >= EPS_SPEED
    unit = np.where(ok[..., None], V / np.where(ok, speed, 1.0)[..., None], 0.0)
    cos = np.clip(np.einsum("kim,kjm->kij", unit, unit), -1.0, 1.0)
    k = mask.sum(axis=2)
    per_agent = np.where(k > 0, np.where(mask, cos, 0.0).sum(axis=2) / np.maximum(k, 1), 0.0)
    has = k > 0
    n_has = has.sum(axis=1)
    if isolated == "zero":
        gamma = np.where(n_has > 0, per_agent.mean(axis=1), 0.0)
    else:
        gamma = np.where(n_has > 0, per_agent.sum(axis=1) / np.maximum(n_has, 1), 0.0)

    centroid = P.mean(axis=1)
    steps = np.linalg.norm(np.diff(centroid, axis=0), axis=1)
    S_cum = np.concatenate([[0.0], np.cumsum(steps)])
    return {
        "t": np.asarray(times, dtype=float),
        "gamma": gamma,
        "d_min": pairs.min(axis=1),
        "d_mean": pairs.mean(axis=1),
        "d_max": pairs.max(axis=1),
        "centroid": centroid,
        "S_cum": S_cum,
        "components": _components_batch(mask),
        "isolated": n - n_has,
    }
