"""Metric neighborhoods and the cohesion-separation / alignment weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import D_MIN, DegeneracyError


@dataclass(frozen=True)
class NeighborSet:
    owner: int
    members: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, j) -> bool:
        return j in self.members


def pairwise_distances(positions) -> np.ndarray:
    p = np.asarray(positions, dtype=float)
    diff = p[None, :, :] - p[:, None, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def adjacency(positions, r: float) -> np.ndarray:
    """Boolean ``(n, n)`` matrix, True where ``0 < i != j`` and ``|p_j - p_i| <= r``."""
    d = pairwise_distances(positions)
    a = d <= r
    np.fill_diagonal(a, False)
    return a


def neighbors(positions, i: int, r: float) -> NeighborSet:
    """Indices ``j != i`` inside the closed ball of radius ``r`` around agent ``i``."""
    p = np.asarray(positions, dtype=float)
    d = np.linalg.norm(p - p[i], axis=1)
    members = tuple(int(j) for j in np.flatnonzero(d <= r) if j != i)
    return NeighborSet(i, members)


def neighbor_sets(positions, r: float) -> list[NeighborSet]:
    a = adjacency(positions, r)
    return [NeighborSet(i, tuple(int(j) for j in np.flatnonzero(row))) for i, row in enumerate(a)]


def psi(d, delta: float, k):
    """Cohesion-separation weight ``1 - delta * k / d``.

    Negative (repulsive) below the equilibrium spacing ``delta * k``, zero
    at it, and tending to 1 at long range. Works elementwise on arrays.
    Raises DegeneracyError if any distance is at or below ``D_MIN``.
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= D_MIN):
        raise DegeneracyError(f"pairwise distance {float(np.min(d_arr)):.3g} m at or below floor {D_MIN} m")
    out = 1.0 - delta * np.asarray(k, dtype=float) / d_arr
    return float(out) if np.ndim(out) == 0 else out


def phi(k):
    """Alignment weight ``1 / k`` for a neighborhood of size ``k``."""
    if np.ndim(k) == 0:
        if k < 1:
            raise ValueError("alignment weight undefined for an empty neighborhood")
        return 1.0 / k
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("alignment weight undefined for an empty neighborhood")
    return 1.0 / k
