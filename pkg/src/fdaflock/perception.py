"""What each agent sees of its neighbors: exact, or delayed and noisy.

Delay is served from a fixed-lag :class:`HistoryBuffer` of past snapshots.
Noise is drawn from a :class:`NoiseStream`, a counter-based generator keyed
by ``(seed, step)`` that yields one block of standard normals per step,
indexed ``[observer, neighbor, channel, axis]``. Any single draw therefore
depends only on its key, never on evaluation order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, fields

import numpy as np

from .core import ConfigError, FlockState
from .interaction import NeighborSet

CHANNELS = ("p", "v", "u")
_NOISE_DOMAIN = 0x6E6F697365  # separates noise streams from init streams


@dataclass(frozen=True)
class PerceivedNeighbor:
    index: int
    p: np.ndarray
    v: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class NoiseSchedule:
    """Sinusoidal noise intensities ``base + amp * sin(omega * t + phase)``.

    The defaults are the paper's delay-and-noise scenario.
    """

    base_p: float = 0.5
    amp_p: float = 0.10
    phase_p: float = 0.0
    base_v: float = 0.2
    amp_v: float = 0.05
    phase_v: float = np.pi / 4
    base_u: float = 0.1
    amp_u: float = 0.02
    phase_u: float = np.pi / 2
    omega: float = 5.0

    def validate(self, T: float) -> None:
        """Require every sigma to stay positive on ``[0, T]``.

        An all-zero channel (base and amplitude both 0) is accepted; it
        switches that channel's noise off.
        """
        for ch in CHANNELS:
            base, amp = getattr(self, f"base_{ch}"), getattr(self, f"amp_{ch}")
            if base == 0 and amp == 0:
                continue
            if amp < 0 or base < 0:
                raise ConfigError(f"amp_{ch}" if amp < 0 else f"base_{ch}", "must be >= 0")
            # worst case over [0, T]: a full period fits, or sample densely
            if self.omega * T >= 2 * np.pi:
                low = base - amp
            else:
                t = np.linspace(0.0, T, 2001)
                low = float(np.min(sigma_channel(base, amp, self.omega, getattr(self, f"phase_{ch}"), t)))
            if low <= 0:
                raise ConfigError(f"base_{ch}", f"sigma_{ch}(t) reaches {low:.3g} <= 0 on [0, {T}]")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def zero(cls) -> "NoiseSchedule":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def sigma_channel(base, amp, omega, phase, t):
    return base + amp * np.sin(omega * np.asarray(t, dtype=float) + phase)


def sigma_at(schedule: NoiseSchedule, t: float) -> tuple[float, float, float]:
    """Noise standard deviations ``(sigma_p, sigma_v, sigma_u)`` at time ``t``."""
    s = schedule
    return tuple(
        float(sigma_channel(getattr(s, f"base_{ch}"), getattr(s, f"amp_{ch}"), s.omega,
                            getattr(s, f"phase_{ch}"), t))
        for ch in CHANNELS
    )


class HistoryBuffer:
    """Ring of the most recent ``lag + 1`` snapshots, oldest first."""

    def __init__(self, lag_steps: int, initial: FlockState | None = None):
        if lag_steps < 0:
            raise ValueError("lag_steps must be >= 0")
        self.lag_steps = int(lag_steps)
        self._ring: deque[FlockState] = deque(maxlen=self.lag_steps + 1)
        if initial is not None:
            self.push(initial)

    @property
    def capacity(self) -> int:
        return self._ring.maxlen

    def push(self, state: FlockState) -> None:
        if self._ring and state.step != self._ring[-1].step + 1:
            raise ValueError(f"non-consecutive snapshot: step {state.step} after {self._ring[-1].step}")
        self._ring.append(state)

    @property
    def newest(self) -> FlockState:
        return self._ring[-1]

    @property
    def oldest(self) -> FlockState:
        return self._ring[0]

    def __len__(self) -> int:
        return len(self._ring)

    def __getitem__(self, k: int) -> FlockState:
        return self._ring[k]


def delayed_state(buffer: HistoryBuffer, lag_steps: int) -> FlockState:
    """Snapshot ``lag_steps`` behind the newest; the oldest one while warming up."""
    if len(buffer) == 0:
        raise ValueError("empty history buffer")
    return buffer[max(0, len(buffer) - 1 - lag_steps)]


class NoiseStream:
    """Deterministic per-run source of perception noise.

    ``block(step, n, m)`` returns standard normals of shape ``(n, n, 3, m)``.
    The Philox key is derived once from the seed; the step number sits in the
    second counter word, so each step owns a disjoint 2**64-long slice of the
    counter space. The last block is cached since every observer in a step
    reads the same one.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        ss = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, _NOISE_DOMAIN])
        self._key = ss.generate_state(2, dtype=np.uint64)
        self._cache_key = None
        self._cache = None

    def block(self, step: int, n: int, m: int) -> np.ndarray:
        key = (step, n, m)
        if key != self._cache_key:
            bitgen = np.random.Philox(key=self._key, counter=[0, int(step), 0, 0])
            self._cache = np.random.Generator(bitgen).standard_normal((n, n, len(CHANNELS), m))
            self._cache_key = key
        return self._cache


def perceived_arrays(buffer: HistoryBuffer, t: float, schedule: NoiseSchedule | None,
                     stream: NoiseStream | None, step: int):
    """Views of every agent by every other agent as ``(n, n, m)`` arrays.

    Row ``i`` holds what observer ``i`` perceives of each column ``j``. With
    ``schedule=None`` (nominal) this is the newest true state broadcast to
    every observer; otherwise the delayed snapshot plus pairwise noise at
    the sigma values of time ``t``.
    """
    if schedule is None:
        src = buffer.newest
        n = src.n
        return tuple(np.broadcast_to(a, (n,) + a.shape) for a in (src.positions, src.velocities, src.controls))
    src = delayed_state(buffer, buffer.lag_steps)
    n, m = src.n, src.m
    sig = sigma_at(schedule, t)
    z = stream.block(step, n, m)
    out = []
    for c, (base, s) in enumerate(zip((src.positions, src.velocities, src.controls), sig)):
        out.append(base[None, :, :] + s * z[:, :, c, :])
    return tuple(out)


def perceive(buffer: HistoryBuffer, i: int, neighbors: NeighborSet, t: float,
             schedule: NoiseSchedule | None, stream: NoiseStream | None, step: int | None = None):
    """Agent ``i``'s views of its neighbors at time ``t``.

    ``schedule=None`` selects nominal perception: exact current states, no
    delay. ``step`` keys the noise draw and defaults to the newest
    snapshot's step.
    """
    step = buffer.newest.step if step is None else step
    p, v, u = perceived_arrays(buffer, t, schedule, stream, step)
    return [PerceivedNeighbor(j, p[i, j].copy(), v[i, j].copy(), u[i, j].copy()) for j in neighbors]
