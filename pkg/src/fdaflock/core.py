"""Shared domain types and the small amount of vector math the models need.

Vectors are plain ``numpy`` arrays of shape ``(m,)``; collections of agents
are stacked along the first axis, shape ``(n, m)``. The ambient dimension
``m`` is a runtime value so 2D and 3D runs share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Iterator

import numpy as np

#: Speed below which a velocity has no meaningful direction.
EPS_SPEED = 1e-9
#: Smallest admissible pairwise distance before the interaction weight blows up.
D_MIN = 1e-6

MODELS = ("reactive", "fda")


class FlockError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(FlockError, ValueError):
    """Invalid parameter or configuration value."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class DegeneracyError(FlockError):
    """Two agents (true or perceived) came closer than ``D_MIN``."""

    def __init__(self, message: str, pair=None, step=None):
        self.pair = pair
        self.step = step
        self.record = None  # partial RunRecord, attached by sim.run
        super().__init__(message)


def norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=float)))


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between ``a`` and ``b``.

    Returns 0 when either vector is shorter than ``EPS_SPEED``. The result is
    clipped to [-1, 1] to absorb rounding.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < EPS_SPEED or nb < EPS_SPEED:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class AgentState:
    position: np.ndarray
    velocity: np.ndarray
    control: np.ndarray


@dataclass(frozen=True)
class FlockParams:
    """Model constants shared by every agent.

    Defaults reproduce the paper scenario: ten agents in 3D, 25 s at
    0.02 s steps, 1 s prediction horizon, 0.4 s delay.
    """

    n: int = 10
    m: int = 3
    dt: float = 0.02
    T: float = 25.0
    r: float = 7.5
    delta: float = 1.0
    theta: float = 0.8
    t_ph: float = 1.0
    tau: float = 0.4
    v_max: float = 4.0
    u_max: float = 8.0
    model: str = "fda"

    def __post_init__(self):
        checks = [
            ("n", self.n >= 2, "must be >= 2"),
            ("m", self.m >= 1, "must be >= 1"),
            ("dt", self.dt > 0, "must be > 0"),
            ("T", self.T >= 0, "must be >= 0"),
            ("r", self.r > 0, "must be > 0"),
            ("delta", self.delta >= 0, "must be >= 0"),
            ("theta", 0.0 <= self.theta <= 1.0, f"{self.theta} outside [0, 1]"),
            ("t_ph", self.t_ph >= 0, "must be >= 0"),
            ("tau", self.tau >= 0, "must be >= 0"),
            ("v_max", self.v_max > 0, "must be > 0"),
            ("u_max", self.u_max > 0, "must be > 0"),
            ("model", self.model in MODELS, f"must be one of {MODELS}"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise ConfigError(name, msg)
        for name in ("n", "m"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ConfigError(name, "must be an integer")
        if not np.isclose(self.tau / self.dt, round(self.tau / self.dt), rtol=0, atol=1e-9):
            raise ConfigError("tau", f"{self.tau} is not an integer multiple of dt={self.dt}")
        if not np.isclose(self.T / self.dt, round(self.T / self.dt), rtol=0, atol=1e-9):
            raise ConfigError("T", f"{self.T} is not an integer multiple of dt={self.dt}")

    @property
    def lag_steps(self) -> int:
        return int(round(self.tau / self.dt))

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def replace(self, **changes) -> "FlockParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class FlockState:
    """Snapshot of the whole flock.

    ``controls`` holds the most recently applied (saturated) control of each
    agent, i.e. the input that produced this state; zero at initialization.
    """

    time: float
    positions: np.ndarray
    velocities: np.ndarray
    controls: np.ndarray
    step: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.controls = np.asarray(self.controls, dtype=float)
        shape = self.positions.shape
        if self.velocities.shape != shape or self.controls.shape != shape:
            raise ValueError("positions, velocities and controls must share shape (n, m)")
        for a in (self.positions, self.velocities, self.controls):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def m(self) -> int:
        return self.positions.shape[1]

    def agent(self, i: int) -> AgentState:
        return AgentState(self.positions[i], self.velocities[i], self.controls[i])

    @property
    def agents(self) -> list[AgentState]:
        return [self.agent(i) for i in range(self.n)]

    def __iter__(self) -> Iterator[AgentState]:
        return iter(self.agents)

    @property
    def centroid(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    @classmethod
    def from_agents(cls, agents, time: float = 0.0, step: int = 0) -> "FlockState":
        agents = list(agents)
        return cls(
            time=time,
            positions=np.array([a.position for a in agents], dtype=float),
            velocities=np.array([a.velocity for a in agents], dtype=float),
            controls=np.array([a.control for a in agents], dtype=float),
            step=step,
        )
