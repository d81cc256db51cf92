"""Initialization, the fixed-step integrator and the scenario runner."""

from __future__ import annotations

import dataclasses
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .controller import compute_controls, saturate
from .core import D_MIN, ConfigError, DegeneracyError, FlockParams, FlockState
from .interaction import adjacency, pairwise_distances
from .metrics import MetricsSample, metrics_series
from .perception import HistoryBuffer, NoiseSchedule, NoiseStream, perceived_arrays

_INIT_DOMAIN = 0x696E6974
MAX_INIT_ATTEMPTS = 1000


@dataclass(frozen=True)
class InitSpec:
    pos_low: float = 0.0
    pos_high: float = 10.0
    vel_std: float = 1.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything that determines a run.

    ``mode="nominal"`` means exact, undelayed perception; ``"perturbed"``
    delays perception by ``params.tau`` and adds noise from ``schedule``.
    """

    params: FlockParams = field(default_factory=FlockParams)
    mode: str = "nominal"
    schedule: NoiseSchedule = field(default_factory=NoiseSchedule)
    init: InitSpec = field(default_factory=InitSpec)
    seed: int = 0
    record_every: int = 1
    isolated: str = "exclude"

    def __post_init__(self):
        if self.mode not in ("nominal", "perturbed"):
            raise ConfigError("mode", "must be 'nominal' or 'perturbed'")
        if not self.init.pos_low < self.init.pos_high:
            raise ConfigError("pos_high", "must exceed pos_low")
        if self.init.vel_std < 0:
            raise ConfigError("vel_std", "must be >= 0")
        if self.record_every < 1:
            raise ConfigError("record_every", "must be >= 1")
        if self.isolated not in ("exclude", "zero"):
            raise ConfigError("isolated", "must be 'exclude' or 'zero'")
        if self.mode == "perturbed":
            self.schedule.validate(self.params.T)

    @property
    def noise(self) -> NoiseSchedule | None:
        return self.schedule if self.mode == "perturbed" else None

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with changes; FlockParams fields may be given directly."""
        pfields = {k: changes.pop(k) for k in list(changes) if k in FlockParams.__dataclass_fields__}
        if pfields:
            changes["params"] = changes.get("params", self.params).replace(**pfields)
        return dataclasses.replace(self, **changes)


@dataclass
class RunRecord:
    config: ScenarioConfig
    states: list[FlockState] = field(default_factory=list)
    samples: list[MetricsSample] = field(default_factory=list)
    path_length: float = 0.0
    min_distance: float = np.inf
    steps_done: int = 0
    wall_time: float = 0.0
    max_speed: float = 0.0
    max_control: float = 0.0
    error: str | None = None
    final_state: FlockState | None = None

    @property
    def final_gamma(self) -> float:
        return self.samples[-1].gamma if self.samples else float("nan")

    def summary(self) -> dict:
        """Deterministic run summary (wall time is kept out on purpose)."""
        return {
            "model": self.config.params.model,
            "mode": self.config.mode,
            "seed": self.config.seed,
            "steps": self.steps_done,
            "final_time": self.samples[-1].t if self.samples else 0.0,
            "final_gamma": self.final_gamma,
            "path_length": self.path_length,
            "min_distance": self.min_distance,
            "time_to_gamma_0.9": time_to_gamma(self.samples, 0.9),
            "final_components": self.samples[-1].components if self.samples else 0,
            "max_speed": self.max_speed,
            "max_control": self.max_control,
            "error": self.error,
        }


def derive_seed(master: int, index: int) -> int:
    """Per-cell seed for batch runs, a pure function of ``(master, index)``.

    Cells that share an index (e.g. the reactive and FDA arms of one
    comparison) share a seed, and adding cells never changes existing ones.
    """
    ss = np.random.SeedSequence([master & 0xFFFFFFFFFFFFFFFF, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def time_to_gamma(samples, level: float) -> float:
    """First sampled time with ``gamma >= level``; ``inf`` if never reached."""
    for s in samples:
        if s.gamma >= level:
            return s.t
    return float("inf")


def _rng(seed: int, domain: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, domain])))


def initialize(config: ScenarioConfig, rng: np.random.Generator | None = None) -> FlockState:
    """Uniform positions in ``[pos_low, pos_high)^m`` and Gaussian velocities.

    Velocities are scaled by ``vel_std`` then saturated to ``v_max``; controls
    start at zero. Configurations with a pair closer than ``D_MIN`` are
    redrawn.
    """
    p, ini = config.params, config.init
    rng = _rng(config.seed, _INIT_DOMAIN) if rng is None else rng
    for _ in range(MAX_INIT_ATTEMPTS):
        pos = rng.uniform(ini.pos_low, ini.pos_high, size=(p.n, p.m))
        vel = ini.vel_std * rng.standard_normal((p.n, p.m))
        d = pairwise_distances(pos)
        np.fill_diagonal(d, np.inf)
        if d.min() > D_MIN:
            break
    else:
        raise DegeneracyError(f"could not draw separated initial positions in {MAX_INIT_ATTEMPTS} attempts")
    return FlockState(0.0, pos, saturate(vel, p.v_max), np.zeros((p.n, p.m)), step=0)


def step(state: FlockState, buffer: HistoryBuffer, config: ScenarioConfig,
         stream: NoiseStream | None = None) -> FlockState:
    """Advance one ``dt``: perceive, control, then semi-implicit Euler.

    All commands are computed from the same snapshot before anything moves.
    Velocities are re-saturated after the update and positions advance with
    the new velocity. The new snapshot is pushed onto ``buffer``.
    """
    params = config.params
    if buffer.newest is not state:
        raise ValueError("buffer's newest snapshot must be the current state")
    if config.noise is not None and stream is None:
        stream = NoiseStream(config.seed)
    n = state.n
    p_view, v_view, u_view = perceived_arrays(buffer, state.time, config.noise, stream, state.step)
    mask = adjacency(state.positions, params.r)
    try:
        _, u = compute_controls(state.positions, state.velocities, p_view, v_view, u_view,
                                mask, params, observers=np.arange(n))
    except DegeneracyError as exc:
        exc.step = state.step
        raise DegeneracyError(f"step {state.step} (t={state.time:.2f} s): {exc}", exc.pair, state.step) from None
    v_new = saturate(state.velocities + params.dt * u, params.v_max)
    p_new = state.positions + params.dt * v_new
    new = FlockState(time=round((state.step + 1) * params.dt, 12), positions=p_new, velocities=v_new,
                     controls=u, step=state.step + 1)
    buffer.push(new)
    return new


def run(config: ScenarioConfig, initial: FlockState | None = None, keep_states: bool = True) -> RunRecord:
    """Simulate ``T / dt`` steps and collect metrics.

    Metrics are evaluated on true states at every step (the centroid path
    length and the run-wide minimum distance use the full-resolution series);
    samples and snapshots are kept at the ``record_every`` cadence plus the
    final step. On a degeneracy error the exception is re-raised with the
    partial record attached as ``exc.record``.
    """
    params = config.params
    state = initialize(config) if initial is None else initial
    buffer = HistoryBuffer(params.lag_steps if config.noise is not None else 0, state)
    stream = NoiseStream(config.seed) if config.noise is not None else None
    n_steps = params.n_steps
    P = np.empty((n_steps + 1,) + state.positions.shape)
    V = np.empty_like(P)
    U = np.empty_like(P)
    P[0], V[0], U[0] = state.positions, state.velocities, state.controls
    kept = [state]
    rec = RunRecord(config)
    t0 = _time.perf_counter()
    try:
        for k in range(1, n_steps + 1):
            state = step(state, buffer, config, stream)
            rec.steps_done = k
            P[k], V[k], U[k] = state.positions, state.velocities, state.controls
            if keep_states and (k % config.record_every == 0 or k == n_steps):
                kept.append(state)
    except DegeneracyError as exc:
        rec.error = str(exc)
        rec.final_state = state
        _finish(rec, P, V, U, kept, keep_states, t0)
        exc.record = rec
        raise
    _finish(rec, P, V, U, kept, keep_states, t0)
    rec.final_state = state
    return rec


def _finish(rec: RunRecord, P, V, U, kept, keep_states, t0) -> None:
    config = rec.config
    done = rec.steps_done
    times = np.round(np.arange(done + 1) * config.params.dt, 12)
    ms = metrics_series(times, P[:done + 1], V[:done + 1], config.params.r, isolated=config.isolated)
    idx = [k for k in range(done + 1) if k % config.record_every == 0 or k == done]
    rec.samples = [
        MetricsSample(
            t=float(ms["t"][k]), gamma=float(ms["gamma"][k]), d_min=float(ms["d_min"][k]),
            d_mean=float(ms["d_mean"][k]), d_max=float(ms["d_max"][k]), centroid=ms["centroid"][k],
            S_cum=float(ms["S_cum"][k]), components=int(ms["components"][k]), isolated=int(ms["isolated"][k]),
        )
        for k in idx
    ]
    rec.path_length = float(ms["S_cum"][done])
    rec.min_distance = float(ms["d_min"].min())
    rec.max_speed = float(np.sqrt(np.einsum("kim,kim->ki", V[:done + 1], V[:done + 1])).max())
    rec.max_control = float(np.sqrt(np.einsum("kim,kim->ki", U[:done + 1], U[:done + 1])).max())
    rec.states = kept if keep_states else []
    rec.wall_time = _time.perf_counter() - t0
