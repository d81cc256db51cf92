"""Reactive and future-direction-aware (FDA) flocking simulation and analysis."""

__version__ = "0.1.0"

from .analysis import GraphMatrices, SpectralReport, analyze, build_graph, reduced_operator, spectral_report
from .controller import ControlCommand, fda_control, predict_velocity, reactive_control, saturate
from .core import (
    AgentState,
    ConfigError,
    DegeneracyError,
    FlockError,
    FlockParams,
    FlockState,
    cosine_similarity,
    norm,
)
from .interaction import NeighborSet, neighbors, phi, psi
from .metrics import (
    MetricsSample,
    alignment_gamma,
    centroid_path_length,
    distance_stats,
    interaction_components,
)
from .perception import (
    HistoryBuffer,
    NoiseSchedule,
    NoiseStream,
    PerceivedNeighbor,
    delayed_state,
    perceive,
    sigma_at,
)
from .sim import InitSpec, RunRecord, ScenarioConfig, initialize, run, step

