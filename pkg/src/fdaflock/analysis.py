"""Linearized alignment analysis on a frozen interaction graph.

Near consensus, with cohesion at equilibrium and no saturation, delay or
noise, the blended law reduces to linear velocity dynamics
``v' = M v`` with ``M = -phi (I + theta*phi*t_ph*A)^-1 L`` acting on each
spatial axis separately. Because the full ``(n*m, n*m)`` operator is
``M kron I_m``, only the ``n x n`` block is ever built.

Re-deriving the reduction directly from the control law gives
``(I - theta*phi*t_ph*A)`` instead of ``(I + ...)`` because the predicted
accelerations of neighbors enter with a positive sign. Both are available
through ``convention``: ``"published"`` (default) and ``"rederived"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FlockError
from .interaction import adjacency
from .metrics import count_components

TOL_ZERO = 1e-9
TOL_REAL = 1e-9
SINGULAR_TOL = 1e-12
CONVENTIONS = ("published", "rederived")


class SingularPreconditionerError(FlockError):
    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(f"preconditioner I + c*A is singular (condition estimate {cond:.3g})")


class EigenSolverError(FlockError):
    pass


@dataclass(frozen=True)
class GraphMatrices:
    adjacency: np.ndarray
    laplacian: np.ndarray

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @property
    def components(self) -> int:
        return count_components(self.adjacency > 0)


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    zero_modes: int
    components: int
    slowest_rate: float
    precond_min_eig: float
    stable: bool
    status: str = "ok"
    notes: list[str] = field(default_factory=list)


def graph_from_adjacency(a) -> GraphMatrices:
    a = np.asarray(a, dtype=float)
    if a.shape[0] != a.shape[1] or not np.array_equal(a, a.T):
        raise ValueError("adjacency must be square and symmetric")
    if np.any(np.diag(a) != 0):
        raise ValueError("adjacency must have a zero diagonal")
    return GraphMatrices(a, np.diag(a.sum(axis=1)) - a)


def build_graph(positions, r: float) -> GraphMatrices:
    """Adjacency and Laplacian of the closed-ball interaction graph."""
    return graph_from_adjacency(adjacency(positions, r).astype(float))


def _phi_diag(graph: GraphMatrices, phi) -> np.ndarray:
    if phi is None or (isinstance(phi, str) and phi == "per-agent"):
        deg = graph.degrees
        return np.diag(np.where(deg > 0, 1.0 / np.maximum(deg, 1), 0.0))
    return float(phi) * np.eye(graph.n)


def preconditioner(graph: GraphMatrices, theta: float, phi, t_ph: float,
                   convention: str = "published") -> np.ndarray:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    sign = 1.0 if convention == "published" else -1.0
    return np.eye(graph.n) + sign * theta * t_ph * (_phi_diag(graph, phi) @ graph.adjacency)


def reduced_operator(graph: GraphMatrices, theta: float, phi=1.0, t_ph: float = 1.0,
                     convention: str = "published") -> np.ndarray:
    """The ``n x n`` block ``-(I +/- theta*t_ph*Phi*A)^-1 Phi L``.

    With a scalar weight this is ``-phi (I +/- theta*phi*t_ph*A)^-1 L``.

    ``phi`` is a scalar (uniform weight) or ``"per-agent"`` for
    ``Phi = diag(1/deg_i)``. Raises SingularPreconditionerError when the
    preconditioner cannot be inverted.
    """
    pre = preconditioner(graph, theta, phi, t_ph, convention)
    cond = np.linalg.cond(pre)
    if not np.isfinite(cond) or cond > 1.0 / SINGULAR_TOL:
        raise SingularPreconditionerError(cond)
    Phi = _phi_diag(graph, phi)
    if theta == 0:
        return -(Phi @ graph.laplacian)
    return -np.linalg.solve(pre, Phi @ graph.laplacian)


def full_operator(graph: GraphMatrices, theta: float, phi: float, t_ph: float, m: int,
                  convention: str = "published") -> np.ndarray:
    """Explicit ``(n*m, n*m)`` operator with Kronecker factors, for cross-checks."""
    sign = 1.0 if convention == "published" else -1.0
    I_m = np.eye(m)
    pre = np.eye(graph.n * m) + sign * theta * phi * t_ph * np.kron(graph.adjacency, I_m)
    return -phi * np.linalg.solve(pre, np.kron(graph.laplacian, I_m))


def spectral_report(M, component_count: int, precond_min_eig: float = float("nan")) -> SpectralReport:
    """Eigen-decomposition of a reduced operator with stability diagnostics.

    A mode counts as zero when ``|lambda| < TOL_ZERO * max|lambda|``. The
    operator is called stable when the zero modes match the graph's component
    count and every other mode has negative real part.
    """
    M = np.asarray(M, dtype=float)
    try:
        eig = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    if not np.all(np.isfinite(eig)):
        raise EigenSolverError("eigensolver returned non-finite eigenvalues")
    eig = eig[np.lexsort((eig.imag, -eig.real))]
    scale = np.max(np.abs(eig)) if eig.size else 0.0
    notes = []
    if scale == 0.0:
        return SpectralReport(eig, int(eig.size), component_count, float("nan"), precond_min_eig,
                              stable=False, status="trivially-marginal",
                              notes=["operator is zero (no edges)"])
    zero = np.abs(eig) < TOL_ZERO * scale
    nonzero = eig[~zero]
    slowest = float(nonzero.real.max()) if nonzero.size else float("nan")
    stable = int(zero.sum()) == component_count and bool(np.all(nonzero.real < -TOL_REAL * scale))
    if np.any(np.abs(eig.imag) > TOL_ZERO * scale):
        notes.append("complex eigenvalues present")
    return SpectralReport(eig, int(zero.sum()), component_count, slowest, precond_min_eig, stable,
                          status="ok" if stable else "unstable", notes=notes)


def analyze(graph: GraphMatrices, theta: float, phi=1.0, t_ph: float = 1.0,
            convention: str = "published") -> SpectralReport:
    """Build the reduced operator for one grid point and report on it.

    A singular preconditioner yields a report with status ``"singular"``
    instead of raising.
    """
    pre = preconditioner(graph, theta, phi, t_ph, convention)
    pre_eig = np.linalg.eigvals(pre)
    margin = float(pre_eig.real.min())
    try:
        M = reduced_operator(graph, theta, phi, t_ph, convention)
    except SingularPreconditionerError as exc:
        return SpectralReport(np.full(graph.n, np.nan + 0j), 0, graph.components, float("nan"), margin,
                              stable=False, status="singular", notes=[str(exc)])
    rep = spectral_report(M, graph.components, margin)
    if margin <= 0:
        rep.notes.append("preconditioner has a non-positive eigenvalue")
    if convention == "rederived":
        rep.notes.append("rederived sign convention (I - c*A)")
    return rep
