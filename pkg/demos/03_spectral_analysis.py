import numpy as np

from fdaflock import ScenarioConfig, initialize
from fdaflock.analysis import analyze, build_graph, graph_from_adjacency, reduced_operator

# Two agents, one edge. L = [[1, -1], [-1, 1]].
pair = graph_from_adjacency([[0, 1], [1, 0]])
for theta in [0.0, 0.4, 0.8]:
    M = reduced_operator(pair, theta, phi=1.0, t_ph=1.0)
    print("theta", theta, "eigenvalues", np.sort(np.linalg.eigvals(M).real))

# The sign of the preconditioner matters, compare both readings
for conv in ["published", "rederived"]:
    M = reduced_operator(pair, 0.8, phi=1.0, t_ph=1.0, convention=conv)
    print(conv, np.sort(np.linalg.eigvals(M).real))

# Linearise around the interaction graph of an actual initial configuration.
state = initialize(ScenarioConfig(seed=0))
g = build_graph(state.positions, 7.5)
print("components:", g.components, "degrees:", g.degrees)
rep = analyze(g, theta=0.8, phi="per-agent", t_ph=1.0)
print(rep.status, "slowest rate %.4f" % rep.slowest_rate)

# A disconnected graph carries one zero mode per component
two = graph_from_adjacency(np.zeros((2, 2)))
print(analyze(two, theta=0.0).zero_modes)
