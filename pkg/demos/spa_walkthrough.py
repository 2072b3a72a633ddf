"""Walk through one sbest selection on the five-particle instance, then on a
random swarm snapshot, printing each intermediate quantity."""
import numpy as np

from spadepso.spa import run_spa, worked_example_text
from spadepso.topology import distance_matrix, knn_graph, union_graph

print(worked_example_text())
print()

# a live-looking snapshot: 12 particles on a 2-D sphere, kNN graph of out-degree 3
rng = np.random.default_rng(7)
X = rng.uniform(-5, 5, (12, 2))
fitness = np.sum(X**2, axis=1)
G = union_graph(knn_graph(distance_matrix(X), 3), np.zeros((12, 12), dtype=np.int8))
rep = run_spa(G, fitness)

print("snapshot of 12 particles")
print("best by fitness    ", int(np.argmin(fitness)))
print("candidates         ", rep.candidates.tolist())
print("actual turnout     ", np.round(rep.r_at[rep.candidates], 3).tolist())
print("expected turnout   ", np.round(rep.r_et[rep.candidates], 3).tolist())
print("theta              ", np.round(rep.theta, 3).tolist())
print("sbest              ", rep.sbest)
