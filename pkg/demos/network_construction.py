"""The three interaction graphs of the standard experiment grid."""

import numpy as np

from inpd import Neighborhood, degree_stats, erdos_renyi, grid

torus = grid(13, 13, Neighborhood.EIGHT, wrap=True)
print("13x13 eight-neighbor torus:", torus.n, "nodes,", torus.edge_count, "edges")
print("  degree stats (min, max, mean, isolated):", degree_stats(torus))

rng = np.random.default_rng(7)
er5 = erdos_renyi(169, 434, rng)
er8 = erdos_renyi(169, 717, rng)
print("G(169, 434):", degree_stats(er5), "-> mean degree ~5.14")
print("G(169, 717):", degree_stats(er8), "-> mean degree ~8.48")

# Sparse draws occasionally isolate a node; isolated agents play no games
# but still count toward cooperation rates.
isolated = [degree_stats(erdos_renyi(169, 434, np.random.default_rng(k)))[3] for k in range(50)]
print(f"isolated nodes per G(169,434) draw: mean {np.mean(isolated):.2f} over 50 draws")
