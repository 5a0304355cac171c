"""How close do the standard constructions get to 1/e?

Prints the exact probability for the bipartite and clique block
constructions as k grows, and a sampled estimate for the sparse random graph
with edge probability 1/C(k, 2).
"""

import math

from edgestat.constructions import bipartite_law, clique_law, gnp_for_ell_one
from edgestat.enumeration import monte_carlo_estimate

INV_E = math.exp(-1)

print("bipartite, l = k - 1 (exact, n = 1000 k)")
for k in (5, 10, 20, 40, 80):
    p = float(bipartite_law(1000 * k, k)[k - 1])
    print(f"  k={k:3d}  P={p:.6f}  P-1/e={p - INV_E:+.6f}")

print("planted clique, l = C(m, 2) (exact, n = 100 k)")
for k, m in ((16, 4), (36, 9), (64, 16), (100, 25)):
    p = float(clique_law(100 * k, k, m)[math.comb(m, 2)])
    print(f"  k={k:3d} m={m:2d}  P={p:.5f}  P*sqrt(m)={p * math.sqrt(m):.4f}")

print("G(n, 1/C(k,2)), l = 1 (20000 samples, 99% Wilson interval)")
for k in (10, 20, 30):
    G = gnp_for_ell_one(100 * k, k, seed=k)
    est = monte_carlo_estimate(G, k, 1, 20_000, seed=1)
    print(f"  k={k:3d}  estimate={est.estimate:.4f}  [{est.lo:.4f}, {est.hi:.4f}]")
