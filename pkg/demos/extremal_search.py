"""Exhaustive maxima of I(n, k, l) next to a seeded annealing run.

The exhaustive value is the true maximum over all n-vertex graphs; the
annealing value is a lower bound that should never exceed it.
"""

from edgestat.search import SearchConfig, exhaustive_extremal, local_search

cfg = SearchConfig(method="anneal", iterations=1500, restarts=3)
print(f"{'n':>2} {'k':>2} {'l':>2} {'exhaustive':>11} {'anneal':>9}  witness")
for n, k, l in ((6, 3, 1), (7, 4, 3), (7, 4, 2), (8, 4, 3), (8, 5, 4)):
    ex = exhaustive_extremal(n, k, l)
    an = local_search(n, k, l, config=cfg, seed=7)
    print(f"{n:>2} {k:>2} {l:>2} {str(ex.best_value):>11} {str(an.best_value):>9}  "
          f"{list(ex.witness.edge_tuples)}")
