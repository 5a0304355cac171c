"""Slack of the k/(k-2l) e^{-1} count bound over every 7-vertex graph.

For each (k, l) prints the largest observed count of k-subsets with exactly l
edges, the certified bound, and the graph that comes closest.
"""

import numpy as np

from edgestat.bounds import bound_thm_hyper_1e, count_scale
from edgestat.enumeration import all_subset_table, popcounts
from edgestat.search import graph_catalog

n = 7
sizes = popcounts(np.arange(1 << n, dtype=np.int64))
graphs = list(graph_catalog(n))
tables = [all_subset_table(G)[0] for G in graphs]

print(f"{'k':>2} {'l':>2} {'max count':>9} {'bound':>9} {'ratio':>6}  witness edges")
for k in range(3, n + 1):
    for l in range(1, (k + 1) // 2):
        bound = float(bound_thm_hyper_1e(2, k, l)[0].scale(count_scale(n, k)))
        best, arg = -1, None
        for G, e in zip(graphs, tables):
            c = int(np.count_nonzero(e[sizes == k] == l))
            if c > best:
                best, arg = c, G
        print(f"{k:>2} {l:>2} {best:>9} {bound:>9.2f} {best / bound:>6.3f}  {list(arg.edge_tuples)}")
