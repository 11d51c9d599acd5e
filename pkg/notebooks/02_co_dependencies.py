# coding: utf-8

# # Forced orderings between writes
#
# Before searching for a sequence, the checker derives orderings that every
# consistent sequence must contain. A write w' that must come before a read
# of w and after w has to sit before w (WW), or a read that precedes a
# foreign overwrite of its value forces the overwrite after it (RW). When
# these edges close a cycle no search is needed.

# In[1]:

from memconsist.linearizer import co_analysis
from memconsist.orders import process_order
from memconsist.trace import writes_to
from memconsist.tracefmt import fixtures

figs = fixtures()


def show(name):
    e = figs[name]
    a = co_analysis(e, process_order(e) | writes_to(e))
    for n, (ww, rw) in enumerate(a.steps, start=1):
        for kind, edges in (("WW", ww), ("RW", rw)):
            for x, y in sorted(edges):
                print(f"  step {n} {kind} {e.describe(x)} -> {e.describe(y)}")
    print("  acyclic" if a.acyclic else "  cycle: " + " -> ".join(map(e.describe, a.cycle)))


# In[2]:

for name in ("fig2-sequential", "fig3-nonsequential", "fig-cache"):
    print(name)
    show(name)


# The adjacency matrices behind the analysis are plain numpy arrays.

# In[3]:

import numpy as np

from memconsist.relation import close_matrix, to_matrix

e = figs["fig3-nonsequential"]
m = to_matrix(process_order(e) | writes_to(e), len(e))
print(m.astype(int))
print("reachable pairs:", int(close_matrix(m).sum()), "of", int(np.prod(m.shape)))
