# coding: utf-8

# # Random traces against the brute-force oracle
#
# Generated traces are checked twice: by the pruned search and by plain
# enumeration of orders. Both must agree, and the model hierarchy must
# never be contradicted.

# In[1]:

import time
from collections import Counter

from memconsist.models import ORDINARY, classify
from memconsist.oracle import fuzz, generate, random_params
from memconsist.tracefmt import render

e = generate(random_params(7, max_ops=8))
print(render(e))


# In[2]:

start = time.perf_counter()
report = fuzz(range(500), max_ops=8, max_procs=3, max_vars=3)
print(f"500 traces in {time.perf_counter() - start:.1f} s, ok={report.ok}")


# How often each model holds on this corpus:

# In[3]:

counts = Counter()
for seed in range(500):
    for m, h in classify(generate(random_params(seed, max_ops=8)), models=ORDINARY).holds().items():
        counts[m.value] += bool(h)
for name, n in counts.most_common():
    print(f"{name:20} {n:4d}")
