# coding: utf-8

# # An execution with acyclic CO that is not sequential
#
# Three-operation triplets w, w', r on one variable can each be ordered two
# ways. Link writes and reads between triplets constrain pairs of choices,
# which is a 2-SAT problem. An unsatisfiable clause set whose links carry no
# WW or RW edges gives an execution that passes the CO test yet has no
# sequential witness. Three variables keep this to about a second; the
# default five-variable search takes under a minute.

# In[1]:

import time

from memconsist.linearizer import co_precheck, linearize
from memconsist.models import ModelId, check
from memconsist.oracle import TripletSearchParams, find_acyclic_co_nonsequential
from memconsist.orders import process_order
from memconsist.trace import writes_to
from memconsist.tracefmt import render

params = TripletSearchParams(variables=("x", "a", "b"))
start = time.perf_counter()
report = find_acyclic_co_nonsequential(params)
print(f"found={report.found} after {report.formulas} clause sets, {time.perf_counter() - start:.1f} s")


# In[2]:

e = report.execution
print(render(e))
print(len(e), "operations,", len(report.links), "links")


# In[3]:

po = process_order(e)
print("CO acyclic:", co_precheck(e, po | writes_to(e)).acyclic)
print("sequential:", linearize(e, po).linearizable)
for m in (ModelId.CAUSAL, ModelId.PROCESSOR, ModelId.PRAM):
    print(m.value, check(e, m).holds)
