# coding: utf-8

# # A tour of the bundled traces
#
# Each fixture is a small execution with a known verdict under the
# ordinary models. We load them, classify them and look at the witnesses.

# In[1]:

from memconsist.models import ORDINARY, ModelId, check, classify
from memconsist.tracefmt import FIXTURE_NAMES, fixture_text, fixtures

figs = fixtures()
print(fixture_text("fig3-nonsequential"))


# The verdict table. Rows are fixtures, columns are models.

# In[2]:

header = "".join(f"{m.value[:10]:>11}" for m in ORDINARY)
print(f"{'':20}{header}")
for name in FIXTURE_NAMES:
    holds = classify(figs[name], models=ORDINARY).holds()
    row = "".join(f"{'yes' if holds[m] else 'no':>11}" for m in ORDINARY)
    print(f"{name:20}{row}")


# A holding verdict carries one witness per instance. For Processor that is
# one sequence per process view, and the views agree on each variable's
# write order.

# In[3]:

e = figs["fig-processor"]
v = check(e, ModelId.PROCESSOR)
for key, w in v.witnesses.items():
    print(key, w.render(e))
for var, seq in v.write_orders.items():
    print("writes on", var, [e.describe(o) for o in seq])


# Failing verdicts name the instance that could not be linearized.

# In[4]:

for name in ("fig-pram-cache", "fig-causal-cache"):
    v = check(figs[name], ModelId.PROCESSOR)
    print(name, v.holds, v.failing_instance)
