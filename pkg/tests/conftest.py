from __future__ import annotations

import re

import pytest
from hypothesis import strategies as st

from memconsist.linearizer import linearize
from memconsist.oracle import generate, random_params
from memconsist.relation import Relation
from memconsist.trace import Execution
from memconsist.tracefmt import fixtures as load_fixtures
from memconsist.tracefmt import loads

_OP = re.compile(r"(w|r)\((\d+),(\w+),(\d+)\)|(acq|rel)\((\d+),(\w+)\)")


@pytest.fixture(scope="session")
def figs() -> dict[str, Execution]:
    return load_fixtures()


def op_ids(exec: Execution, text: str) -> tuple[int, ...]:
    """Ids of the operations named in inline notation, e.g. ``w(1,x,1) r(2,x,1)``."""
    index = {str(op): k for k, op in enumerate(exec.ops)}
    names = [m.group(0) for m in _OP.finditer(text)]
    return tuple(index[n] for n in names)


def chain(exec: Execution, seq) -> Relation:
    seq = tuple(seq)
    return Relation.of(exec.ids, zip(seq, seq[1:]))


def complete(exec: Execution, seq) -> tuple[int, ...] | None:
    """A consistent sequence of all operations that keeps ``seq`` as a subsequence."""
    res = linearize(exec, chain(exec, seq))
    return res.witness.order if res.witness else None


SYNC_TRACES = {
    "handoff": "process 1: acq s ; w x 1 ; rel s\nprocess 2: acq s ; r x 1 ; rel s\nsyncorder s: 1 2\n",
    "late-write": "process 1: acq s ; rel s ; w x 1\nprocess 2: acq s ; r x 1 ; rel s\nsyncorder s: 1 2\n",
    "stale-in-lock": "process 1: w x 1 ; acq s ; w x 2 ; rel s\nprocess 2: acq s ; r x 1 ; rel s\nsyncorder s: 1 2\n",
    "relayed": ("process 1: w x 1 ; acq s ; w x 2 ; rel s\nprocess 2: acq s ; r x 1 ; rel s\n"
                "process 3: acq s ; rel s\nsyncorder s: 1 3 2\n"),
    "after-release": ("process 1: w x 2 ; acq s ; r x 2 ; w x 4 ; rel s ; r y 1\n"
                      "process 2: w y 1 ; w y 3 ; r x 2\nsyncorder s: 1\n"),
    "bound-handoff": ("bind s : x\nprocess 1: w x 1 ; acq s ; w x 2 ; w y 5 ; rel s\n"
                      "process 2: acq s ; r x 2 ; r y 5 ; rel s\nsyncorder s: 1 2\n"),
}


@pytest.fixture(scope="session")
def sync_traces() -> dict[str, Execution]:
    return {k: loads(v) for k, v in SYNC_TRACES.items()}


def small_executions(max_ops: int = 7, sync_vars: int = 0):
    return st.integers(0, 10**6).map(lambda s: generate(random_params(s, max_ops=max_ops, sync_vars=sync_vars)))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
