"""The named orders of an execution: PO, LPO, CR, ME and SO."""

from __future__ import annotations

from typing import Callable, Iterable

from .relation import Relation, find_cycle, transitive_closure, union
from .trace import Execution, Kind, writes_to

# (execution, sync operation id, process order) -> ordinary operation ids
DRule = Callable[[Execution, int, Relation], Iterable[int]]


class CyclicCausality(RuntimeError):
    """The causal relation of an execution that passed validation is cyclic."""


def _cached(exec: Execution, key, build):
    if key not in exec._cache:
        exec._cache[key] = build()
    return exec._cache[key]


def process_order(exec: Execution) -> Relation:
    def build():
        edges = set()
        for seq in exec.processes.values():
            for k, a in enumerate(seq):
                edges.update((a, b) for b in seq[k + 1:])
        return Relation(frozenset(exec.ids), frozenset(edges))

    return _cached(exec, "po", build)


def lazy_process_order(exec: Execution) -> Relation:
    """PO pairs whose first action is a read or whose actions share a variable."""
    def build():
        ops = exec.ops
        keep = {(a, b) for a, b in process_order(exec).edges
                if ops[a].is_read or ops[a].variable == ops[b].variable}
        return Relation(frozenset(exec.ids), frozenset(keep))

    return _cached(exec, "lpo", build)


def program_order(exec: Execution, lazy: bool = False) -> Relation:
    return lazy_process_order(exec) if lazy else process_order(exec)


def causal_relation(exec: Execution, lazy: bool = False) -> Relation:
    def build():
        cr = transitive_closure(union(writes_to(exec), program_order(exec, lazy)))
        if find_cycle(cr) is not None:
            raise CyclicCausality("causal relation is cyclic")
        return cr

    return _cached(exec, ("cr", lazy), build)


def mutual_exclusion_order(exec: Execution) -> Relation:
    """Total order of the acquires and releases on each sync variable."""
    def build():
        edges = set()
        for s in exec.sync_acq_order:
            chain = [o for pair in exec.critical_sections(s) for o in pair]
            for k, a in enumerate(chain):
                edges.update((a, b) for b in chain[k + 1:])
        return Relation(frozenset(exec.ids), frozenset(edges))

    return _cached(exec, "me", build)


def sync_order(exec: Execution, dminus: DRule, dplus: DRule, lazy: bool = False) -> Relation:
    """ME edges plus ``e -> o`` for ``e`` in D-(o) and ``o -> e`` for ``e`` in D+(o).

    Not closed; the chain clause through intermediate sync actions is already
    covered by ME being transitive.
    """
    po = program_order(exec, lazy)
    edges = set(mutual_exclusion_order(exec).edges)
    for o, op in enumerate(exec.ops):
        if not op.is_sync:
            continue
        edges.update((e, o) for e in dminus(exec, o, po))
        edges.update((o, e) for e in dplus(exec, o, po))
    return Relation(frozenset(exec.ids), frozenset(edges))


# -- D-set building blocks -------------------------------------------------

def before(exec: Execution, o: int, po: Relation) -> set[int]:
    """Ordinary accesses preceding ``o`` in process order."""
    return {a for a, b in po.edges if b == o and not exec.ops[a].is_sync}


def after(exec: Execution, o: int, po: Relation) -> set[int]:
    return {b for a, b in po.edges if a == o and not exec.ops[b].is_sync}


def releases_into(exec: Execution, acquire: int) -> list[int]:
    """Releases whose writes-to edge targets ``acquire``."""
    return [a for a, b in writes_to(exec).edges if b == acquire and exec.ops[a].kind is Kind.RELEASE]
