"""Consistent linearization of a relation, and the CO extension used to prune it.

``linearize`` answers whether some consistent total sequence of all the
operations contains a given relation.  Before searching it saturates the
relation with the write-write and read-write dependencies every consistent
sequence must respect (the CO fixpoint); a cycle there is an immediate
refutation, otherwise the fixpoint is the precedence graph of a memoized
backtracking search.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field

import numpy as np

from .orders import mutual_exclusion_order
from .relation import Relation, close_matrix, find_cycle, from_matrix, to_matrix, union
from .trace import Execution, Kind, Witness, writes_to

DEFAULT_BUDGET = 10**7


class UniverseMismatch(ValueError):
    pass


class Status(enum.Enum):
    LINEARIZABLE = "linearizable"
    NOT_LINEARIZABLE = "not-linearizable"
    BUDGET = "budget"


@dataclass(frozen=True)
class COCycle:
    cycle: tuple[int, ...]


@dataclass(frozen=True)
class SearchExhausted:
    pass


Refutation = COCycle | SearchExhausted


@dataclass(frozen=True)
class LinearizeResult:
    status: Status
    witness: Witness | None = None
    refutation: Refutation | None = None
    expansions: int = 0

    @property
    def linearizable(self) -> bool | None:
        """True/False, or None when the budget ran out."""
        if self.status is Status.BUDGET:
            return None
        return self.status is Status.LINEARIZABLE


def is_consistent_sequence(seq, exec: Execution) -> bool:
    """No read in ``seq`` returns an overwritten value, and sync ops follow ME."""
    order = tuple(seq)
    if sorted(order) != list(exec.ids):
        return False
    last: dict[str, int] = {}
    for o in order:
        op = exec.ops[o]
        if op.is_write:
            last[op.variable] = o
        elif op.is_read:
            if last.get(op.variable) != exec.writer_of(o):
                return False
    for s in exec.sync_variables:
        expected = [o for pair in exec.critical_sections(s) for o in pair]
        if [o for o in order if exec.ops[o].is_sync and exec.ops[o].variable == s] != expected:
            return False
    return True


# -- CO extension ------------------------------------------------------------

def _triplets(exec: Execution) -> list[tuple[int, int, np.ndarray]]:
    """``(w, r, others)`` with ``w`` writing to ``r`` and ``others`` the other writes on its variable."""
    if "triplets" not in exec._cache:
        out = []
        for rd in exec.reads():
            wr = exec.writer_of(rd)
            others = np.array([x for x in exec.writes(exec.ops[rd].variable) if x != wr], dtype=int)
            if others.size:
                out.append((wr, rd, others))
        exec._cache["triplets"] = out
    return exec._cache["triplets"]


def _dependencies(exec: Execution, m: np.ndarray) -> tuple[set, set]:
    ww, rw = set(), set()
    for wr, rd, others in _triplets(exec):
        for x in others[m[others, rd]]:
            ww.add((int(x), wr))
        for x in others[m[wr, others]]:
            rw.add((rd, int(x)))
    return ww, rw


def co_dependencies(exec: Execution, rel: Relation) -> tuple[set, set]:
    """New WW edges ``w' -> w`` and RW edges ``r -> w'`` implied by ``rel``."""
    m = to_matrix(rel, len(exec))
    ww, rw = _dependencies(exec, m)
    return ww - rel.edges, rw - rel.edges


def co_step(exec: Execution, rel: Relation) -> Relation:
    ww, rw = co_dependencies(exec, rel)
    m = to_matrix(rel, len(exec))
    for a, b in ww | rw:
        m[a, b] = True
    return from_matrix(close_matrix(m), rel.universe | frozenset(exec.ids))


@dataclass
class COAnalysis:
    """Outcome of iterating the co step to its fixpoint.

    ``steps`` holds the (WW, RW) edges discovered at each step, in order.
    """

    fixpoint: np.ndarray
    steps: list[tuple[set, set]] = field(default_factory=list)
    cycle: tuple[int, ...] | None = None

    @property
    def acyclic(self) -> bool:
        return self.cycle is None

    def all_dependencies(self) -> set:
        return set().union(*(ww | rw for ww, rw in self.steps)) if self.steps else set()


def co_analysis(exec: Execution, rel: Relation) -> COAnalysis:
    n = len(exec)
    base = to_matrix(rel, n)
    m = base
    analysis = COAnalysis(fixpoint=m)
    closed = close_matrix(m)
    while True:
        ww, rw = _dependencies(exec, m)
        new_ww = {e for e in ww if not closed[e]}
        new_rw = {e for e in rw if not closed[e]}
        if not new_ww and not new_rw:
            m = closed
            break
        analysis.steps.append((new_ww, new_rw))
        step = closed.copy()
        for a, b in new_ww | new_rw:
            step[a, b] = True
        m = close_matrix(step)
        closed = m
        if np.diagonal(m).any():
            break
    analysis.fixpoint = m
    if np.diagonal(m).any():
        edges = set(rel.edges) | analysis.all_dependencies()
        analysis.cycle = find_cycle(Relation(frozenset(range(n)), frozenset(edges)))
    return analysis


def co_fixpoint(exec: Execution, rel: Relation) -> Relation:
    """Iterate :func:`co_step` until no new edge appears."""
    current = rel.with_universe(exec.ids)
    while True:
        nxt = co_step(exec, current)
        if nxt.edges == current.edges:
            return nxt
        current = nxt


@dataclass(frozen=True)
class COCheck:
    acyclic: bool
    cycle: tuple[int, ...] | None = None


def co_precheck(exec: Execution, rel: Relation) -> COCheck:
    """Acyclicity of the CO fixpoint: necessary, not sufficient, for linearizability."""
    analysis = co_analysis(exec, rel)
    return COCheck(analysis.acyclic, analysis.cycle)


# -- search ------------------------------------------------------------------

class _OutOfBudget(Exception):
    pass


def search_relation(exec: Execution, rel: Relation) -> Relation:
    """``rel`` with writes-to, and ME when sync operations exist."""
    parts = [rel.with_universe(exec.ids), writes_to(exec)]
    if exec.has_sync:
        parts.append(mutual_exclusion_order(exec))
    return union(*parts)


def linearize(exec: Execution, rel: Relation, budget: int = DEFAULT_BUDGET) -> LinearizeResult:
    """Find a consistent sequence of all operations of ``exec`` containing ``rel``.

    Candidates are tried in ascending id order, so the witness is the
    lexicographically smallest consistent extension.
    """
    if not rel.universe <= frozenset(exec.ids):
        raise UniverseMismatch(f"relation mentions unknown operations {sorted(rel.universe - set(exec.ids))}")
    n = len(exec)
    if n == 0:
        return LinearizeResult(Status.LINEARIZABLE, Witness(()))

    analysis = co_analysis(exec, search_relation(exec, rel))
    if not analysis.acyclic:
        return LinearizeResult(Status.NOT_LINEARIZABLE, refutation=COCycle(analysis.cycle))

    fix = analysis.fixpoint
    preds = [sum(1 << int(a) for a in np.nonzero(fix[:, o])[0]) for o in range(n)]
    ops = exec.ops
    writer = [exec.writer_of(o) if ops[o].is_read else -1 for o in range(n)]
    readers = [0] * n
    for o in range(n):
        if writer[o] >= 0:
            readers[writer[o]] |= 1 << o
    # writes on the same variable, per write
    rivals = [0] * n
    for o in range(n):
        if ops[o].is_write:
            rivals[o] = sum(1 << x for x in exec.writes(ops[o].variable) if x != o)

    full = (1 << n) - 1
    dead: set[int] = set()
    seq: list[int] = []
    expansions = 0

    def placeable(o: int, placed: int) -> bool:
        if preds[o] & ~placed:
            return False
        if ops[o].kind is Kind.WRITE:
            # a placed rival with unplaced readers would be overwritten
            rival = rivals[o] & placed
            while rival:
                low = rival & -rival
                if readers[low.bit_length() - 1] & ~placed:
                    return False
                rival ^= low
        return True

    def dfs(placed: int) -> bool:
        nonlocal expansions
        if placed == full:
            return True
        if placed in dead:
            return False
        for o in range(n):
            if placed >> o & 1 or not placeable(o, placed):
                continue
            expansions += 1
            if expansions > budget:
                raise _OutOfBudget
            seq.append(o)
            if dfs(placed | 1 << o):
                return True
            seq.pop()
        dead.add(placed)
        return False

    limit = sys.getrecursionlimit()
    if n + 100 > limit:
        sys.setrecursionlimit(n + 100)
    try:
        found = dfs(0)
    except _OutOfBudget:
        return LinearizeResult(Status.BUDGET, expansions=expansions)
    if found:
        return LinearizeResult(Status.LINEARIZABLE, Witness(tuple(seq)), expansions=expansions)
    return LinearizeResult(Status.NOT_LINEARIZABLE, refutation=SearchExhausted(), expansions=expansions)
