"""Binary relations over operation ids.

A :class:`Relation` is an explicit, immutable edge set together with the
universe of operations it ranges over.  Closure, union, cycle detection and
operation filters live here; the named orders of an execution (process order,
causal relation, ...) are built in :mod:`memconsist.orders`.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:
    from .trace import Execution, Operation

Edge = tuple[int, int]


@dataclass(frozen=True)
class Relation:
    universe: frozenset[int]
    edges: frozenset[Edge]

    def __post_init__(self):
        for a, b in self.edges:
            if a not in self.universe or b not in self.universe:
                raise ValueError(f"edge {(a, b)} leaves the universe")

    @classmethod
    def of(cls, universe: Iterable[int], edges: Iterable[Edge] = ()) -> Relation:
        return cls(frozenset(universe), frozenset(edges))

    @classmethod
    def empty(cls, universe: Iterable[int] = ()) -> Relation:
        return cls(frozenset(universe), frozenset())

    def __contains__(self, edge: Edge) -> bool:
        return edge in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.edges))

    def __or__(self, other: Relation) -> Relation:
        return union(self, other)

    def __le__(self, other: Relation) -> bool:
        return self.edges <= other.edges

    def successors(self, a: int) -> set[int]:
        return {y for x, y in self.edges if x == a}

    def with_universe(self, universe: Iterable[int]) -> Relation:
        return Relation(self.universe | frozenset(universe), self.edges)


def union(*relations: Relation) -> Relation:
    universe: frozenset[int] = frozenset()
    edges: frozenset[Edge] = frozenset()
    for rel in relations:
        universe |= rel.universe
        edges |= rel.edges
    return Relation(universe, edges)


def to_matrix(rel: Relation, size: int) -> np.ndarray:
    """Adjacency matrix over ids ``0..size-1`` (ids must be dense)."""
    m = np.zeros((size, size), dtype=bool)
    if rel.edges:
        src, dst = zip(*rel.edges)
        m[list(src), list(dst)] = True
    return m


def close_matrix(m: np.ndarray) -> np.ndarray:
    """Reachability closure (Warshall) of a square boolean matrix."""
    m = m.copy()
    for k in range(m.shape[0]):
        col = m[:, k]
        if col.any():
            m |= np.outer(col, m[k, :])
    return m


def from_matrix(m: np.ndarray, universe: Iterable[int]) -> Relation:
    src, dst = np.nonzero(m)
    return Relation(frozenset(universe), frozenset(zip(src.tolist(), dst.tolist())))


def transitive_closure(rel: Relation) -> Relation:
    if not rel.edges:
        return rel
    nodes = sorted(rel.universe)
    index = {o: k for k, o in enumerate(nodes)}
    m = np.zeros((len(nodes), len(nodes)), dtype=bool)
    for a, b in rel.edges:
        m[index[a], index[b]] = True
    m = close_matrix(m)
    src, dst = np.nonzero(m)
    return Relation(rel.universe, frozenset((nodes[a], nodes[b]) for a, b in zip(src, dst)))


def find_cycle(rel: Relation) -> tuple[int, ...] | None:
    """Return one cycle as ``(o1, ..., ok)`` with ``ok -> o1`` closing it, or None."""
    for a, b in rel.edges:
        if a == b:
            return (a,)
    preds: dict[int, set[int]] = {o: set() for o in rel.universe}
    for a, b in rel.edges:
        preds[b].add(a)
    try:
        tuple(graphlib.TopologicalSorter(preds).static_order())
    except graphlib.CycleError as exc:
        # graphlib repeats the first node at the end
        return tuple(exc.args[1][:-1])
    return None


def is_acyclic(rel: Relation) -> bool:
    return find_cycle(rel) is None


def linear_extensions(nodes: Sequence[int], edges: Iterable[Edge]) -> Iterator[tuple[int, ...]]:
    """All total orders of ``nodes`` containing ``edges``, ascending lexicographically."""
    nodes = sorted(nodes)
    preds = {o: set() for o in nodes}
    for a, b in edges:
        if a in preds and b in preds:
            preds[b].add(a)
    placed: list[int] = []
    done: set[int] = set()

    def rec():
        if len(placed) == len(nodes):
            yield tuple(placed)
            return
        for o in nodes:
            if o not in done and preds[o] <= done:
                placed.append(o)
                done.add(o)
                yield from rec()
                done.remove(o)
                placed.pop()

    yield from rec()


# -- filters ---------------------------------------------------------------

Predicate = Callable[["Operation"], bool]


@dataclass(frozen=True)
class ByProcess:
    process: int

    def __call__(self, op: Operation) -> bool:
        return op.process == self.process


@dataclass(frozen=True)
class ByVariable:
    variable: str

    def __call__(self, op: Operation) -> bool:
        return op.variable == self.variable


@dataclass(frozen=True)
class WritesOnly:
    def __call__(self, op: Operation) -> bool:
        return op.is_write


@dataclass(frozen=True)
class ReadsOnly:
    def __call__(self, op: Operation) -> bool:
        return op.is_read


@dataclass(frozen=True)
class WriteByProcess:
    process: int

    def __call__(self, op: Operation) -> bool:
        return op.is_write and op.process == self.process


@dataclass(frozen=True)
class WriteOnVariable:
    variable: str

    def __call__(self, op: Operation) -> bool:
        return op.is_write and op.variable == self.variable


@dataclass(frozen=True)
class FilterSpec:
    """Disjunction of atoms, applied pointwise to each endpoint.

    ``FilterSpec.of(ByProcess(1), WritesOnly())`` is the ``(i, w)`` filter:
    an operation is kept when it is by process 1 or is a write.
    """

    atoms: tuple[Predicate, ...]

    @classmethod
    def of(cls, *atoms: Predicate) -> FilterSpec:
        return cls(tuple(atoms))

    def __call__(self, op: Operation) -> bool:
        return any(atom(op) for atom in self.atoms)


def process_or_writes(i: int) -> FilterSpec:
    return FilterSpec.of(ByProcess(i), WritesOnly())


def process_or_writes_on(i: int, v: str) -> FilterSpec:
    return FilterSpec.of(ByProcess(i), WriteOnVariable(v))


def filter_relation(rel: Relation, spec: Predicate, exec: Execution) -> Relation:
    """Keep the pairs whose two endpoints both satisfy ``spec``.

    The result is not re-closed.
    """
    keep = frozenset(o for o in rel.universe if spec(exec.ops[o]))
    return Relation(keep, frozenset((a, b) for a, b in rel.edges if a in keep and b in keep))


def filter_sequence(seq: Iterable[int], spec: Predicate, exec: Execution) -> tuple[int, ...]:
    return tuple(o for o in seq if spec(exec.ops[o]))
