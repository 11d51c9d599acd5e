"""Operations, executions and execution validity."""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .relation import Relation, find_cycle

NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


class Kind(str, Enum):
    WRITE = "w"
    READ = "r"
    ACQUIRE = "acq"
    RELEASE = "rel"


@dataclass(frozen=True)
class Operation:
    kind: Kind
    process: int
    variable: str
    value: int | None = None

    @property
    def is_write(self) -> bool:
        return self.kind is Kind.WRITE

    @property
    def is_read(self) -> bool:
        return self.kind is Kind.READ

    @property
    def is_sync(self) -> bool:
        return self.kind in (Kind.ACQUIRE, Kind.RELEASE)

    def __str__(self) -> str:
        if self.is_sync:
            return f"{self.kind.value}({self.process},{self.variable})"
        return f"{self.kind.value}({self.process},{self.variable},{self.value})"


@dataclass(frozen=True)
class Step:
    """An operation as written in a process line, before ids are assigned."""

    kind: Kind
    variable: str
    value: int | None = None

    def __str__(self) -> str:
        if self.value is None:
            return f"{self.kind.value} {self.variable}"
        return f"{self.kind.value} {self.variable} {self.value}"


def w(variable: str, value: int) -> Step:
    return Step(Kind.WRITE, variable, value)


def r(variable: str, value: int) -> Step:
    return Step(Kind.READ, variable, value)


def acq(svar: str) -> Step:
    return Step(Kind.ACQUIRE, svar)


def rel(svar: str) -> Step:
    return Step(Kind.RELEASE, svar)


@dataclass
class RawTrace:
    """Unvalidated trace data, as parsed or built by hand."""

    processes: dict[int, list[Step]] = field(default_factory=dict)
    syncorder: dict[str, list[int]] = field(default_factory=dict)
    bindings: dict[str, set[str]] = field(default_factory=dict)
    variables: set[str] = field(default_factory=set)
    sync_variables: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class ValidationError:
    kind: str
    message: str
    ops: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class InvalidExecution(ValueError):
    def __init__(self, errors: Sequence[ValidationError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class Execution:
    """A validated trace. Operation ids are the indices into ``ops``."""

    ops: tuple[Operation, ...]
    processes: Mapping[int, tuple[int, ...]]
    sync_acq_order: Mapping[str, tuple[int, ...]]
    bindings: Mapping[str, frozenset[str]]
    variables: frozenset[str]
    sync_variables: frozenset[str]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __len__(self) -> int:
        return len(self.ops)

    def __hash__(self) -> int:
        return hash(self.ops)

    @property
    def ids(self) -> range:
        return range(len(self.ops))

    @property
    def has_sync(self) -> bool:
        return any(op.is_sync for op in self.ops)

    def writes(self, variable: str | None = None) -> list[int]:
        return [o for o, op in enumerate(self.ops)
                if op.is_write and (variable is None or op.variable == variable)]

    def reads(self) -> list[int]:
        return [o for o, op in enumerate(self.ops) if op.is_read]

    def writer_of(self, read: int) -> int:
        """The unique write a read takes its value from."""
        return self._writer_index()[read]

    def readers_of(self, write: int) -> list[int]:
        return [rd for rd, wr in self._writer_index().items() if wr == write]

    def _writer_index(self) -> dict[int, int]:
        if "writer" not in self._cache:
            by_value = {(op.variable, op.value): o for o, op in enumerate(self.ops) if op.is_write}
            self._cache["writer"] = {
                o: by_value[(op.variable, op.value)] for o, op in enumerate(self.ops) if op.is_read
            }
        return self._cache["writer"]

    def critical_sections(self, svar: str) -> list[tuple[int, int]]:
        """``(acquire, release)`` id pairs on ``svar`` in acquisition order."""
        return _critical_sections(self.ops, self.processes, svar, self.sync_acq_order.get(svar, ()))

    def describe(self, o: int) -> str:
        return str(self.ops[o])


def _critical_sections(ops, processes, svar, order) -> list[tuple[int, int]]:
    per_proc: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for pid, seq in processes.items():
        pending = None
        for o in seq:
            op = ops[o]
            if op.variable != svar or not op.is_sync:
                continue
            if op.kind is Kind.ACQUIRE:
                pending = o
            elif pending is not None:
                per_proc[pid].append((pending, o))
                pending = None
    taken: Counter = Counter()
    sections = []
    for pid in order:
        sections.append(per_proc[pid][taken[pid]])
        taken[pid] += 1
    return sections


def _check_step(pid: int, step: Step) -> None:
    if not isinstance(pid, int) or pid < 0:
        raise ValueError(f"process id must be a natural number, got {pid!r}")
    if not NAME_RE.match(step.variable):
        raise ValueError(f"bad variable name {step.variable!r}")
    if step.kind in (Kind.WRITE, Kind.READ):
        if not isinstance(step.value, int) or step.value < 0:
            raise ValueError(f"{step} needs a natural value")
    elif step.value is not None:
        raise ValueError(f"{step} takes no value")


def validate(raw: RawTrace) -> Execution:
    """Check a raw trace against the validity rules and build its Execution.

    Raises :class:`InvalidExecution` listing every violated rule.
    """
    ops: list[Operation] = []
    processes: dict[int, tuple[int, ...]] = {}
    for pid in sorted(raw.processes):
        ids = []
        for step in raw.processes[pid]:
            _check_step(pid, step)
            ids.append(len(ops))
            ops.append(Operation(step.kind, pid, step.variable, step.value))
        processes[pid] = tuple(ids)

    errors: list[ValidationError] = []

    ordinary = {op.variable for op in ops if not op.is_sync} | set(raw.variables)
    ordinary |= {v for vs in raw.bindings.values() for v in vs}
    sync = {op.variable for op in ops if op.is_sync} | set(raw.sync_variables)
    sync |= set(raw.syncorder) | set(raw.bindings)
    for name in sorted(ordinary & sync):
        errors.append(ValidationError("NamespaceClash", f"{name} used as both ordinary and sync variable"))

    writes: dict[tuple[str, int], list[int]] = defaultdict(list)
    for o, op in enumerate(ops):
        if op.is_write:
            writes[(op.variable, op.value)].append(o)
    for (v, a), ids in sorted(writes.items()):
        if len(ids) > 1:
            errors.append(ValidationError("DuplicateWriteValue", f"value {a} written to {v} {len(ids)} times", tuple(ids)))
    for o, op in enumerate(ops):
        if op.is_read and (op.variable, op.value) not in writes:
            errors.append(ValidationError("DanglingRead", f"{op} has no matching write", (o,)))

    sync_ok = True
    acquires: dict[str, Counter] = defaultdict(Counter)
    for pid, seq in processes.items():
        holding: dict[str, bool] = {}
        for o in seq:
            op = ops[o]
            if not op.is_sync:
                continue
            held = holding.get(op.variable, False)
            if (op.kind is Kind.ACQUIRE) == held:
                errors.append(ValidationError("SyncAlternationViolation", f"process {pid} on {op.variable}: unexpected {op}", (o,)))
                sync_ok = False
                break
            holding[op.variable] = not held
            if op.kind is Kind.ACQUIRE:
                acquires[op.variable][pid] += 1
        else:
            for s, held in sorted(holding.items()):
                if held:
                    errors.append(ValidationError("SyncAlternationViolation", f"process {pid} never releases {s}"))
                    sync_ok = False
    for s in sorted(set(acquires) | set(raw.syncorder)):
        if Counter(raw.syncorder.get(s, [])) != acquires.get(s, Counter()):
            errors.append(ValidationError("SyncOrderMismatch", f"syncorder for {s} does not match its acquires"))
            sync_ok = False

    execution = Execution(
        ops=tuple(ops),
        processes=processes,
        sync_acq_order={s: tuple(order) for s, order in sorted(raw.syncorder.items())},
        bindings={s: frozenset(vs) for s, vs in sorted(raw.bindings.items())},
        variables=frozenset(ordinary),
        sync_variables=frozenset(sync),
    )

    if not errors and sync_ok:
        edges = set()
        for seq in processes.values():
            edges.update(zip(seq, seq[1:]))
        edges |= writes_to(execution).edges
        for s in execution.sync_acq_order:
            chain = [o for pair in execution.critical_sections(s) for o in pair]
            edges.update(zip(chain, chain[1:]))
        cycle = find_cycle(Relation(frozenset(range(len(ops))), frozenset(edges)))
        if cycle is not None:
            blocked = tuple(o for o in cycle if ops[o].is_read)
            errors.append(ValidationError(
                "NoValidInterleaving",
                "no interleaving lets " + ", ".join(str(ops[o]) for o in blocked or cycle) + " follow its write",
                blocked or cycle,
            ))

    if errors:
        raise InvalidExecution(errors)
    return execution


def build(processes: Mapping[int, Iterable[Step]], syncorder: Mapping[str, Iterable[int]] | None = None,
          bindings: Mapping[str, Iterable[str]] | None = None) -> Execution:
    """Shorthand for ``validate(RawTrace(...))``."""
    return validate(RawTrace(
        processes={pid: list(steps) for pid, steps in processes.items()},
        syncorder={s: list(order) for s, order in (syncorder or {}).items()},
        bindings={s: set(vs) for s, vs in (bindings or {}).items()},
    ))


def writes_to(exec: Execution) -> Relation:
    """Write-to-read edges plus release-to-next-acquire edges per sync variable."""
    if "writes_to" in exec._cache:
        return exec._cache["writes_to"]
    edges = {(exec.writer_of(o), o) for o in exec.reads()}
    for s in exec.sync_acq_order:
        sections = exec.critical_sections(s)
        edges.update((prev[1], nxt[0]) for prev, nxt in zip(sections, sections[1:]))
    result = Relation(frozenset(exec.ids), frozenset(edges))
    exec._cache["writes_to"] = result
    return result


@dataclass(frozen=True)
class Witness:
    order: tuple[int, ...]

    def render(self, exec: Execution) -> str:
        return " ".join(exec.describe(o) for o in self.order)

    def contains(self, rel: Relation) -> bool:
        pos = {o: k for k, o in enumerate(self.order)}
        return all(pos[a] < pos[b] for a, b in rel.edges)

    def __iter__(self):
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)
