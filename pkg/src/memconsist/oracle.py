"""Independent oracles, a random trace generator and the fuzzing harness.

Nothing here calls into :mod:`memconsist.linearizer`'s search: the
brute-force linearizer enumerates permutations directly, so agreement
between the two is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .linearizer import LinearizeResult, SearchExhausted, Status, co_precheck, linearize
from .models import (
    ORDINARY,
    SYNCHRONIZED,
    CheckOptions,
    Classification,
    ModelId,
    check_processor,
    classify,
    model_relations,
)
from .orders import process_order
from .relation import Relation
from .trace import Execution, RawTrace, Step, Witness, acq, r, rel, validate, w, writes_to
from .tracefmt import render

MAX_BRUTE_OPS = 10


class TooLarge(ValueError):
    pass


def _consistent_orders(exec: Execution, rel: Relation) -> Iterable[tuple[int, ...]]:
    """Consistent permutations containing ``rel``, in lexicographic order.

    Prefixes are cut as soon as they place an operation before one of its
    ``rel`` predecessors or let a read see the wrong value.
    """
    n = len(exec)
    if n > MAX_BRUTE_OPS:
        raise TooLarge(f"{n} operations; brute force is limited to {MAX_BRUTE_OPS}")
    ops = exec.ops
    preds = {o: {a for a, b in rel.edges if b == o} for o in range(n)}
    source = {o: exec.writer_of(o) for o in range(n) if ops[o].is_read}
    sections = {s: [o for pair in exec.critical_sections(s) for o in pair] for s in exec.sync_variables}
    prefix: list[int] = []
    placed: set[int] = set()
    last: dict[str, int] = {}
    sync_pos: dict[str, int] = {s: 0 for s in sections}

    def rec():
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for o in range(n):
            if o in placed or not preds[o] <= placed:
                continue
            op = ops[o]
            if op.is_read and last.get(op.variable) != source[o]:
                continue
            if op.is_sync and sections[op.variable][sync_pos[op.variable]] != o:
                continue
            saved = last.get(op.variable)
            if op.is_write:
                last[op.variable] = o
            if op.is_sync:
                sync_pos[op.variable] += 1
            prefix.append(o)
            placed.add(o)
            yield from rec()
            placed.discard(o)
            prefix.pop()
            if op.is_sync:
                sync_pos[op.variable] -= 1
            if op.is_write:
                if saved is None:
                    del last[op.variable]
                else:
                    last[op.variable] = saved

    yield from rec()


def brute_force_linearize(exec: Execution, rel: Relation) -> LinearizeResult:
    for order in _consistent_orders(exec, rel):
        return LinearizeResult(Status.LINEARIZABLE, Witness(order))
    return LinearizeResult(Status.NOT_LINEARIZABLE, refutation=SearchExhausted())


def brute_force_processor(exec: Execution, opts: CheckOptions = CheckOptions()) -> bool:
    """Processor consistency straight from the pairwise-agreement definition."""
    views = model_relations(exec, ModelId.PROCESSOR, opts)
    variables = sorted(exec.variables)
    common: set | None = None
    for view in views.values():
        projections = {
            tuple(tuple(o for o in order if exec.ops[o].is_write and exec.ops[o].variable == v) for v in variables)
            for order in _consistent_orders(exec, view)
        }
        common = projections if common is None else common & projections
        if not common:
            return False
    return True


# -- generator ---------------------------------------------------------------

VARIABLE_NAMES = "xyzuvabcdefgh"
SYNC_NAMES = "stlmnk"


@dataclass(frozen=True)
class GenParams:
    procs: int = 2
    vars: int = 1
    ops: int = 4
    read_ratio: float = 0.5
    sync_vars: int = 0
    seed: int = 0


def generate(params: GenParams) -> Execution:
    """A pseudorandom valid execution.

    Operations are emitted along a hidden global interleaving; a read copies
    the value of some write already emitted on its variable, so the
    interleaving itself proves validity.  ``ops`` counts ordinary accesses;
    acquire/release pairs come on top.
    """
    if params.ops and params.procs < 1:
        raise ValueError("need at least one process")
    if params.ops and params.vars < 1:
        raise ValueError("need at least one variable")
    rng = random.Random(params.seed)
    names = VARIABLE_NAMES[: params.vars]
    svars = SYNC_NAMES[: params.sync_vars]
    steps: dict[int, list[Step]] = {}
    written: dict[str, list[int]] = {v: [] for v in names}
    owner: dict[str, int | None] = {s: None for s in svars}
    syncorder: dict[str, list[int]] = {s: [] for s in svars}
    counter = 0
    emitted = 0
    while emitted < params.ops:
        pid = rng.randrange(params.procs) + 1
        seq = steps.setdefault(pid, [])
        if svars and rng.random() < 0.3:
            held = [s for s in svars if owner[s] == pid]
            free = [s for s in svars if owner[s] is None]
            if held and (not free or rng.random() < 0.5):
                s = rng.choice(held)
                seq.append(rel(s))
                owner[s] = None
            elif free:
                s = rng.choice(free)
                seq.append(acq(s))
                owner[s] = pid
                syncorder[s].append(pid)
            continue
        readable = [v for v in names if written[v]]
        if readable and rng.random() < params.read_ratio:
            v = rng.choice(readable)
            seq.append(r(v, rng.choice(written[v])))
        else:
            v = rng.choice(names)
            counter += 1
            written[v].append(counter)
            seq.append(w(v, counter))
        emitted += 1
    for s in svars:
        if owner[s] is not None:
            steps[owner[s]].append(rel(s))
    return validate(RawTrace(
        processes={p: s for p, s in steps.items() if s},
        syncorder={s: o for s, o in syncorder.items() if o},
    ))


def random_params(seed: int, max_ops: int = 8, max_procs: int = 3, max_vars: int = 3, sync_vars: int = 0) -> GenParams:
    rng = random.Random(seed * 7919 + 17)
    return GenParams(
        procs=rng.randint(1, max_procs),
        vars=rng.randint(1, max_vars),
        ops=rng.randint(0, max_ops) if max_ops else 0,
        read_ratio=rng.choice((0.3, 0.5, 0.6)),
        sync_vars=sync_vars,
        seed=seed,
    )


# -- implication matrix ------------------------------------------------------

IMPLICATIONS: tuple[tuple[ModelId, ModelId], ...] = (
    *((ModelId.SEQUENTIAL, m) for m in (ModelId.CAUSAL, ModelId.PRAM, ModelId.CACHE, ModelId.PROCESSOR, ModelId.SLOW)),
    (ModelId.CAUSAL, ModelId.PRAM),
    (ModelId.PROCESSOR, ModelId.PRAM),
    (ModelId.PROCESSOR, ModelId.CACHE),
    (ModelId.PRAM, ModelId.SLOW),
    (ModelId.CACHE, ModelId.SLOW),
)


@dataclass(frozen=True)
class Violation:
    index: int
    premise: ModelId
    conclusion: ModelId
    trace: str

    def __str__(self) -> str:
        return f"trace #{self.index}: {self.premise.value} holds but {self.conclusion.value} fails"


def check_implication_matrix(execs: Iterable[Execution],
                             classifier: Callable[[Execution], Classification] | None = None) -> list[Violation]:
    classifier = classifier or (lambda e: classify(e, models=ORDINARY))
    out = []
    for k, exec in enumerate(execs):
        holds = classifier(exec).holds()
        for premise, conclusion in IMPLICATIONS:
            if holds.get(premise) is True and holds.get(conclusion) is False:
                out.append(Violation(k, premise, conclusion, render(exec)))
    return out


def oracle_mismatches(exec: Execution, opts: CheckOptions = CheckOptions(),
                      models: Sequence[ModelId] = tuple(ModelId)) -> list[str]:
    """Instances where :func:`linearize` and the brute force disagree.

    Also compares the witnesses, which must coincide since both return the
    lexicographically smallest consistent extension.
    """
    out = []
    for model in models:
        if model is ModelId.PROCESSOR:
            fast, slow = check_processor(exec, opts).holds, brute_force_processor(exec, opts)
            if fast != slow:
                out.append(f"processor: linearizer {fast}, brute force {slow}")
            continue
        for key, relation in model_relations(exec, model, opts).items():
            fast, slow = linearize(exec, relation, opts.budget), brute_force_linearize(exec, relation)
            if fast.status != slow.status or fast.witness != slow.witness:
                out.append(f"{model.value}[{key}]: linearizer {fast.status.value}, brute force {slow.status.value}")
    return out


# -- fuzzing -----------------------------------------------------------------

@dataclass
class FuzzReport:
    files: list[Path] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    mismatches: list[str] = field(default_factory=list)
    necessary_condition: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.violations or self.mismatches or self.necessary_condition)


def fuzz(seeds: Iterable[int], *, max_ops: int = 8, max_procs: int = 3, max_vars: int = 3, sync_vars: int = 0,
         out_dir: Path | None = None, compare: bool = True,
         classifier: Callable[[Execution], Classification] | None = None) -> FuzzReport:
    """Generate traces, check the implication matrix, the oracle and the CO necessary condition.

    With ``out_dir`` each trace is written as ``seed-NNNNN.mem`` and a
    ``manifest.json`` maps seed to file name and classification.
    """
    classifier = classifier or (lambda e: classify(e, models=ORDINARY + (SYNCHRONIZED if sync_vars else ())))
    report = FuzzReport()
    manifest = []
    for k, seed in enumerate(seeds):
        exec = generate(random_params(seed, max_ops, max_procs, max_vars, sync_vars))
        result = classifier(exec)
        report.violations += [Violation(seed, v.premise, v.conclusion, v.trace)
                              for v in check_implication_matrix([exec], classifier=lambda _e: result)]
        if compare and len(exec) <= MAX_BRUTE_OPS:
            report.mismatches += [f"seed {seed}: {m}" for m in oracle_mismatches(exec, models=tuple(result.verdicts))]
        for model, verdict in result.verdicts.items():
            for key, relation in verdict.relations.items():
                if key in verdict.witnesses and not co_precheck(exec, relation).acyclic:
                    report.necessary_condition.append(f"seed {seed}: {model.value}[{key}] linearizable with cyclic CO")
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / f"seed-{seed:05d}.mem"
            path.write_text(render(exec), encoding="utf-8")
            report.files.append(path)
            manifest.append({"seed": seed, "file": path.name,
                             "classification": {m.value: v for m, v in result.holds().items()}})
    if out_dir is not None:
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return report


# -- acyclic-CO counterexample search -----------------------------------------
#
# Triplet t owns abstract nodes 3t (w), 3t+1 (r) and 3t+2 (w').  In any
# consistent sequence w' lands either before w or after r, so each triplet has
# two states and a sequence exists only if some state assignment leaves the
# causal graph plus the state edges acyclic.  A pair of links between two
# triplets can close a cycle in exactly one pair of states: a 2-SAT clause.
# The search enumerates clause sets that leave no assignment, then looks for
# links realizing them without ordering any triplet internally.

_STATE_ORDER = {0: (2, 0, 1), 1: (0, 1, 2)}


@dataclass(frozen=True)
class TripletSearchParams:
    """Bounds for :func:`find_acyclic_co_nonsequential`.

    Each variable contributes a triplet ``w -> r`` plus an unread ``w'``.
    Causal paths between triplet operations are free: each one is a *link*,
    realized by a fresh write/read pair in between, so an execution found
    has ``3 * len(variables) + 2 * links`` operations.
    """

    variables: tuple[str, ...] = ("x", "a", "b", "c", "d")
    max_links: int = 12


@dataclass
class TripletSearchReport:
    execution: Execution | None
    links: list[tuple[str, str]]
    formulas: int
    candidates: int
    params: TripletSearchParams

    @property
    def found(self) -> bool:
        return self.execution is not None


def _triplet_names(variables: Sequence[str]) -> list[str]:
    return [f"{kind}{v}" for v in variables for kind in ("w", "r", "w'")]


def _reach(adj: list[int]) -> list[int]:
    m = list(adj)
    for k in range(len(m)):
        bit, row = 1 << k, m[k]
        for i in range(len(m)):
            if m[i] & bit:
                m[i] |= row
    return m


def _first_assignment(k: int, clauses: frozenset) -> tuple[int, ...] | None:
    for c in itertools.product((0, 1), repeat=k):
        if not any(c[s] == a and c[t] == b for s, a, t, b in clauses):
            return c
    return None


def _unsatisfiable_clause_sets(k: int, size: int) -> Iterable[frozenset]:
    """Clause sets of exactly ``size`` clauses that no assignment survives.

    Every such set contains a clause killing the first surviving assignment
    of any subset, so branching on those clauses alone is complete.
    """
    seen: set[frozenset] = set()

    def rec(clauses: frozenset):
        c = _first_assignment(k, clauses)
        if c is None:
            if len(clauses) == size:
                yield clauses
            return
        if len(clauses) == size:
            return
        for s in range(k):
            for t in range(s + 1, k):
                new = clauses | {(s, c[s], t, c[t])}
                if new not in seen:
                    seen.add(new)
                    yield from rec(new)

    yield from rec(frozenset())


def _gadgets(s: int, a: int, t: int, b: int) -> Iterable[tuple[tuple[int, int], tuple[int, int]]]:
    """Link pairs ``s -> t -> s`` that are cyclic exactly when s is in state a and t in state b."""
    sa, tb = _STATE_ORDER[a], _STATE_ORDER[b]
    for i, us in enumerate(sa):
        for vs in sa[: i + 1]:
            for j, ut in enumerate(tb):
                for vt in tb[: j + 1]:
                    yield (3 * s + us, 3 * t + vt), (3 * t + ut, 3 * s + vs)


def _unrelated(k: int, links: Iterable[tuple[int, int]]) -> bool:
    adj = [0] * (3 * k)
    for t in range(k):
        adj[3 * t] |= 1 << (3 * t + 1)
    for a, b in links:
        adj[a] |= 1 << b
    m = _reach(adj)
    if any(m[i] >> i & 1 for i in range(3 * k)):
        return False
    for t in range(k):
        wr, rd, wp = 3 * t, 3 * t + 1, 3 * t + 2
        if m[wr] >> wp & 1 or m[wp] >> wr & 1 or m[rd] >> wp & 1 or m[wp] >> rd & 1:
            return False
    return True


def _realizations(k: int, clauses: frozenset) -> Iterable[frozenset]:
    ordered = sorted(clauses)

    def rec(i: int, links: frozenset):
        if i == len(ordered):
            yield links
            return
        for pair in _gadgets(*ordered[i]):
            new = links | frozenset(pair)
            if _unrelated(k, new):
                yield from rec(i + 1, new)

    yield from rec(0, frozenset())


def realize_links(variables: Sequence[str], links: Iterable[tuple[int, int]]) -> Execution:
    """One process per triplet operation; each link ``u -> v`` is a write after ``u`` read before ``v``."""
    pre: dict[int, list[Step]] = {o: [] for o in range(3 * len(variables))}
    post: dict[int, list[Step]] = {o: [] for o in range(3 * len(variables))}
    for n, (a, b) in enumerate(sorted(links)):
        name = f"l{n}"
        post[a].append(w(name, 1))
        pre[b].append(r(name, 1))
    processes = {}
    for o in range(3 * len(variables)):
        v = variables[o // 3]
        core = (w(v, 1), r(v, 1), w(v, 2))[o % 3]
        processes[o + 1] = pre[o] + [core] + post[o]
    return validate(RawTrace(processes=processes))


def acyclic_co_nonsequential(exec: Execution) -> bool:
    """The property conjunction: acyclic CO of PO with writes-to, not Sequential, Causal and Processor."""
    po = process_order(exec)
    if not co_precheck(exec, po | writes_to(exec)).acyclic:
        return False
    if linearize(exec, po).linearizable is not False:
        return False
    holds = classify(exec, models=(ModelId.CAUSAL, ModelId.PROCESSOR)).holds()
    return holds[ModelId.CAUSAL] is True and holds[ModelId.PROCESSOR] is True


def find_acyclic_co_nonsequential(params: TripletSearchParams = TripletSearchParams()) -> TripletSearchReport:
    """Search for a Causal and Processor, non-Sequential execution with acyclic CO.

    Clause sets are tried smallest first, each realized set of links is
    checked against the real model checkers.  The search is deterministic
    and exhaustive within ``max_links`` for this link-pair shape.
    """
    k = len(params.variables)
    report = TripletSearchReport(None, [], 0, 0, params)
    for size in range(1, params.max_links // 2 + 1):
        for clauses in _unsatisfiable_clause_sets(k, size):
            report.formulas += 1
            for links in _realizations(k, clauses):
                report.candidates += 1
                exec = realize_links(params.variables, links)
                if acyclic_co_nonsequential(exec):
                    names = _triplet_names(params.variables)
                    report.execution = exec
                    report.links = [(names[a], names[b]) for a, b in sorted(links)]
                    return report
    return report
