"""One checker per consistency model.

Every model reduces to linearizing one or more filtered relations: a single
relation for Sequential, one per process for Causal and PRAM, one per
variable for Cache, one per (process, variable) for Slow and the
synchronized models.  Processor additionally requires the per-process
witnesses to agree on the order of the writes to each variable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from . import orders
from .linearizer import (
    DEFAULT_BUDGET,
    COCycle,
    LinearizeResult,
    Refutation,
    SearchExhausted,
    Status,
    co_analysis,
    linearize,
    search_relation,
)
from .relation import (
    ByVariable,
    Relation,
    filter_relation,
    find_cycle,
    linear_extensions,
    process_or_writes,
    process_or_writes_on,
    transitive_closure,
    union,
)
from .trace import Execution, Kind, Witness


class ModelId(str, enum.Enum):
    SEQUENTIAL = "sequential"
    CAUSAL = "causal"
    PRAM = "pram"
    CACHE = "cache"
    PROCESSOR = "processor"
    SLOW = "slow"
    WEAK = "weak"
    RELEASE = "release"
    LAZY_RELEASE = "lazy-release"
    ENTRY = "entry"

    @property
    def synchronized(self) -> bool:
        return self in SYNCHRONIZED


SYNCHRONIZED = (ModelId.WEAK, ModelId.RELEASE, ModelId.LAZY_RELEASE, ModelId.ENTRY)
ORDINARY = tuple(m for m in ModelId if m not in SYNCHRONIZED)


class ProgramOrder(str, enum.Enum):
    STRICT = "strict"
    LAZY = "lazy"


@dataclass(frozen=True)
class CheckOptions:
    program_order_mode: ProgramOrder = ProgramOrder.STRICT
    budget: int = DEFAULT_BUDGET

    @property
    def lazy(self) -> bool:
        return self.program_order_mode is ProgramOrder.LAZY


@dataclass
class Verdict:
    """Result of one model check.

    ``holds`` is None when the search budget ran out before a decision.
    ``witnesses`` maps each quantifier instance (``"all"``, ``"P1"``, ``"x"``,
    ``"P1/x"``) to its consistent linear extension.
    """

    model: ModelId
    holds: bool | None
    witnesses: dict[str, Witness] = field(default_factory=dict)
    failing_instance: str | None = None
    refutation: Refutation | None = None
    write_orders: dict[str, tuple[int, ...]] = field(default_factory=dict)
    extension: bool = False
    warnings: list[str] = field(default_factory=list)
    relations: dict[str, Relation] = field(default_factory=dict, repr=False)


# -- instances ---------------------------------------------------------------

def _po(exec: Execution, opts: CheckOptions) -> Relation:
    return orders.program_order(exec, opts.lazy)


def _pid(i: int) -> str:
    return f"P{i}"


def model_relations(exec: Execution, model: ModelId, opts: CheckOptions = CheckOptions()) -> dict[str, Relation]:
    """The relation(s) a model requires to be consistently linearizable."""
    po = _po(exec, opts)
    procs = sorted(exec.processes)
    variables = sorted(exec.variables)
    if model is ModelId.SEQUENTIAL:
        return {"all": po}
    if model is ModelId.CAUSAL:
        cr = orders.causal_relation(exec, opts.lazy)
        return {_pid(i): filter_relation(cr, process_or_writes(i), exec) for i in procs}
    if model in (ModelId.PRAM, ModelId.PROCESSOR):
        return {_pid(i): filter_relation(po, process_or_writes(i), exec) for i in procs}
    if model is ModelId.CACHE:
        return {v: filter_relation(po, ByVariable(v), exec) for v in variables}
    slow = {f"{_pid(i)}/{v}": filter_relation(po, process_or_writes_on(i, v), exec)
            for i in procs for v in variables}
    if model is ModelId.SLOW:
        return slow
    dminus, dplus = D_RULES[model]
    so = orders.sync_order(exec, dminus, dplus, opts.lazy)
    return {k: transitive_closure(union(so, rel)) for k, rel in slow.items()}


def _check_forall(exec: Execution, model: ModelId, opts: CheckOptions) -> Verdict:
    rels = model_relations(exec, model, opts)
    verdict = Verdict(model, True, extension=opts.lazy, relations=rels)
    unknown = False
    for key, rel in rels.items():
        res = linearize(exec, rel, opts.budget)
        if res.status is Status.LINEARIZABLE:
            verdict.witnesses[key] = res.witness
        elif res.status is Status.NOT_LINEARIZABLE:
            verdict.holds = False
            verdict.failing_instance = key
            verdict.refutation = res.refutation
            verdict.witnesses.clear()
            return verdict
        else:
            unknown = True
    if unknown:
        verdict.holds = None
    return verdict


def check_sequential(exec: Execution, opts: CheckOptions = CheckOptions()) -> Verdict:
    return _check_forall(exec, ModelId.SEQUENTIAL, opts)


def check_causal(exec: Execution, opts: CheckOptions = CheckOptions()) -> Verdict:
    return _check_forall(exec, ModelId.CAUSAL, opts)


def check_pram(exec: Execution, opts: CheckOptions = CheckOptions()) -> Verdict:
    return _check_forall(exec, ModelId.PRAM, opts)


def check_cache(exec: Execution, opts: CheckOptions = CheckOptions()) -> Verdict:
    return _check_forall(exec, ModelId.CACHE, opts)


def check_slow(exec: Execution, opts: CheckOptions = CheckOptions()) -> Verdict:
    return _check_forall(exec, ModelId.SLOW, opts)


# -- processor ---------------------------------------------------------------

def check_processor(exec: Execution, opts: CheckOptions = CheckOptions()) -> Verdict:
    """PRAM views that agree on one total order of the writes to each variable.

    Searches over per-variable write orders, variable by variable, extending
    the write-write edges every view already forces; after each choice every
    view must stay linearizable.
    """
    views = model_relations(exec, ModelId.PROCESSOR, opts)
    verdict = Verdict(ModelId.PROCESSOR, True, extension=opts.lazy, relations=views)
    remaining = opts.budget

    forced: dict[str, set[tuple[int, int]]] = {}
    fixpoints = {}
    for key, rel in views.items():
        analysis = co_analysis(exec, search_relation(exec, rel))
        if not analysis.acyclic:
            verdict.holds = False
            verdict.failing_instance = key
            verdict.refutation = COCycle(analysis.cycle)
            return verdict
        fixpoints[key] = analysis.fixpoint

    variables = sorted(v for v in exec.variables if len(exec.writes(v)) > 1)
    for v in variables:
        ws = exec.writes(v)
        forced[v] = _forced(exec, fixpoints, v)
        cycle = find_cycle(Relation(frozenset(ws), frozenset(forced[v])))
        if cycle is not None:
            verdict.holds = False
            verdict.failing_instance = _disagreeing_views(fixpoints, ws, v)
            verdict.refutation = COCycle(cycle)
            return verdict

    budget = [remaining]
    found, out_of_budget = _agreement(exec, views, variables, forced, budget)
    if found is not None:
        verdict.witnesses = {key: res.witness for key, res in found.items()}
        for v in sorted(exec.variables):
            verdict.write_orders[v] = tuple(o for o in next(iter(found.values())).witness
                                            if exec.ops[o].is_write and exec.ops[o].variable == v)
        return verdict
    if out_of_budget:
        verdict.holds = None
        return verdict
    verdict.holds = False
    verdict.refutation = SearchExhausted()
    verdict.failing_instance = "write-order agreement"
    keys = sorted(views)
    pairs = []
    for a, b in ((a, b) for i, a in enumerate(keys) for b in keys[i + 1:]):
        sub = {a: fixpoints[a], b: fixpoints[b]}
        sub_forced = {v: _forced(exec, sub, v) for v in variables}
        if any(find_cycle(Relation(frozenset(exec.writes(v)), frozenset(f))) for v, f in sub_forced.items()):
            pairs.append(f"{a},{b}")
            continue
        pair, over = _agreement(exec, {a: views[a], b: views[b]}, variables, sub_forced, budget)
        if over:
            break
        if pair is None:
            pairs.append(f"{a},{b}")
    if pairs:
        verdict.failing_instance = " ".join(pairs)
    return verdict


def _forced(exec: Execution, fixpoints, v: str) -> set[tuple[int, int]]:
    ws = exec.writes(v)
    return {(a, b) for a in ws for b in ws if a != b and any(fx[a, b] for fx in fixpoints.values())}


def _agreement(exec: Execution, views: dict[str, Relation], variables: list[str],
               forced: dict[str, set[tuple[int, int]]], budget: list[int]):
    """Search per-variable write orders that every view can linearize with.

    Returns ``(results, out_of_budget)``; ``budget`` is a one-element list
    shared across calls.
    """
    chosen: dict[str, tuple[int, ...]] = {}
    out_of_budget = False

    def views_ok() -> dict[str, LinearizeResult] | None:
        nonlocal out_of_budget
        chain = {(a, b) for order in chosen.values() for a, b in zip(order, order[1:])}
        results = {}
        for key, rel in views.items():
            res = linearize(exec, Relation(rel.universe | frozenset(o for e in chain for o in e),
                                           rel.edges | chain), max(budget[0], 0))
            budget[0] -= res.expansions
            if res.status is Status.BUDGET:
                out_of_budget = True
                return None
            if res.status is Status.NOT_LINEARIZABLE:
                return None
            results[key] = res
        return results

    def search(k: int) -> dict[str, LinearizeResult] | None:
        if out_of_budget:
            return None
        if k == len(variables):
            return views_ok()
        v = variables[k]
        for order in linear_extensions(exec.writes(v), forced[v]):
            chosen[v] = order
            if k + 1 == len(variables) or views_ok() is not None:
                found = search(k + 1)
                if found is not None:
                    return found
            if out_of_budget:
                return None
        chosen.pop(v, None)
        return None

    found = search(0)
    return found, out_of_budget


def _disagreeing_views(fixpoints, ws, v) -> str:
    keys = sorted(fixpoints)
    for a in keys:
        for b in keys:
            if a < b:
                edges = {(x, y) for x in ws for y in ws if x != y and (fixpoints[a][x, y] or fixpoints[b][x, y])}
                if find_cycle(Relation(frozenset(ws), frozenset(edges))) is not None:
                    return f"{a},{b}/{v}"
    return f"all/{v}"


# -- synchronized models -----------------------------------------------------

def _none(exec, o, po):
    return ()


def _on(kind: Kind, rule):
    def d(exec, o, po):
        return rule(exec, o, po) if exec.ops[o].kind is kind else ()
    return d


def _lazy_dminus(exec, o, po):
    if exec.ops[o].kind is not Kind.ACQUIRE:
        return ()
    return {e for r in orders.releases_into(exec, o) for e in orders.before(exec, r, po)}


def _bound(rule):
    def d(exec, o, po):
        bound = exec.bindings.get(exec.ops[o].variable, frozenset())
        return {e for e in rule(exec, o, po) if exec.ops[e].variable in bound}
    return d


D_RULES: dict[ModelId, tuple[orders.DRule, orders.DRule]] = {
    ModelId.WEAK: (orders.before, orders.after),
    ModelId.RELEASE: (_on(Kind.RELEASE, orders.before), _on(Kind.ACQUIRE, orders.after)),
    ModelId.LAZY_RELEASE: (_lazy_dminus, _on(Kind.ACQUIRE, orders.after)),
    ModelId.ENTRY: (_bound(_lazy_dminus), _bound(_on(Kind.ACQUIRE, orders.after))),
}


def check_synchronized(exec: Execution, model: ModelId, opts: CheckOptions = CheckOptions()) -> Verdict:
    if model not in SYNCHRONIZED:
        raise ValueError(f"{model} is not a synchronized model")
    verdict = _check_forall(exec, model, opts)
    if model is ModelId.ENTRY and exec.has_sync and not any(exec.bindings.values()):
        verdict.warnings.append("MissingBindings: no sync variable has bound data; only mutual exclusion is enforced")
    return verdict


CHECKERS: dict[ModelId, Callable[[Execution, CheckOptions], Verdict]] = {
    ModelId.SEQUENTIAL: check_sequential,
    ModelId.CAUSAL: check_causal,
    ModelId.PRAM: check_pram,
    ModelId.CACHE: check_cache,
    ModelId.PROCESSOR: check_processor,
    ModelId.SLOW: check_slow,
}
for _m in SYNCHRONIZED:
    CHECKERS[_m] = lambda exec, opts=CheckOptions(), _m=_m: check_synchronized(exec, _m, opts)


def check(exec: Execution, model: ModelId | str, opts: CheckOptions = CheckOptions()) -> Verdict:
    return CHECKERS[ModelId(model)](exec, opts)


# -- classification ----------------------------------------------------------

CONJUNCTIONS: dict[str, tuple[ModelId, ...]] = {
    "pram+cache": (ModelId.PRAM, ModelId.CACHE),
    "causal+cache": (ModelId.CAUSAL, ModelId.CACHE),
    "causal+pram+cache+processor": (ModelId.CAUSAL, ModelId.PRAM, ModelId.CACHE, ModelId.PROCESSOR),
}


def all_of(values: Iterable[bool | None]) -> bool | None:
    values = list(values)
    if False in values:
        return False
    if None in values:
        return None
    return True


@dataclass
class Classification(Mapping):
    verdicts: dict[ModelId, Verdict]
    conjunctions: dict[str, bool | None]

    def __getitem__(self, model) -> Verdict:
        return self.verdicts[ModelId(model)]

    def __iter__(self):
        return iter(self.verdicts)

    def __len__(self) -> int:
        return len(self.verdicts)

    def holds(self) -> dict[ModelId, bool | None]:
        return {m: v.holds for m, v in self.verdicts.items()}


def classify(exec: Execution, opts: CheckOptions = CheckOptions(),
             models: Iterable[ModelId] = tuple(ModelId)) -> Classification:
    verdicts = {ModelId(m): check(exec, m, opts) for m in models}
    conj = {name: all_of(verdicts[m].holds for m in parts)
            for name, parts in CONJUNCTIONS.items() if all(m in verdicts for m in parts)}
    return Classification(verdicts, conj)
