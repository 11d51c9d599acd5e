from __future__ import annotations

import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from memconsist.orders import causal_relation, process_order
from memconsist.relation import (
    ByProcess,
    ByVariable,
    FilterSpec,
    ReadsOnly,
    Relation,
    WritesOnly,
    filter_relation,
    filter_sequence,
    find_cycle,
    is_acyclic,
    linear_extensions,
    process_or_writes,
    transitive_closure,
    union,
)
from conftest import op_ids, small_executions


def edge_sets(n=6):
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    return st.sets(st.sampled_from(pairs), max_size=12).map(lambda es: Relation.of(range(n), es))


def _reachable(rel: Relation, a: int, b: int) -> bool:
    seen, todo = set(), [a]
    while todo:
        x = todo.pop()
        for y in rel.successors(x):
            if y == b:
                return True
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return False


def test_closure_chain():
    assert transitive_closure(Relation.of(range(3), [(0, 1), (1, 2)])).edges == {(0, 1), (1, 2), (0, 2)}


def test_union_of_disjoint():
    a, b = Relation.of(range(2), [(0, 1)]), Relation.of(range(2, 4), [(2, 3)])
    u = union(a, b)
    assert u.edges == {(0, 1), (2, 3)} and u.universe == set(range(4))
    assert (a | b) == u


def test_edges_must_stay_in_universe():
    try:
        Relation.of([0], [(0, 1)])
    except ValueError:
        return
    raise AssertionError("edge outside the universe accepted")


def test_find_cycle_direction():
    cyc = find_cycle(Relation.of(range(4), [(0, 1), (1, 2), (2, 0), (2, 3)]))
    assert set(cyc) == {0, 1, 2}
    k = len(cyc)
    rel = {(0, 1), (1, 2), (2, 0)}
    assert all((cyc[i], cyc[(i + 1) % k]) in rel for i in range(k))


def test_self_loop_is_a_cycle():
    assert find_cycle(Relation.of([0], [(0, 0)])) == (0,)


@settings(max_examples=150, deadline=None)
@given(edge_sets())
def test_closure_is_reachability(rel):
    closed = transitive_closure(rel)
    for a, b in itertools.product(range(6), repeat=2):
        assert ((a, b) in closed) == _reachable(rel, a, b)
    assert transitive_closure(closed) == closed


@settings(max_examples=150, deadline=None)
@given(edge_sets())
def test_acyclic_iff_closure_irreflexive(rel):
    closed = transitive_closure(rel)
    assert is_acyclic(rel) == all((a, a) not in closed for a in range(6))
    cyc = find_cycle(rel)
    if cyc is not None:
        assert all((cyc[i], cyc[(i + 1) % len(cyc)]) in rel for i in range(len(cyc)))


def test_linear_extensions_count_and_order():
    exts = list(linear_extensions([0, 1, 2], [(0, 2)]))
    assert exts == [(0, 1, 2), (0, 2, 1), (1, 0, 2)]
    assert len(list(linear_extensions(range(4), []))) == 24


def test_fig4_cr_filtered_by_process_1(figs):
    e = figs["fig4-causal"]
    got = filter_relation(causal_relation(e), process_or_writes(1), e)
    kept = op_ids(e, "w(1,x,1) r(1,x,2) w(2,x,2)")
    assert got.universe == set(kept)
    assert got.edges == {op_ids(e, "w(1,x,1) r(1,x,2)"), op_ids(e, "w(2,x,2) r(1,x,2)")}


def test_fig5_po_filtered_by_process_3(figs):
    e = figs["fig5-pram"]
    got = filter_relation(process_order(e), process_or_writes(3), e)
    assert got.universe == set(op_ids(e, "w(1,x,1) w(2,x,2) r(3,x,2) r(3,x,1)"))
    assert got.edges == {op_ids(e, "r(3,x,2) r(3,x,1)")}


def test_filter_always_true_is_identity(figs):
    e = figs["fig-slow"]
    po = process_order(e)
    assert filter_relation(po, FilterSpec.of(WritesOnly(), ReadsOnly()), e) == po


def test_filter_sequence():
    from memconsist.tracefmt import loads

    e = loads("process 1: w x 1 ; w y 2\nprocess 2: r x 1\n")
    assert filter_sequence([0, 1, 2], ByVariable("x"), e) == (0, 2)


@settings(max_examples=100, deadline=None)
@given(small_executions(max_ops=7), st.integers(1, 3), st.sampled_from(["x", "y", "z"]))
def test_filter_composition_and_monotonicity(e, pid, var):
    cr = causal_relation(e)
    po = process_order(e)
    c1, c2 = FilterSpec.of(ByProcess(pid), WritesOnly()), FilterSpec.of(ByVariable(var))
    both = filter_relation(filter_relation(cr, c1, e), c2, e)
    direct = filter_relation(cr, lambda op: c1(op) and c2(op), e)
    assert both.edges == direct.edges and both.universe == direct.universe
    assert filter_relation(po, c1, e) <= filter_relation(cr, c1, e)
