from __future__ import annotations

import pytest
from hypothesis import given, settings

from memconsist.trace import InvalidExecution, Kind
from memconsist.tracefmt import (
    ALIASES,
    FIXTURE_NAMES,
    HEADER,
    ParseError,
    fixture_text,
    fixtures,
    load,
    loads,
    parse,
    render,
)
from conftest import SYNC_TRACES, small_executions


def test_fig2_document():
    doc = parse(fixture_text("fig2-sequential"))
    assert len(doc.processes) == 2
    assert sum(len(s) for s in doc.processes.values()) == 4


def test_empty_file():
    doc = parse("")
    assert not doc.processes and not doc.syncorder


def test_missing_value_is_token_3():
    with pytest.raises(ParseError) as info:
        parse("process 1: w x")
    assert info.value.token == 3
    assert info.value.line == 1


@pytest.mark.parametrize("text,line", [
    ("process 1: w x 1\nprocess 1: r x 1\n", 2),
    ("syncorder s: 1\nsyncorder s: 1\n", 2),
    ("frobnicate x\n", 1),
    ("process 1: q x 1\n", 1),
    ("process a: w x 1\n", 1),
    ("process 1: w x -1\n", 1),
    ("process 1: w 9x 1\n", 1),
    ("process 1: w x 1 2\n", 1),
    ("process 1: acq\n", 1),
    ("process 1 w x 1\n", 1),
    ("process 1: w x 1 ;; r x 1\n", 1),
])
def test_syntax_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.line == line
    assert info.value.column >= 1


def test_column_points_at_offender():
    with pytest.raises(ParseError) as info:
        parse("process 1: w x 1 ; r y z\n")
    assert info.value.column == len("process 1: w x 1 ; r y ") + 1
    assert info.value.token == 3


def test_comments_kept():
    doc = parse("# hello\nprocess 1: w x 1  # trailing\n")
    assert doc.comments == ["hello", "trailing"]
    assert doc.processes[1][0].kind is Kind.WRITE


def test_declarations_and_bindings():
    doc = parse("vars x y\nsync s t\nbind s : x\nprocess 1: acq s ; w x 1 ; rel s\nsyncorder s: 1\n")
    assert doc.variables == {"x", "y"} and doc.sync_variables == {"s", "t"}
    assert doc.bindings == {"s": {"x"}}
    assert doc.syncorder == {"s": [1]}


def test_validation_is_separate():
    parse("process 1: r x 1\n")
    with pytest.raises(InvalidExecution):
        loads("process 1: r x 1\n")


def test_render_fig2():
    assert render(fixtures()["fig2-sequential"]) == (
        f"{HEADER}\nprocess 1: w x 1 ; r x 1\nprocess 2: w x 2 ; r x 1\n"
    )


def test_render_empty():
    assert render(loads("")) == HEADER + "\n"


def test_render_sync_has_bind_and_syncorder():
    text = render(loads(SYNC_TRACES["bound-handoff"]))
    assert "bind s : x\n" in text and "syncorder s: 1 2\n" in text
    assert "\r" not in text


def test_render_keeps_unused_declarations():
    e = loads("vars x y\nprocess 1: w x 1\n")
    assert "vars x y" in render(e)
    assert loads(render(e)) == e


def test_fixture_set():
    figs = fixtures()
    assert set(figs) == set(FIXTURE_NAMES) | set(ALIASES)
    assert figs["fig4-causal"] is figs["fig3-nonsequential"]


def test_fig_slow_ops():
    e = fixtures()["fig-slow"]
    assert len(e) == 7
    assert " ".join(str(op) for op in e.ops) == \
        "w(1,x,1) w(1,x,2) w(1,y,3) r(1,y,4) w(2,y,4) r(2,y,3) r(2,x,1)"


def test_fig_causal_cache_ops():
    e = fixtures()["fig-causal-cache"]
    assert " ".join(str(op) for op in e.ops) == "r(1,y,2) r(1,x,3) w(2,x,1) w(2,y,2) w(3,x,3) r(3,x,1)"


def test_load_fixture_and_file(tmp_path):
    assert load("@fig2-sequential") == fixtures()["fig2-sequential"]
    path = tmp_path / "t.mem"
    path.write_text("process 1: w x 1\n")
    assert len(load(path)) == 1
    with pytest.raises(KeyError):
        load("@nope")


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_round_trip(name):
    e = fixtures()[name]
    assert loads(render(e)) == e
    assert render(loads(render(e))) == render(e)


@settings(max_examples=200, deadline=None)
@given(small_executions(max_ops=8, sync_vars=2))
def test_round_trip(e):
    assert loads(render(e)) == e
