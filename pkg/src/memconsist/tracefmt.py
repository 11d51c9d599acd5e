"""The ``memtrace v1`` text format.

One directive per line, ``#`` starts a comment::

    vars x y
    sync s
    bind s : x
    process 1: acq s ; w x 1 ; rel s
    process 2: acq s ; r x 1 ; rel s
    syncorder s: 1 2

``render`` produces the canonical form: a header comment, the optional
declarations, process lines sorted by id, then syncorder lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cache
from importlib import resources
from pathlib import Path

from .trace import NAME_RE, Execution, Kind, RawTrace, Step, validate

HEADER = "# memtrace v1"

_NAT_RE = re.compile(r"\d+\Z")
_KINDS = {k.value: k for k in Kind}


class ParseError(ValueError):
    """Syntax error at ``line`` / ``column`` (1-based).

    ``token`` is the 1-based position, within the offending operation or
    directive, of the token that is missing or malformed.
    """

    def __init__(self, line: int, column: int, message: str, token: int | None = None):
        self.line = line
        self.column = column
        self.token = token
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass
class TraceDocument(RawTrace):
    comments: list[str] = field(default_factory=list)


def _tokens(text: str, start: int) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based columns."""
    return [(m.group(), start + m.start() + 1) for m in re.finditer(r"\S+", text)]


def _name(tok: str, line: int, col: int, what: str, index: int | None = None) -> str:
    if not NAME_RE.match(tok):
        raise ParseError(line, col, f"bad {what} name {tok!r}", index)
    return tok


def _nat(tok: str, line: int, col: int, what: str, index: int | None = None) -> int:
    if not _NAT_RE.match(tok):
        raise ParseError(line, col, f"expected a natural {what}, got {tok!r}", index)
    return int(tok)


def _parse_op(toks: list[tuple[str, int]], lineno: int, end_col: int) -> Step:
    kind_tok, col = toks[0]
    kind = _KINDS.get(kind_tok)
    if kind is None:
        raise ParseError(lineno, col, f"unknown operation {kind_tok!r}", 1)
    arity = 3 if kind in (Kind.WRITE, Kind.READ) else 2
    if len(toks) < arity:
        missing = "value" if len(toks) == 2 else "variable"
        raise ParseError(lineno, end_col, f"{kind_tok}: missing {missing}", len(toks) + 1)
    if len(toks) > arity:
        raise ParseError(lineno, toks[arity][1], f"unexpected {toks[arity][0]!r}", arity + 1)
    var = _name(toks[1][0], lineno, toks[1][1], "variable", 2)
    if arity == 2:
        return Step(kind, var)
    return Step(kind, var, _nat(toks[2][0], lineno, toks[2][1], "value", 3))


def _split_head(body: str, lineno: int, offset: int, directive: str) -> tuple[str, str, int]:
    head, sep, rest = body.partition(":")
    if not sep:
        raise ParseError(lineno, offset + len(body) + 1, f"{directive}: expected ':'")
    return head.strip(), rest, offset + len(head) + 1


def parse(text: str) -> TraceDocument:
    """Parse a trace; validity is checked separately by :func:`validate`."""
    doc = TraceDocument()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line, hash_, comment = raw_line.partition("#")
        if hash_:
            doc.comments.append(comment.strip())
        if not line.strip():
            continue
        m = re.match(r"\s*(\S+?)(?=[\s:]|$)", line)
        directive, dcol, body_start = m.group(1), m.start(1) + 1, m.end(1)
        body = line[body_start:]

        if directive == "process":
            head, rest, rest_col = _split_head(body, lineno, body_start, "process")
            pid = _nat(head, lineno, body_start + 1 + body.find(head) if head else body_start + 1, "process id")
            if pid in doc.processes:
                raise ParseError(lineno, dcol, f"duplicate process {pid}")
            steps = []
            if rest.strip():
                pos = rest_col
                for chunk in rest.split(";"):
                    toks = _tokens(chunk, pos)
                    if not toks:
                        raise ParseError(lineno, pos + 1, "empty operation")
                    steps.append(_parse_op(toks, lineno, pos + len(chunk.rstrip()) + 1))
                    pos += len(chunk) + 1
            doc.processes[pid] = steps
        elif directive == "syncorder":
            head, rest, rest_col = _split_head(body, lineno, body_start, "syncorder")
            svar = _name(head, lineno, dcol, "sync variable")
            if svar in doc.syncorder:
                raise ParseError(lineno, dcol, f"duplicate syncorder for {svar}")
            doc.syncorder[svar] = [_nat(t, lineno, c, "process id") for t, c in _tokens(rest, rest_col)]
        elif directive == "bind":
            head, rest, rest_col = _split_head(body, lineno, body_start, "bind")
            svar = _name(head, lineno, body_start + 2, "sync variable")
            doc.bindings.setdefault(svar, set()).update(
                _name(t, lineno, c, "variable") for t, c in _tokens(rest, rest_col))
        elif directive == "vars":
            doc.variables.update(_name(t, lineno, c, "variable") for t, c in _tokens(body, body_start))
        elif directive == "sync":
            doc.sync_variables.update(_name(t, lineno, c, "sync variable") for t, c in _tokens(body, body_start))
        else:
            raise ParseError(lineno, dcol, f"unknown directive {directive!r}", 1)
    return doc


def loads(text: str) -> Execution:
    return validate(parse(text))


def render(exec: Execution) -> str:
    """Canonical text for an execution (LF endings, single spaces)."""
    lines = [HEADER]
    used = {op.variable for op in exec.ops if not op.is_sync}
    used |= {v for vs in exec.bindings.values() for v in vs}
    if exec.variables - used:
        lines.append("vars " + " ".join(sorted(exec.variables)))
    used_sync = {op.variable for op in exec.ops if op.is_sync} | set(exec.bindings) | set(exec.sync_acq_order)
    if exec.sync_variables - used_sync:
        lines.append("sync " + " ".join(sorted(exec.sync_variables)))
    for s in sorted(exec.bindings):
        lines.append(f"bind {s} : " + " ".join(sorted(exec.bindings[s])))
    for pid in sorted(exec.processes):
        ops = [exec.ops[o] for o in exec.processes[pid]]
        body = " ; ".join(str(Step(op.kind, op.variable, op.value)) for op in ops)
        lines.append(f"process {pid}: {body}".rstrip())
    for s in sorted(exec.sync_acq_order):
        lines.append(f"syncorder {s}: " + " ".join(map(str, exec.sync_acq_order[s])))
    return "\n".join(lines) + "\n"


# -- fixtures ----------------------------------------------------------------

FIXTURE_NAMES = (
    "fig2-sequential",
    "fig3-nonsequential",
    "fig5-pram",
    "fig-cache",
    "fig-processor",
    "fig-pram-cache",
    "fig-causal-cache",
    "fig-slow",
    "lazy-po-example",
)
ALIASES = {"fig4-causal": "fig3-nonsequential"}


@cache
def fixture_text(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in FIXTURE_NAMES:
        raise KeyError(name)
    return resources.files("memconsist").joinpath("fixtures").joinpath(f"{name}.mem").read_text()


def fixtures() -> dict[str, Execution]:
    """The bundled worked-example executions by name, aliases included."""
    out = {name: loads(fixture_text(name)) for name in FIXTURE_NAMES}
    for alias, target in ALIASES.items():
        out[alias] = out[target]
    return out


def load(source: str | Path) -> Execution:
    """Read a trace file, or a fixture when ``source`` looks like ``@name``."""
    source = str(source)
    if source.startswith("@"):
        return loads(fixture_text(source[1:]))
    return loads(Path(source).read_text(encoding="utf-8"))
