"""Horn clauses over the background predicates: syntax, printing, parsing,
canonical renaming, and theta-subsumption.

The wire format is one clause per line in Prolog-compatible syntax:

    tac(A,"simpl") :- goal_node(const,A,B,C), goal_above(A,B,D).

Variables start with an uppercase letter (``_`` is an anonymous variable),
constants are bare lowercase atoms, double-quoted strings, integers, or
bracketed integer lists (positions). ``parse_clause(format_clause(c)) == c``
for every clause, and printing a parsed line reproduces it up to whitespace.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

HEAD_PREDICATE = "tac"


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: object  # str for names/tactics, int, or tuple[int, ...] for positions

    def __repr__(self) -> str:
        return f"<{self.value!r}>"


Arg = Var | Const


@dataclass(frozen=True)
class Literal:
    pred: str
    args: tuple[Arg, ...]

    def variables(self) -> Iterator[Var]:
        for a in self.args:
            if isinstance(a, Var):
                yield a


@dataclass(frozen=True)
class Clause:
    """``head :- body`` with head predicate ``tac(StateVar, "tactic")``."""

    head: Literal
    body: tuple[Literal, ...]

    @property
    def tactic(self) -> str:
        arg = self.head.args[1]
        if not isinstance(arg, Const) or not isinstance(arg.value, str):
            raise ValueError("clause head carries no tactic constant")
        return arg.value

    @property
    def state_var(self) -> Var:
        arg = self.head.args[0]
        if not isinstance(arg, Var):
            raise ValueError("clause head state argument must be a variable")
        return arg

    def length(self) -> int:
        """Literal count including the head."""
        return 1 + len(self.body)

    def variables(self) -> list[Var]:
        seen: dict[Var, None] = {}
        for lit in (self.head, *self.body):
            for v in lit.variables():
                seen.setdefault(v)
        return list(seen)


def make_head(tactic: str, state_var: str = "A") -> Literal:
    return Literal(HEAD_PREDICATE, (Var(state_var), Const(tactic)))


# --- variable naming ---

def _var_name(i: int) -> str:
    # A, B, ..., Z, A1, B1, ...
    letter = chr(ord("A") + i % 26)
    suffix = i // 26
    return letter if suffix == 0 else f"{letter}{suffix}"


def canonical(clause: Clause) -> Clause:
    """Rename variables to A, B, C, ... in order of first occurrence.

    Two clauses are duplicates up to renaming iff their canonical forms are
    equal.
    """
    mapping: dict[Var, Var] = {}

    def rename(a: Arg) -> Arg:
        if isinstance(a, Const):
            return a
        if a not in mapping:
            mapping[a] = Var(_var_name(len(mapping)))
        return mapping[a]

    lits = [Literal(l.pred, tuple(rename(a) for a in l.args)) for l in (clause.head, *clause.body)]
    return Clause(lits[0], tuple(lits[1:]))


# --- printing ---

_LOWER = "abcdefghijklmnopqrstuvwxyz"


def _format_arg(a: Arg) -> str:
    if isinstance(a, Var):
        return a.name
    v = a.value
    if isinstance(v, tuple):
        return "[" + ",".join(str(i) for i in v) + "]"
    if isinstance(v, int):
        return str(v)
    text = str(v)
    if a is not None and text and text[0] in _LOWER and all(c.isalnum() or c == "_" for c in text):
        return text
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _format_literal(lit: Literal) -> str:
    return f"{lit.pred}({','.join(_format_arg(a) for a in lit.args)})"


def format_clause(clause: Clause) -> str:
    head = _format_literal(clause.head)
    if not clause.body:
        return head + "."
    return head + " :- " + ", ".join(_format_literal(l) for l in clause.body) + "."


def format_rules(clauses: Iterable[Clause]) -> str:
    return "".join(format_clause(c) + "\n" for c in clauses)


# --- parsing ---

class ClauseParseError(ValueError):
    pass


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def _skip_ws(self) -> None:
        while self.i < len(self.text):
            c = self.text[self.i]
            if c.isspace():
                self.i += 1
            elif c == "%":  # comment to end of line
                while self.i < len(self.text) and self.text[self.i] != "\n":
                    self.i += 1
            else:
                break

    def peek(self) -> str:
        self._skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, s: str) -> None:
        self._skip_ws()
        if not self.text.startswith(s, self.i):
            raise ClauseParseError(f"expected {s!r} at offset {self.i}: ...{self.text[self.i:self.i+20]!r}")
        self.i += len(s)

    def try_take(self, s: str) -> bool:
        self._skip_ws()
        if self.text.startswith(s, self.i):
            self.i += len(s)
            return True
        return False

    def word(self) -> str:
        self._skip_ws()
        j = self.i
        while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
            j += 1
        if j == self.i:
            raise ClauseParseError(f"expected a name at offset {self.i}")
        w = self.text[self.i:j]
        self.i = j
        return w

    def string(self) -> str:
        self.expect('"')
        out: list[str] = []
        while self.i < len(self.text):
            c = self.text[self.i]
            self.i += 1
            if c == "\\" and self.i < len(self.text):
                out.append(self.text[self.i])
                self.i += 1
            elif c == '"':
                return "".join(out)
            else:
                out.append(c)
        raise ClauseParseError("unterminated string")

    def at_end(self) -> bool:
        self._skip_ws()
        return self.i >= len(self.text)


def _parse_arg(tok: _Tokens, fresh: Iterator[int]) -> Arg:
    c = tok.peek()
    if c == '"':
        return Const(tok.string())
    if c == "[":
        tok.expect("[")
        items: list[int] = []
        if not tok.try_take("]"):
            while True:
                items.append(int(tok.word()))
                if tok.try_take("]"):
                    break
                tok.expect(",")
        return Const(tuple(items))
    if c == "-" or c.isdigit():
        neg = tok.try_take("-")
        n = int(tok.word())
        return Const(-n if neg else n)
    w = tok.word()
    if w == "_":
        return Var(f"_G{next(fresh)}")
    if w[0].isupper() or w[0] == "_":
        return Var(w)
    return Const(w)


def _parse_literal(tok: _Tokens, fresh: Iterator[int]) -> Literal:
    name = tok.word()
    if not name[0].islower():
        raise ClauseParseError(f"predicate name must start lowercase: {name!r}")
    tok.expect("(")
    args: list[Arg] = []
    if not tok.try_take(")"):
        while True:
            args.append(_parse_arg(tok, fresh))
            if tok.try_take(")"):
                break
            tok.expect(",")
    return Literal(name, tuple(args))


def parse_clause(text: str) -> Clause:
    """Parse a single clause (possibly spanning several lines)."""
    tok = _Tokens(text)
    fresh = itertools.count()
    head = _parse_literal(tok, fresh)
    body: list[Literal] = []
    if tok.try_take(":-"):
        while True:
            body.append(_parse_literal(tok, fresh))
            if not tok.try_take(","):
                break
    tok.expect(".")
    if not tok.at_end():
        raise ClauseParseError(f"trailing input at offset {tok.i}")
    return Clause(head, tuple(body))


def parse_rules(text: str) -> list[Clause]:
    """Parse a rule file: clauses separated by terminating periods. Blank
    lines and %-comments are ignored; a clause may span lines."""
    clauses: list[Clause] = []
    buf: list[str] = []
    for line in text.splitlines():
        stripped = line.split("%", 1)[0].rstrip()
        if not stripped and not buf:
            continue
        buf.append(stripped)
        if stripped.endswith("."):
            clauses.append(parse_clause("\n".join(buf)))
            buf = []
    if buf and any(s.strip() for s in buf):
        raise ClauseParseError("unterminated clause at end of input")
    return clauses


# --- theta-subsumption ---

def theta_subsumes(c1: Clause, c2: Clause, max_literals: int = 24) -> bool:
    """True iff some substitution maps c1's literals into c2's (heads unified).

    c2's variables are treated as fresh constants; the search over literal
    matchings is complete for clauses up to ``max_literals`` body literals and
    falls back to False (with a log line) above it.
    """
    if c1.head.pred != c2.head.pred or len(c1.head.args) != len(c2.head.args):
        return False
    if len(c1.body) > max_literals or len(c2.body) > max_literals:
        log.warning(
            "theta_subsumes: clause exceeds %d literals, treating as not subsumed",
            max_literals,
        )
        return False

    # Skolemize c2: its variables become unique constants.
    skolem: dict[Var, Const] = {}

    def sk(a: Arg) -> Arg:
        if isinstance(a, Const):
            return a
        if a not in skolem:
            skolem[a] = Const(("$sk", len(skolem)))
        return skolem[a]

    target_head = tuple(sk(a) for a in c2.head.args)
    target_body = [Literal(l.pred, tuple(sk(a) for a in l.args)) for l in c2.body]

    theta: dict[Var, Arg] = {}

    def unify_arg(a: Arg, ground: Arg, trail: list[Var]) -> bool:
        if isinstance(a, Const):
            return a == ground
        bound = theta.get(a)
        if bound is not None:
            return bound == ground
        theta[a] = ground
        trail.append(a)
        return True

    trail0: list[Var] = []
    for a, g in zip(c1.head.args, target_head):
        if not unify_arg(a, g, trail0):
            return False

    by_pred: dict[tuple[str, int], list[Literal]] = {}
    for l in target_body:
        by_pred.setdefault((l.pred, len(l.args)), []).append(l)

    def match(i: int) -> bool:
        if i == len(c1.body):
            return True
        lit = c1.body[i]
        for cand in by_pred.get((lit.pred, len(lit.args)), ()):
            trail: list[Var] = []
            ok = all(unify_arg(a, g, trail) for a, g in zip(lit.args, cand.args))
            if ok and match(i + 1):
                return True
            for v in trail:
                del theta[v]
        return False

    return match(0)
