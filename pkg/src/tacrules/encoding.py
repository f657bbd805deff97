"""Ground representation facts for proof states.

Every AST node becomes one fact. In the original variant a goal node is
``goal_node(name, state, pos)`` and a hypothesis node is
``hyp_node(name, state, hyp_name, pos)``. The anonymous variant abstracts the
name to its category token and appends the original name as a trailing
argument: ``goal_node(anon, state, pos, orig)`` /
``hyp_node(anon, state, hyp_name, pos, orig)``.

Anonymization maps identifiers to one of four category tokens (``ind``,
``const``, ``construct``, ``var``) except for a small retained set of basic
logical and boolean identifiers, which keep their (normalized) names. Term
constructors keep ``rel``, ``prod``, ``lambda`` and ``evar``; every other
constructor collapses to the generic token ``term_op``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .terms import Category, HypPosition, NodeLabel, Position, ProofState, Term


class EncodingVariant(Enum):
    ORIGINAL = "original"
    ANONYMOUS = "anonymous"


CATEGORY_TOKENS = {
    Category.INDUCTIVE: "ind",
    Category.CONSTANT: "const",
    Category.CONSTRUCTOR: "construct",
    Category.VARIABLE: "var",
}

# Retained term constructors; all others anonymize to the generic token.
RETAINED_OPS = frozenset({"rel", "prod", "lambda", "evar"})
GENERIC_OP_TOKEN = "term_op"

# Basic identifiers that survive anonymization: logical falsity/truth, the
# connectives, propositional equality, and the boolean constants.
RETAINED_IDENTIFIERS = (
    "Coq.Init.Logic.False",
    "Coq.Init.Logic.True",
    "Coq.Init.Logic.and",
    "Coq.Init.Logic.or",
    "Coq.Init.Logic.iff",
    "Coq.Init.Logic.not",
    "Coq.Init.Logic.eq",
    "Coq.Init.Datatypes.true",
    "Coq.Init.Datatypes.false",
)


def atomize(name: str) -> str:
    """Normalize a qualified name to an atom shape: dots to underscores,
    leading character lowercased (``Coq.Init.Logic.eq`` -> ``coq_Init_Logic_eq``)."""
    flat = name.replace(".", "_")
    return flat[:1].lower() + flat[1:]


_RETAINED_TOKENS = frozenset(atomize(n) for n in RETAINED_IDENTIFIERS)


def anonymize(label: NodeLabel) -> str:
    """Anonymous token for a node label.

    Idempotent on its own output: feeding a token back through the natural
    label of its kind returns the token unchanged.
    """
    if label.category is None:
        return label.name if label.name in RETAINED_OPS else GENERIC_OP_TOKEN
    token = atomize(label.name)
    if token in _RETAINED_TOKENS:
        return token
    return CATEGORY_TOKENS[label.category]


@dataclass(frozen=True)
class GoalNodeFact:
    name: str  # anon token in the anonymous variant, original name otherwise
    state_id: int
    pos: Position
    origin: str


@dataclass(frozen=True)
class HypNodeFact:
    name: str
    state_id: int
    hyp_name: str
    pos: Position  # path within the hypothesis; full address is (hyp_name, pos)
    origin: str


class FactBase:
    """The logic-fact view of one proof state.

    Representation facts are stored extensionally (one per AST node); feature
    predicates are evaluated on demand by :mod:`tacrules.predicates`. Subtree
    identity is precomputed as interned structure ids so equational queries
    are constant-time and exact.
    """

    def __init__(self, state: ProofState, variant: EncodingVariant):
        self.state_id = state.id
        self.variant = variant
        self.source = state
        anon = variant is EncodingVariant.ANONYMOUS

        self.goal_nodes: dict[Position, tuple[str, str]] = {}
        for pos, sub in state.goal.walk():
            origin = sub.label.name
            name = anonymize(sub.label) if anon else origin
            self.goal_nodes[pos] = (name, origin)

        self.hyp_nodes: dict[HypPosition, tuple[str, str]] = {}
        self.hyp_names: tuple[str, ...] = tuple(n for n, _ in state.hypotheses)
        for hyp_name, body in state.hypotheses:
            for pos, sub in body.walk():
                origin = sub.label.name
                name = anonymize(sub.label) if anon else origin
                self.hyp_nodes[HypPosition(hyp_name, pos)] = (name, origin)

        # deterministic enumeration orders: lexicographic by (hyp_name, path)
        self.goal_positions: tuple[Position, ...] = tuple(sorted(self.goal_nodes))
        self.hyp_positions: tuple[HypPosition, ...] = tuple(sorted(self.hyp_nodes))

        # interned structure ids: equal subtrees (by original labels) share an id
        interner: dict[tuple, int] = {}
        self._goal_sid: dict[Position, int] = {}
        self._hyp_sid: dict[HypPosition, int] = {}
        self._intern_term(state.goal, (), interner, self._goal_sid, None)
        for hyp_name, body in state.hypotheses:
            self._intern_term(body, (), interner, self._hyp_sid, hyp_name)

    def _intern_term(self, term: Term, pos: Position, interner: dict, out: dict, hyp: str | None) -> int:
        child_ids = tuple(
            self._intern_term(c, pos + (i,), interner, out, hyp)
            for i, c in enumerate(term.children)
        )
        key = (term.label.name, term.label.category, child_ids)
        sid = interner.setdefault(key, len(interner))
        out[pos if hyp is None else HypPosition(hyp, pos)] = sid
        return sid

    # --- lookups used by the predicate engine ---

    def goal_struct_id(self, pos: Position) -> int | None:
        return self._goal_sid.get(pos)

    def hyp_struct_id(self, hpos: HypPosition) -> int | None:
        return self._hyp_sid.get(hpos)

    def goal_facts(self) -> tuple[GoalNodeFact, ...]:
        return tuple(
            GoalNodeFact(name, self.state_id, pos, origin)
            for pos, (name, origin) in sorted(self.goal_nodes.items())
        )

    def hyp_facts(self) -> tuple[HypNodeFact, ...]:
        return tuple(
            HypNodeFact(name, self.state_id, hp.hyp, hp.path, origin)
            for hp, (name, origin) in sorted(self.hyp_nodes.items())
        )

    @cached_property
    def origin_names(self) -> tuple[str, ...]:
        names = {o for _, o in self.goal_nodes.values()}
        names.update(o for _, o in self.hyp_nodes.values())
        return tuple(sorted(names))


def encode(state: ProofState, variant: EncodingVariant) -> FactBase:
    """Convert a proof state into its fact base (one fact per AST node)."""
    return FactBase(state, variant)


# --- Prolog-compatible fact dump, for debugging and external cross-checks ---

_ATOM_OK = set("abcdefghijklmnopqrstuvwxyz")


def format_const(value: object) -> str:
    """Render a constant: bare atom when possible, else a quoted string;
    positions render as Prolog lists."""
    if isinstance(value, tuple) and not isinstance(value, HypPosition):
        return "[" + ",".join(format_const(v) for v in value) + "]"
    if isinstance(value, HypPosition):
        return "[" + ",".join([format_const(value.hyp)] + [str(i) for i in value.path]) + "]"
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if text and text[0] in _ATOM_OK and all(c.isalnum() or c == "_" for c in text):
        return text
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def dump_facts(fb: FactBase) -> str:
    """One fact per line, terminated by periods."""
    lines: list[str] = []
    anon = fb.variant is EncodingVariant.ANONYMOUS
    for fact in fb.goal_facts():
        args = [format_const(fact.name), str(fact.state_id), format_const(fact.pos)]
        if anon:
            args.append(format_const(fact.origin))
        lines.append(f"goal_node({','.join(args)}).")
    for fact in fb.hyp_facts():
        hpos = HypPosition(fact.hyp_name, fact.pos)
        args = [
            format_const(fact.name),
            str(fact.state_id),
            format_const(fact.hyp_name),
            format_const(hpos),
        ]
        if anon:
            args.append(format_const(fact.origin))
        lines.append(f"hyp_node({','.join(args)}).")
    return "\n".join(lines) + ("\n" if lines else "")
