"""Terms, positions, and proof states.

A term is a rooted ordered tree. Nodes are either identifiers of existing
objects (inductives, constants, constructors, variables) or term constructors
(`prod`, `lambda`, `app`, ...). Applications are flattened head-at-node: the
applied symbol's label sits at the application node and the arguments are its
children, so a head symbol is an ancestor of its arguments.

Positions address nodes by 0-based child indices from the root; the empty
path is the root. A position inside a hypothesis additionally carries the
hypothesis name, so positions from different hypotheses never collide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple, Sequence

Position = tuple[int, ...]

# Fixed vocabulary of term-constructor node names.
TERM_OPS = frozenset({"rel", "prod", "lambda", "evar", "app", "case", "fix", "let"})


class Category(Enum):
    """Kinds of identifier nodes."""

    INDUCTIVE = "ind"
    CONSTANT = "const"
    CONSTRUCTOR = "constr"
    VARIABLE = "var"


class Split(Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


class InvalidPositionError(ValueError):
    """A position walks out of a term."""


@dataclass(frozen=True)
class NodeLabel:
    """Label of one AST node: an identifier (with category) or a term op.

    ``category is None`` marks a term-constructor node, in which case ``name``
    must come from :data:`TERM_OPS`.
    """

    name: str
    category: Category | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("node label name must be non-empty")
        if self.category is None and self.name not in TERM_OPS:
            raise ValueError(f"unknown term constructor {self.name!r}")

    @property
    def is_identifier(self) -> bool:
        return self.category is not None


def ident(category: Category, name: str) -> NodeLabel:
    return NodeLabel(name=name, category=category)


def op(name: str) -> NodeLabel:
    return NodeLabel(name=name, category=None)


@dataclass(frozen=True)
class Term:
    """A finite ordered tree of labeled nodes."""

    label: NodeLabel
    children: tuple[Term, ...] = ()

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def positions(self) -> Iterator[Position]:
        """All valid positions in preorder (= lexicographic path order)."""
        stack: list[tuple[Position, Term]] = [((), self)]
        while stack:
            pos, t = stack.pop()
            yield pos
            # reversed so the leftmost child is yielded first
            for i in range(len(t.children) - 1, -1, -1):
                stack.append((pos + (i,), t.children[i]))

    def walk(self) -> Iterator[tuple[Position, Term]]:
        """(position, subterm) pairs in preorder."""
        stack: list[tuple[Position, Term]] = [((), self)]
        while stack:
            pos, t = stack.pop()
            yield pos, t
            for i in range(len(t.children) - 1, -1, -1):
                stack.append((pos + (i,), t.children[i]))


class HypPosition(NamedTuple):
    """A position within a named hypothesis."""

    hyp: str
    path: Position


def subterm_at(term: Term, pos: Sequence[int]) -> Term:
    """Subtree rooted at ``pos``; raises InvalidPositionError out of bounds."""
    t = term
    for depth, i in enumerate(pos):
        if i < 0 or i >= len(t.children):
            raise InvalidPositionError(
                f"index {i} at depth {depth} out of bounds (node has "
                f"{len(t.children)} children)"
            )
        t = t.children[i]
    return t


def node_at(term: Term, pos: Sequence[int]) -> NodeLabel:
    """Label of the node reached by following ``pos``."""
    return subterm_at(term, pos).label


@dataclass(frozen=True)
class ProofState:
    """One numbered proof state: hypotheses, goal, and its ground-truth tactic."""

    id: int
    goal: Term
    hypotheses: tuple[tuple[str, Term], ...]
    tactic: str
    theory: str

    def __post_init__(self) -> None:
        names = [n for n, _ in self.hypotheses]
        if len(names) != len(set(names)):
            raise ValueError(f"state {self.id}: duplicate hypothesis name")

    def hypothesis(self, name: str) -> Term:
        for n, body in self.hypotheses:
            if n == name:
                return body
        raise KeyError(name)


@dataclass(frozen=True)
class Corpus:
    """A sequence of proof states plus the theory -> split assignment."""

    states: tuple[ProofState, ...]
    split: dict[str, Split] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for s in self.states:
            if s.id in seen:
                raise ValueError(f"duplicate state id {s.id}")
            seen.add(s.id)
        for s in self.states:
            if s.theory not in self.split:
                raise ValueError(f"theory {s.theory!r} missing from split map")

    def states_in(self, split: Split) -> tuple[ProofState, ...]:
        return tuple(s for s in self.states if self.split[s.theory] is split)

    def theories_in(self, split: Split) -> tuple[str, ...]:
        return tuple(sorted(t for t, sp in self.split.items() if sp is split))

    def with_split(self, split: dict[str, Split]) -> "Corpus":
        return Corpus(states=self.states, split=dict(split))

    def relabeled(self, labels: dict[int, str]) -> "Corpus":
        states = tuple(
            ProofState(s.id, s.goal, s.hypotheses, labels.get(s.id, s.tactic), s.theory)
            for s in self.states
        )
        return Corpus(states=states, split=dict(self.split))


def normalize_tactic(text: str) -> str:
    """Collapse whitespace; tactic labels compare as exact normalized strings."""
    return " ".join(text.split())


def default_split(theories: Sequence[str]) -> dict[str, Split]:
    return {t: Split.TRAIN for t in theories}
