"""Deterministic synthetic corpora with planted structural patterns.

Each planted pattern pairs a builder (which manufactures proof states
satisfying the pattern) with a reference clause over the anonymous background
predicates expressing exactly the planted property. Distractor states (the
``none`` pattern) mix generic random states with near-miss traps: states that
satisfy every proper weakening of some planted clause but not the clause
itself (an equation with unequal sides, a hypothesis one leaf away from the
goal, twin constructors with no shared constant ancestor, a nested product).
The traps share surface vocabulary with the pattern states, so tree-walk
k-NN confuses them while the planted relational property still separates
them exactly.

Every generated state is checked: a planted state must satisfy its own
reference clause and no other planted clause; a distractor must satisfy
none. Generation is deterministic for a fixed seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .clauses import Clause, parse_clause
from .encoding import EncodingVariant, encode
from .ilp import covers
from .terms import Category, Corpus, ProofState, Split, Term, ident, op

MAX_TRIES = 400


class GenerationError(ValueError):
    pass


# vocabulary pools (constructors, the equality inductive and `prod` appear
# only where a pattern or trap calls for them)
_VARS = ("x", "y", "z", "n", "m")
_CONSTS = ("Coq.Init.Nat.add", "Coq.Init.Nat.sub", "Coq.Init.Nat.mul", "f", "g")
_INDS = ("Coq.Init.Datatypes.nat", "Coq.Init.Datatypes.bool")
_CONSTRUCTORS = ("S", "cons")
_FILLER_OPS = ("case", "let", "app")
_EQ = ident(Category.INDUCTIVE, "Coq.Init.Logic.eq")


def _leaf(rng: random.Random) -> Term:
    if rng.random() < 0.7:
        return Term(ident(Category.VARIABLE, rng.choice(_VARS)))
    return Term(ident(Category.INDUCTIVE, rng.choice(_INDS)))


def random_filler(rng: random.Random, max_depth: int = 2) -> Term:
    """Random tree over the neutral vocabulary: variables, inductives,
    applied constants, and generic term ops. No equality, constructors, or
    binders, so fillers cannot instantiate a planted pattern by accident."""
    if max_depth <= 0 or rng.random() < 0.35:
        return _leaf(rng)
    arity = rng.randint(1, 2)
    children = tuple(random_filler(rng, max_depth - 1) for _ in range(arity))
    if rng.random() < 0.7:
        return Term(ident(Category.CONSTANT, rng.choice(_CONSTS)), children)
    return Term(op(rng.choice(_FILLER_OPS)), children)


def _const_headed(rng: random.Random, max_depth: int = 2) -> Term:
    arity = rng.randint(1, 2)
    children = tuple(random_filler(rng, max_depth - 1) for _ in range(arity))
    return Term(ident(Category.CONSTANT, rng.choice(_CONSTS)), children)


def _distinct_leaves(rng: random.Random, n: int) -> list[Term]:
    names = rng.sample(_VARS, min(n, len(_VARS)))
    return [Term(ident(Category.VARIABLE, name)) for name in names]


def _filler_hyps(rng: random.Random, max_count: int = 2) -> list[tuple[str, Term]]:
    count = rng.randint(0, max_count)
    return [(f"H{i}", random_filler(rng, 1)) for i in range(count)]


StateParts = tuple[Term, list[tuple[str, Term]]]


def _build_equal_args_of_eq(rng: random.Random) -> StateParts:
    t = _const_headed(rng, 1)
    goal = Term(_EQ, (t, t))
    if rng.random() < 0.4:  # bury the equation so root position carries no signal
        goal = Term(op(rng.choice(_FILLER_OPS)), (goal, _leaf(rng)))
    return goal, _filler_hyps(rng)


def _build_goal_matches_hyp(rng: random.Random) -> StateParts:
    goal = _const_headed(rng, 2)
    hyps = _filler_hyps(rng, 1)
    hyps.append((f"H{len(hyps)}", goal))
    return goal, hyps


def _build_const_over_twins(rng: random.Random) -> StateParts:
    c = rng.choice(_CONSTRUCTORS)
    a, b = _distinct_leaves(rng, 2)
    goal = Term(
        ident(Category.CONSTANT, rng.choice(_CONSTS)),
        (Term(ident(Category.CONSTRUCTOR, c), (a,)), Term(ident(Category.CONSTRUCTOR, c), (b,))),
    )
    if rng.random() < 0.4:  # the constant need not sit at the root
        goal = Term(op(rng.choice(_FILLER_OPS)), (goal, _leaf(rng)))
    return goal, _filler_hyps(rng)


def _build_product_goal(rng: random.Random) -> StateParts:
    binder = Term(ident(Category.VARIABLE, rng.choice(_VARS)))
    body_child = Term(op("rel")) if rng.random() < 0.5 else _leaf(rng)
    body = Term(ident(Category.CONSTANT, rng.choice(_CONSTS)), (body_child,))
    return Term(op("prod"), (binder, body)), _filler_hyps(rng, 1)


# --- distractor kinds: generic noise plus near-miss traps ---

def _trap_near_eq(rng: random.Random) -> StateParts:
    a, b = _distinct_leaves(rng, 2)
    c = rng.choice(_CONSTS)
    if rng.random() < 0.5:
        # same constant head on both sides, different arguments: only genuine
        # subtree equality separates this from the planted equation states
        goal = Term(
            _EQ,
            (Term(ident(Category.CONSTANT, c), (a,)), Term(ident(Category.CONSTANT, c), (b,))),
        )
    else:
        left = Term(ident(Category.CONSTANT, c), (a,)) if rng.random() < 0.5 else a
        goal = Term(_EQ, (left, b))
    if rng.random() < 0.4:
        goal = Term(op(rng.choice(_FILLER_OPS)), (goal, _leaf(rng)))
    return goal, _filler_hyps(rng)


def _trap_eq_outside(rng: random.Random) -> StateParts:
    # an eq node and an equal pair of subtrees, but never both below the eq
    a, b = _distinct_leaves(rng, 2)
    twin = _const_headed(rng, 1)
    if rng.random() < 0.5:
        goal = Term(op(rng.choice(_FILLER_OPS)), (Term(_EQ, (a, b)), twin, twin))
    else:  # one copy inside the equation, its double outside
        goal = Term(op(rng.choice(_FILLER_OPS)), (Term(_EQ, (twin, a)), twin))
    return goal, _filler_hyps(rng, 1)


def _trap_near_hyp(rng: random.Random) -> StateParts:
    goal = Term(
        ident(Category.CONSTANT, rng.choice(_CONSTS)),
        (Term(ident(Category.VARIABLE, "x")), random_filler(rng, 1)),
    )
    altered = Term(goal.label, (Term(ident(Category.VARIABLE, "y")),) + goal.children[1:])
    hyps = _filler_hyps(rng, 1)
    hyps.append((f"H{len(hyps)}", altered))
    return goal, hyps


def _trap_hyp_inside_goal(rng: random.Random) -> StateParts:
    inner = _const_headed(rng, 1)
    goal = Term(ident(Category.CONSTANT, rng.choice(_CONSTS)), (inner, _leaf(rng)))
    hyps = _filler_hyps(rng, 1)
    hyps.append((f"H{len(hyps)}", inner))
    return goal, hyps


def _trap_goal_inside_hyp(rng: random.Random) -> StateParts:
    goal = _const_headed(rng, 1)
    wrapper = Term(ident(Category.CONSTANT, rng.choice(_CONSTS)), (goal, _leaf(rng)))
    hyps = _filler_hyps(rng, 1)
    hyps.append((f"H{len(hyps)}", wrapper))
    return goal, hyps


def _trap_near_construct(rng: random.Random) -> StateParts:
    a, b = _distinct_leaves(rng, 2)
    goal = Term(
        ident(Category.CONSTANT, rng.choice(_CONSTS)),
        (Term(ident(Category.CONSTRUCTOR, "S"), (a,)), Term(ident(Category.CONSTRUCTOR, "cons"), (b,))),
    )
    return goal, _filler_hyps(rng)


def _trap_twins_no_const(rng: random.Random) -> StateParts:
    c = rng.choice(_CONSTRUCTORS)
    a, b = _distinct_leaves(rng, 2)
    goal = Term(
        op(rng.choice(_FILLER_OPS)),
        (Term(ident(Category.CONSTRUCTOR, c), (a,)), Term(ident(Category.CONSTRUCTOR, c), (b,))),
    )
    return goal, _filler_hyps(rng)


def _trap_construct_outside(rng: random.Random) -> StateParts:
    c = rng.choice(_CONSTRUCTORS)
    a, b = _distinct_leaves(rng, 2)
    under_const = Term(
        ident(Category.CONSTANT, rng.choice(_CONSTS)),
        (Term(ident(Category.CONSTRUCTOR, c), (a,)),),
    )
    outside = Term(ident(Category.CONSTRUCTOR, c), (b,))
    pair = (under_const, outside) if rng.random() < 0.5 else (outside, under_const)
    return Term(op(rng.choice(_FILLER_OPS)), pair), _filler_hyps(rng)


def _trap_nested_prod(rng: random.Random) -> StateParts:
    binder = Term(ident(Category.VARIABLE, rng.choice(_VARS)))
    inner = Term(op("prod"), (binder, _leaf(rng)))
    goal = Term(op(rng.choice(_FILLER_OPS)), (inner, random_filler(rng, 1)))
    return goal, _filler_hyps(rng, 1)


def _build_generic(rng: random.Random) -> StateParts:
    return random_filler(rng, 3), _filler_hyps(rng)


_DISTRACTOR_KINDS: tuple[tuple[Callable[[random.Random], StateParts], int], ...] = (
    (_build_generic, 25),
    (_trap_near_eq, 10),
    (_trap_eq_outside, 8),
    (_trap_near_hyp, 10),
    (_trap_hyp_inside_goal, 8),
    (_trap_goal_inside_hyp, 8),
    (_trap_near_construct, 10),
    (_trap_twins_no_const, 8),
    (_trap_construct_outside, 8),
    (_trap_nested_prod, 8),
)


def _build_distractor(rng: random.Random) -> StateParts:
    builders = [b for b, _ in _DISTRACTOR_KINDS]
    weights = [w for _, w in _DISTRACTOR_KINDS]
    return rng.choices(builders, weights=weights, k=1)[0](rng)


@dataclass(frozen=True)
class PatternDef:
    name: str
    clause_body: str  # body of the reference clause, head is tac(A, tactic)
    builder: Callable[[random.Random], StateParts]


PATTERNS: dict[str, PatternDef] = {
    p.name: p
    for p in (
        PatternDef(
            "equal_args_of_eq",
            "goal_node(coq_Init_Logic_eq,A,B,C), goal_above(A,B,D), "
            "goal_above(A,B,E), dif(D,E), eq_goal_term(A,D,E)",
            _build_equal_args_of_eq,
        ),
        PatternDef(
            "goal_matches_hyp",
            "goal_node(const,A,B,C), is_goal_root(A,B), hyp_node(const,A,H,G,C), "
            "is_hyp_root(A,G), eq_goal_hyp_term(A,B,G)",
            _build_goal_matches_hyp,
        ),
        PatternDef(
            "const_over_twin_constructors",
            "goal_node(const,A,B,C), goal_node(construct,A,D,E), goal_above(A,B,D), "
            "goal_node(construct,A,F,E), dif(F,D), goal_above(A,B,F)",
            _build_const_over_twins,
        ),
        PatternDef(
            "product_goal",
            "goal_node(prod,A,B,C), is_goal_root(A,B)",
            _build_product_goal,
        ),
    )
}

DISTRACTOR_PATTERN = "none"


def reference_clause(pattern: str, tactic: str) -> Clause:
    if pattern not in PATTERNS:
        raise GenerationError(f"unknown pattern {pattern!r}")
    return parse_clause(f'tac(A,"{tactic}") :- {PATTERNS[pattern].clause_body}.')


@dataclass(frozen=True)
class PatternCount:
    tactic: str
    pattern: str  # a PATTERNS key, or "none" for distractors
    count: int


@dataclass(frozen=True)
class TheorySpec:
    name: str
    split: Split
    entries: tuple[PatternCount, ...]


@dataclass(frozen=True)
class GeneratorSpec:
    theories: tuple[TheorySpec, ...]

    @classmethod
    def single_theory(
        cls,
        entries: Sequence[tuple[str, str, int]],
        theory: str = "synth",
        split: Split = Split.TRAIN,
    ) -> "GeneratorSpec":
        return cls((TheorySpec(theory, split, tuple(PatternCount(*e) for e in entries)),))


def generate_synthetic_corpus(spec: GeneratorSpec, seed: int) -> Corpus:
    """Deterministic corpus with each state labeled by the tactic whose
    pattern it instantiates; distractors satisfy no planted pattern."""
    for theory in spec.theories:
        for entry in theory.entries:
            if entry.pattern != DISTRACTOR_PATTERN and entry.pattern not in PATTERNS:
                raise GenerationError(f"unknown pattern {entry.pattern!r}")
            if entry.count < 0:
                raise GenerationError("pattern count must be nonnegative")

    planted: dict[str, Clause] = {}
    for theory in spec.theories:
        for entry in theory.entries:
            if entry.pattern != DISTRACTOR_PATTERN:
                planted.setdefault(entry.pattern, reference_clause(entry.pattern, entry.tactic))

    rng = random.Random(seed)
    states: list[ProofState] = []
    split: dict[str, Split] = {}
    sid = 0
    for theory in spec.theories:
        split[theory.name] = theory.split
        for entry in theory.entries:
            for _ in range(entry.count):
                state = _generate_state(rng, sid, theory.name, entry, planted)
                states.append(state)
                sid += 1
    return Corpus(states=tuple(states), split=split)


def _generate_state(
    rng: random.Random,
    sid: int,
    theory: str,
    entry: PatternCount,
    planted: dict[str, Clause],
) -> ProofState:
    is_distractor = entry.pattern == DISTRACTOR_PATTERN
    builder = _build_distractor if is_distractor else PATTERNS[entry.pattern].builder
    for _ in range(MAX_TRIES):
        goal, hyps = builder(rng)
        state = ProofState(sid, goal, tuple(hyps), entry.tactic, theory)
        fb = encode(state, EncodingVariant.ANONYMOUS)
        ok = True
        for pattern, clause in planted.items():
            holds_here = covers(clause, fb)
            want = (not is_distractor) and pattern == entry.pattern
            if holds_here != want:
                ok = False
                break
        if ok:
            return state
    raise GenerationError(
        f"could not generate a state for pattern {entry.pattern!r} after {MAX_TRIES} tries"
    )
