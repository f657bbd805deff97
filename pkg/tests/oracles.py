"""Independent brute-force oracles used to check the production code.

These deliberately avoid the library's own machinery: subtree equality is
recursive comparison, ancestor tests walk slices, clause coverage enumerates
every variable assignment over the state's domains. They are slow and only
suitable for small inputs.
"""

from __future__ import annotations

import itertools
import random

from tacrules.clauses import Clause, Const, Var
from tacrules.encoding import EncodingVariant, anonymize
from tacrules.terms import Category, HypPosition, ProofState, Term, ident, op


def all_positions(term: Term) -> list[tuple[int, ...]]:
    out = [()]
    for i, child in enumerate(term.children):
        out.extend((i,) + p for p in all_positions(child))
    return out


def subterm(term: Term, pos) -> Term:
    for i in pos:
        term = term.children[i]
    return term


def trees_equal(a: Term, b: Term) -> bool:
    if a.label.name != b.label.name or a.label.category != b.label.category:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(trees_equal(x, y) for x, y in zip(a.children, b.children))


def oracle_above(a, b) -> bool:
    return len(a) < len(b) and list(b[: len(a)]) == list(a)


def oracle_left(a, b) -> bool:
    if oracle_above(a, b) or oracle_above(b, a) or a == b:
        return False
    for i in range(min(len(a), len(b))):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


# --- random state generation for fuzzing ---

_LEAF_NAMES = ("x", "y", "z", "n", "m", "p")
_CONST_NAMES = ("f", "g", "h", "Coq.Init.Nat.add", "Coq.Init.Nat.sub")
_CONSTR_NAMES = ("S", "O", "cons", "nil")
_IND_NAMES = ("Coq.Init.Datatypes.nat", "Coq.Init.Logic.eq")
_OPS = ("app", "case", "let", "prod", "lambda", "fix", "rel", "evar")


def random_label(rng: random.Random):
    r = rng.random()
    if r < 0.35:
        return ident(Category.VARIABLE, rng.choice(_LEAF_NAMES))
    if r < 0.6:
        return ident(Category.CONSTANT, rng.choice(_CONST_NAMES))
    if r < 0.75:
        return ident(Category.CONSTRUCTOR, rng.choice(_CONSTR_NAMES))
    if r < 0.85:
        return ident(Category.INDUCTIVE, rng.choice(_IND_NAMES))
    return op(rng.choice(_OPS))


def random_term(rng: random.Random, max_nodes: int) -> Term:
    """Random tree with at most max_nodes nodes (at least 1)."""
    budget = rng.randint(1, max_nodes)

    def grow(remaining: int) -> tuple[Term, int]:
        remaining -= 1
        children = []
        while remaining > 0 and rng.random() < 0.6 and len(children) < 3:
            child, remaining = grow(remaining)
            children.append(child)
        return Term(random_label(rng), tuple(children)), remaining

    t, _ = grow(budget)
    return t


def random_state(rng: random.Random, sid: int, max_nodes: int = 30, theory: str = "fuzz") -> ProofState:
    n_hyps = rng.randint(0, 2)
    goal_budget = max(1, max_nodes - 2 * n_hyps)
    goal = random_term(rng, min(goal_budget, max_nodes))
    used = goal.node_count()
    hyps = []
    for i in range(n_hyps):
        room = max_nodes - used
        if room < 1:
            break
        h = random_term(rng, min(6, room))
        used += h.node_count()
        hyps.append((f"H{i}", h))
    return ProofState(sid, goal, tuple(hyps), "tac0", theory)


# --- exhaustive clause-coverage oracle ---

def _node_name(state: ProofState, variant: EncodingVariant, where, pos) -> str | None:
    """where is None for the goal or a hypothesis name; returns the fact's
    first-argument name or None if the position is invalid."""
    tree = state.goal if where is None else dict(state.hypotheses).get(where)
    if tree is None:
        return None
    try:
        sub = subterm(tree, pos)
    except IndexError:
        return None
    if variant is EncodingVariant.ANONYMOUS:
        return anonymize(sub.label)
    return sub.label.name


def _lit_true(state: ProofState, variant: EncodingVariant, pred: str, args: tuple) -> bool:
    goal_positions = {tuple(p) for p in all_positions(state.goal)}
    hyps = dict(state.hypotheses)

    def valid_g(p):
        return isinstance(p, tuple) and not isinstance(p, HypPosition) and p in goal_positions

    def valid_h(hp):
        if not isinstance(hp, HypPosition) or hp.hyp not in hyps:
            return False
        return tuple(hp.path) in {tuple(q) for q in all_positions(hyps[hp.hyp])}

    if pred == "goal_node":
        if variant is EncodingVariant.ANONYMOUS:
            name, sid, pos, orig = args
        else:
            name, sid, pos = args
            orig = None
        if sid != state.id or not valid_g(pos):
            return False
        sub = subterm(state.goal, pos)
        if name != _node_name(state, variant, None, pos):
            return False
        return orig is None or orig == sub.label.name
    if pred == "hyp_node":
        if variant is EncodingVariant.ANONYMOUS:
            name, sid, hname, hpos, orig = args
        else:
            name, sid, hname, hpos = args
            orig = None
        if sid != state.id or not valid_h(hpos) or hpos.hyp != hname:
            return False
        sub = subterm(hyps[hpos.hyp], hpos.path)
        if name != _node_name(state, variant, hpos.hyp, hpos.path):
            return False
        return orig is None or orig == sub.label.name
    if pred == "goal_above":
        sid, a, b = args
        return sid == state.id and valid_g(a) and valid_g(b) and oracle_above(a, b)
    if pred == "goal_left":
        a, b = args
        return valid_g(a) and valid_g(b) and oracle_left(a, b)
    if pred == "hyp_above":
        sid, a, b = args
        return (
            sid == state.id
            and valid_h(a)
            and valid_h(b)
            and a.hyp == b.hyp
            and oracle_above(a.path, b.path)
        )
    if pred == "hyp_left":
        a, b = args
        return valid_h(a) and valid_h(b) and a.hyp == b.hyp and oracle_left(a.path, b.path)
    if pred == "dif":
        a, b = args
        return a != b
    if pred == "eq_goal_term":
        sid, a, b = args
        if sid != state.id or not valid_g(a) or not valid_g(b):
            return False
        return trees_equal(subterm(state.goal, a), subterm(state.goal, b))
    if pred == "eq_goal_hyp_term":
        sid, g, h = args
        if sid != state.id or not valid_g(g) or not valid_h(h):
            return False
        return trees_equal(subterm(state.goal, g), subterm(hyps[h.hyp], h.path))
    if pred == "eq_hyp_term":
        sid, a, b = args
        if sid != state.id or not valid_h(a) or not valid_h(b) or a.hyp == b.hyp:
            return False
        return trees_equal(subterm(hyps[a.hyp], a.path), subterm(hyps[b.hyp], b.path))
    if pred == "is_goal_root":
        sid, g = args
        return sid == state.id and valid_g(g) and len(g) == 0
    if pred == "is_hyp_root":
        sid, h = args
        return sid == state.id and valid_h(h) and len(h.path) == 0
    raise ValueError(pred)


def oracle_covers(clause: Clause, state: ProofState, variant: EncodingVariant) -> bool:
    """Exhaustive substitution enumeration over the state's domains."""
    goal_positions = [tuple(p) for p in all_positions(state.goal)]
    hyp_positions = [
        HypPosition(h, tuple(p)) for h, t in state.hypotheses for p in all_positions(t)
    ]
    names = sorted(
        {subterm(state.goal, p).label.name for p in goal_positions}
        | {subterm(dict(state.hypotheses)[hp.hyp], hp.path).label.name for hp in hyp_positions}
        | ({anonymize(subterm(state.goal, p).label) for p in goal_positions} if variant is EncodingVariant.ANONYMOUS else set())
    )
    hyp_names = [h for h, _ in state.hypotheses]
    domain = (
        [state.id]
        + goal_positions
        + hyp_positions
        + names
        + hyp_names
    )
    # dedupe, preserving order
    seen = set()
    universe = []
    for v in domain:
        key = (type(v).__name__, v)
        if key not in seen:
            seen.add(key)
            universe.append(v)

    head_var = clause.head.args[0]
    variables = []
    for lit in clause.body:
        for a in lit.args:
            if isinstance(a, Var) and a != head_var and a not in variables:
                variables.append(a)

    for combo in itertools.product(universe, repeat=len(variables)):
        env = dict(zip(variables, combo))
        if isinstance(head_var, Var):
            env[head_var] = state.id
        ok = True
        for lit in clause.body:
            args = tuple(env[a] if isinstance(a, Var) else a.value for a in lit.args)
            if not _lit_true(state, variant, lit.pred, args):
                ok = False
                break
        if ok:
            return True
    return False
