"""Feature predicates over a fact base, evaluated on demand.

Two families:

* positional — ``goal_above``/``goal_left`` (and the ``hyp_`` twins) compare
  node positions vertically and horizontally; ``dif`` is structural
  inequality of positions. "Above" means proper ancestor (the path is a
  strict prefix); "left" means the first differing child index is smaller,
  so ancestors are neither left nor right of their descendants. Hypothesis
  positions only relate within one hypothesis.
* equational — ``eq_goal_term``/``eq_goal_hyp_term``/``eq_hyp_term`` compare
  whole subtrees, always by original labels (anonymization never affects
  equality); ``is_goal_root``/``is_hyp_root`` single out root positions.

These are never pre-grounded: grounding all pairs for every state would blow
up the representation, so the coverage engine queries them lazily through
:func:`enumerate_solutions`.
"""

from __future__ import annotations

from typing import Iterator, Sequence

from .encoding import EncodingVariant, FactBase
from .terms import HypPosition, InvalidPositionError, Position


class ModeViolationError(ValueError):
    """A query left a slot free that its mode requires to be bound."""


def _check_goal_pos(fb: FactBase, pos: Position) -> None:
    if pos not in fb.goal_nodes:
        raise InvalidPositionError(f"state {fb.state_id}: invalid goal position {list(pos)}")


def _check_hyp_pos(fb: FactBase, hpos: HypPosition) -> None:
    if hpos not in fb.hyp_nodes:
        raise InvalidPositionError(
            f"state {fb.state_id}: invalid hypothesis position {hpos.hyp}:{list(hpos.path)}"
        )


def _strict_prefix(a: Position, b: Position) -> bool:
    return len(a) < len(b) and b[: len(a)] == a


def _left_of(a: Position, b: Position) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False  # prefix-related or equal


# --- positional predicates ---

def goal_above(fb: FactBase, a: Position, b: Position) -> bool:
    """a is a proper ancestor of b in the goal."""
    _check_goal_pos(fb, a)
    _check_goal_pos(fb, b)
    return _strict_prefix(a, b)


def goal_left(a: Position, b: Position) -> bool:
    """a is in an earlier sibling subtree than b (pure path comparison)."""
    return _left_of(a, b)


def hyp_above(fb: FactBase, a: HypPosition, b: HypPosition) -> bool:
    _check_hyp_pos(fb, a)
    _check_hyp_pos(fb, b)
    return a.hyp == b.hyp and _strict_prefix(a.path, b.path)


def hyp_left(a: HypPosition, b: HypPosition) -> bool:
    return a.hyp == b.hyp and _left_of(a.path, b.path)


def dif(a: Position | HypPosition, b: Position | HypPosition) -> bool:
    """Structural inequality of positions (same sort). Label equality, when a
    rule needs it, is expressed separately by sharing a name variable."""
    return a != b


# --- equational predicates ---

def eq_goal_term(fb: FactBase, a: Position, b: Position) -> bool:
    """The subtrees rooted at a and b in the goal are identical (original labels)."""
    _check_goal_pos(fb, a)
    _check_goal_pos(fb, b)
    return fb.goal_struct_id(a) == fb.goal_struct_id(b)


def eq_goal_hyp_term(fb: FactBase, g: Position, h: HypPosition) -> bool:
    _check_goal_pos(fb, g)
    _check_hyp_pos(fb, h)
    return fb.goal_struct_id(g) == fb.hyp_struct_id(h)


def eq_hyp_term(fb: FactBase, a: HypPosition, b: HypPosition) -> bool:
    """Equal subtrees in two *different* hypotheses."""
    _check_hyp_pos(fb, a)
    _check_hyp_pos(fb, b)
    return a.hyp != b.hyp and fb.hyp_struct_id(a) == fb.hyp_struct_id(b)


def is_goal_root(fb: FactBase, g: Position) -> bool:
    _check_goal_pos(fb, g)
    return len(g) == 0


def is_hyp_root(fb: FactBase, h: HypPosition) -> bool:
    _check_hyp_pos(fb, h)
    return len(h.path) == 0


# --- signature table ---
#
# Slot sorts: state, gpos (goal position), hpos (hypothesis position),
# name (node name), hname (hypothesis name).
# Slot modes: '#' constant filled at learning time, '+' input (must be bound
# in a learned clause), '-' output (binds a fresh variable).
# goal_node/hyp_node have variant-dependent arity: the anonymous variant
# appends a '-' name slot carrying the original label.

GOAL_NODE_SLOTS_ORIG = (("name", "#"), ("state", "+"), ("gpos", "-"))
GOAL_NODE_SLOTS_ANON = GOAL_NODE_SLOTS_ORIG + (("name", "-"),)
HYP_NODE_SLOTS_ORIG = (("name", "#"), ("state", "+"), ("hname", "-"), ("hpos", "-"))
HYP_NODE_SLOTS_ANON = HYP_NODE_SLOTS_ORIG + (("name", "-"),)

FEATURE_SIGNATURES: dict[str, tuple[tuple[str, str], ...]] = {
    "goal_above": (("state", "+"), ("gpos", "+"), ("gpos", "+")),
    "goal_left": (("gpos", "+"), ("gpos", "+")),
    "hyp_above": (("state", "+"), ("hpos", "+"), ("hpos", "+")),
    "hyp_left": (("hpos", "+"), ("hpos", "+")),
    "dif": (("gpos", "+"), ("gpos", "+")),
    "eq_goal_term": (("state", "+"), ("gpos", "+"), ("gpos", "+")),
    "eq_goal_hyp_term": (("state", "+"), ("gpos", "+"), ("hpos", "+")),
    "eq_hyp_term": (("state", "+"), ("hpos", "+"), ("hpos", "+")),
    "is_goal_root": (("state", "+"), ("gpos", "+")),
    "is_hyp_root": (("state", "+"), ("hpos", "+")),
}

FEATURE_PREDICATES = tuple(sorted(FEATURE_SIGNATURES))

# Predicates with no state argument cannot enumerate a free slot: there is no
# domain to draw candidates from, so a free variable is a mode violation.
_STATELESS = frozenset({"goal_left", "hyp_left", "dif"})


def signature(pred: str, variant: EncodingVariant) -> tuple[tuple[str, str], ...]:
    if pred == "goal_node":
        return GOAL_NODE_SLOTS_ANON if variant is EncodingVariant.ANONYMOUS else GOAL_NODE_SLOTS_ORIG
    if pred == "hyp_node":
        return HYP_NODE_SLOTS_ANON if variant is EncodingVariant.ANONYMOUS else HYP_NODE_SLOTS_ORIG
    try:
        return FEATURE_SIGNATURES[pred]
    except KeyError:
        raise ValueError(f"unknown predicate {pred!r}") from None


FREE = None  # sentinel for an unbound argument slot in a query


def _domain(fb: FactBase, sort: str) -> Sequence[object]:
    if sort == "gpos":
        return fb.goal_positions
    if sort == "hpos":
        return fb.hyp_positions
    if sort == "state":
        return (fb.state_id,)
    if sort == "hname":
        return fb.hyp_names
    if sort == "name":
        return fb.origin_names
    raise ValueError(f"unknown sort {sort!r}")


def _holds(fb: FactBase, pred: str, args: tuple) -> bool:
    try:
        if pred == "goal_above":
            return goal_above(fb, args[1], args[2])
        if pred == "goal_left":
            return goal_left(args[0], args[1])
        if pred == "hyp_above":
            return hyp_above(fb, args[1], args[2])
        if pred == "hyp_left":
            return hyp_left(args[0], args[1])
        if pred == "dif":
            return dif(args[0], args[1])
        if pred == "eq_goal_term":
            return eq_goal_term(fb, args[1], args[2])
        if pred == "eq_goal_hyp_term":
            return eq_goal_hyp_term(fb, args[1], args[2])
        if pred == "eq_hyp_term":
            return eq_hyp_term(fb, args[1], args[2])
        if pred == "is_goal_root":
            return is_goal_root(fb, args[1])
        if pred == "is_hyp_root":
            return is_hyp_root(fb, args[1])
    except InvalidPositionError:
        return False
    except TypeError:
        return False  # argument of the wrong sort never satisfies a predicate
    raise ValueError(f"unknown predicate {pred!r}")


def _node_solutions(fb: FactBase, pred: str, args: tuple) -> Iterator[tuple]:
    """Ground tuples of goal_node/hyp_node facts matching a partial pattern."""
    anon = fb.variant is EncodingVariant.ANONYMOUS
    if pred == "goal_node":
        if args[1] is not FREE and args[1] != fb.state_id:
            return
        for pos in fb.goal_positions:
            name, origin = fb.goal_nodes[pos]
            if args[0] is not FREE and args[0] != name:
                continue
            if args[2] is not FREE and args[2] != pos:
                continue
            if anon:
                if args[3] is not FREE and args[3] != origin:
                    continue
                yield (name, fb.state_id, pos, origin)
            else:
                yield (name, fb.state_id, pos)
    else:
        if args[1] is not FREE and args[1] != fb.state_id:
            return
        for hpos in fb.hyp_positions:
            name, origin = fb.hyp_nodes[hpos]
            if args[0] is not FREE and args[0] != name:
                continue
            if args[2] is not FREE and args[2] != hpos.hyp:
                continue
            if args[3] is not FREE and args[3] != hpos:
                continue
            if anon:
                if args[4] is not FREE and args[4] != origin:
                    continue
                yield (name, fb.state_id, hpos.hyp, hpos, origin)
            else:
                yield (name, fb.state_id, hpos.hyp, hpos)


def enumerate_solutions(fb: FactBase, pred: str, args: Sequence[object]) -> Iterator[tuple]:
    """Yield every satisfying ground argument tuple exactly once.

    ``args`` uses :data:`FREE` for unbound slots. Representation predicates
    accept free slots anywhere; feature predicates with a state argument
    enumerate free position slots over the state's valid positions
    (lexicographic order, hypothesis positions ordered by (hyp_name, path));
    stateless predicates require every slot bound. The state slot must always
    be bound.
    """
    slots = signature(pred, fb.variant)
    args = tuple(args)
    if len(args) != len(slots):
        raise ValueError(f"{pred} expects {len(slots)} arguments, got {len(args)}")
    if pred in ("goal_node", "hyp_node"):
        yield from _node_solutions(fb, pred, args)
        return
    free = [i for i, a in enumerate(args) if a is FREE]
    for i in free:
        if slots[i][0] == "state" or pred in _STATELESS:
            raise ModeViolationError(f"{pred}: argument {i + 1} must be bound")

    def rec(i: int, acc: tuple) -> Iterator[tuple]:
        if i == len(slots):
            if _holds(fb, pred, acc):
                yield acc
            return
        if args[i] is FREE:
            for v in _domain(fb, slots[i][0]):
                yield from rec(i + 1, acc + (v,))
        else:
            yield from rec(i + 1, acc + (args[i],))

    yield from rec(0, ())


def holds(fb: FactBase, pred: str, args: Sequence[object]) -> bool:
    """Ground truth of one fully-bound predicate call (invalid positions are
    simply false rather than errors, which is what clause evaluation needs)."""
    if pred in ("goal_node", "hyp_node"):
        return next(_node_solutions(fb, pred, tuple(args)), None) is not None
    return _holds(fb, pred, tuple(args))
