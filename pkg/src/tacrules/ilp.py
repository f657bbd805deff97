"""Mode-directed rule induction.

The learner follows the Progol/Aleph recipe: saturate a seed positive into a
bottom clause (the most specific clause true of the seed), then run a
best-first search over mode-consistent subsequences of the bottom clause's
literals, scoring candidates by compression ``P - N - (L - 1)`` where P and N
are covered positives/negatives and L the literal count. Degenerate tasks
(no negatives, or a single positive) switch to the custom cost
``P*w - (L - 1)`` which only demands seed coverage, mirroring how stock Aleph
refuses such tasks outright.

Clause coverage is decided by depth-first backtracking over the body in
order, consuming representation facts extensionally and feature predicates
through the lazy predicate engine. Free variables in a feature literal are
enumerated over the state's valid positions, which keeps the result (not the
cost) independent of body literal order.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Sequence

from .clauses import (
    Arg,
    Clause,
    Const,
    Literal,
    Var,
    _var_name,
    canonical,
    format_clause,
    make_head,
    theta_subsumes,
)
from .encoding import EncodingVariant, FactBase
from .predicates import FEATURE_SIGNATURES, FREE, enumerate_solutions, holds, signature

log = logging.getLogger(__name__)


class Variant(Enum):
    """Background-knowledge flavor: anonymous/original encoding, with or
    without feature predicates (representation facts are always present)."""

    AF = "AF"
    AR = "AR"
    OF = "OF"
    OR = "OR"

    @property
    def encoding(self) -> EncodingVariant:
        return EncodingVariant.ANONYMOUS if self.name[0] == "A" else EncodingVariant.ORIGINAL

    @property
    def with_features(self) -> bool:
        return self.name[1] == "F"


@dataclass(frozen=True)
class SearchBudget:
    """Bounds for saturation and search.

    Defaults are desk-scale; :meth:`paper` restores the published settings
    (clause length 1000, proof depth 1000, 30000 search nodes, ten-minute
    timeout). The bottom clause is truncated at ``max_bottom_literals``
    independently of ``max_clause_length`` so a tight searched-clause bound
    does not discard the literals saturation needs to offer.
    """

    max_clause_length: int = 8
    max_proof_depth: int = 1000
    max_nodes: int = 30000
    timeout: float = 60.0
    saturation_variable_depth: int = 2
    max_bottom_literals: int = 1000

    @classmethod
    def paper(cls) -> "SearchBudget":
        return cls(
            max_clause_length=1000,
            max_proof_depth=1000,
            max_nodes=30000,
            timeout=600.0,
            saturation_variable_depth=2,
            max_bottom_literals=1000,
        )


@dataclass(frozen=True)
class CostSpec:
    """Acceptance knobs. The default path accepts compression > ``floor``;
    the custom path accepts any seed-covering clause with at least
    ``custom_min_pos`` covered positives, scored ``P*custom_weight - (L-1)``."""

    custom_weight: float = 1.0
    floor: float = 0.0
    custom_min_pos: int = 1


# --- saturation ---

_FEATURE_ORDER = (
    "goal_above",
    "goal_left",
    "hyp_above",
    "hyp_left",
    "dif",
    "eq_goal_term",
    "eq_goal_hyp_term",
    "eq_hyp_term",
    "is_goal_root",
    "is_hyp_root",
)


class _VarPool:
    """Maps distinct (sort, ground value) pairs to clause variables, so equal
    seed constants share one variable across literals."""

    def __init__(self, head_var: Var, state_id: int):
        self.by_key: dict[tuple[str, object], Var] = {("state", state_id): head_var}
        self.count = 1

    def get(self, sort: str, value: object) -> Var:
        key = (sort, value)
        v = self.by_key.get(key)
        if v is None:
            v = Var(_var_name(self.count))
            self.count += 1
            self.by_key[key] = v
        return v


def saturate(
    fb: FactBase,
    tactic: str,
    *,
    with_features: bool = True,
    depth: int = 2,
    max_bottom: int = 1000,
) -> Clause:
    """Most specific clause true of the seed state.

    Layer 0 introduces the head state variable; layer 1 adds one
    representation literal per AST node (each distinct position, original
    name, and hypothesis name getting its own variable); layer 2 adds every
    feature-predicate literal ground-true over the layer-1 variables. Feature
    literals introduce no variables, so depth beyond 2 is a fixpoint.
    Symmetric predicates are emitted in one canonical direction and reflexive
    equalities are skipped. Body order: representation literals first (they
    generate bindings), then feature literals grouped by predicate.
    """
    head = make_head(tactic)
    if depth < 1:
        return Clause(head, ())
    head_var = head.args[0]
    assert isinstance(head_var, Var)
    pool = _VarPool(head_var, fb.state_id)
    A = head_var
    anon = fb.variant is EncodingVariant.ANONYMOUS
    body: list[Literal] = []

    gvar = {pos: pool.get("gpos", pos) for pos in fb.goal_positions}
    for pos in fb.goal_positions:
        name, origin = fb.goal_nodes[pos]
        args: list[Arg] = [Const(name), A, gvar[pos]]
        if anon:
            args.append(pool.get("name", origin))
        body.append(Literal("goal_node", tuple(args)))

    hvar = {hp: pool.get("hpos", hp) for hp in fb.hyp_positions}
    for hp in fb.hyp_positions:
        name, origin = fb.hyp_nodes[hp]
        args = [Const(name), A, pool.get("hname", hp.hyp), hvar[hp]]
        if anon:
            args.append(pool.get("name", origin))
        body.append(Literal("hyp_node", tuple(args)))

    if depth >= 2 and with_features:
        gp = fb.goal_positions
        hp_all = fb.hyp_positions
        for pred in _FEATURE_ORDER:
            if pred == "goal_above":
                for a in gp:
                    for b in gp:
                        if a != b and len(a) < len(b) and b[: len(a)] == a:
                            body.append(Literal(pred, (A, gvar[a], gvar[b])))
            elif pred == "goal_left":
                for i, a in enumerate(gp):
                    for b in gp[i + 1 :]:
                        if holds(fb, "goal_left", (a, b)):
                            body.append(Literal(pred, (gvar[a], gvar[b])))
                        elif holds(fb, "goal_left", (b, a)):
                            body.append(Literal(pred, (gvar[b], gvar[a])))
            elif pred == "hyp_above":
                for a in hp_all:
                    for b in hp_all:
                        if a != b and holds(fb, "hyp_above", (fb.state_id, a, b)):
                            body.append(Literal(pred, (A, hvar[a], hvar[b])))
            elif pred == "hyp_left":
                for i, a in enumerate(hp_all):
                    for b in hp_all[i + 1 :]:
                        if holds(fb, "hyp_left", (a, b)):
                            body.append(Literal(pred, (hvar[a], hvar[b])))
                        elif holds(fb, "hyp_left", (b, a)):
                            body.append(Literal(pred, (hvar[b], hvar[a])))
            elif pred == "dif":
                for i, a in enumerate(gp):
                    for b in gp[i + 1 :]:
                        body.append(Literal(pred, (gvar[a], gvar[b])))
            elif pred == "eq_goal_term":
                for i, a in enumerate(gp):
                    for b in gp[i + 1 :]:
                        if fb.goal_struct_id(a) == fb.goal_struct_id(b):
                            body.append(Literal(pred, (A, gvar[a], gvar[b])))
            elif pred == "eq_goal_hyp_term":
                for g in gp:
                    for h in hp_all:
                        if fb.goal_struct_id(g) == fb.hyp_struct_id(h):
                            body.append(Literal(pred, (A, gvar[g], hvar[h])))
            elif pred == "eq_hyp_term":
                for i, a in enumerate(hp_all):
                    for b in hp_all[i + 1 :]:
                        if a.hyp != b.hyp and fb.hyp_struct_id(a) == fb.hyp_struct_id(b):
                            body.append(Literal(pred, (A, hvar[a], hvar[b])))
            elif pred == "is_goal_root":
                body.append(Literal(pred, (A, gvar[()])))
            elif pred == "is_hyp_root":
                for h in hp_all:
                    if len(h.path) == 0:
                        body.append(Literal(pred, (A, hvar[h])))

    if len(body) > max_bottom:
        log.warning(
            "bottom clause for state %d truncated from %d to %d literals",
            fb.state_id,
            len(body),
            max_bottom,
        )
        body = body[:max_bottom]
    return Clause(head, tuple(body))


# --- coverage ---

class ClauseEvalError(ValueError):
    pass


_NODE_PREDS = ("goal_node", "hyp_node")


def _resolve(arg: Arg, binding: dict[Var, object]) -> object:
    if isinstance(arg, Const):
        return arg.value
    return binding.get(arg, FREE)


def _literal_solutions(
    lit: Literal, fb: FactBase, binding: dict[Var, object]
) -> Iterator[dict[Var, object]]:
    """Every extension of ``binding`` (as a {var: value} delta, not applied)
    that satisfies ``lit`` in the state, in deterministic order."""
    pred = lit.pred
    pattern = tuple(_resolve(a, binding) for a in lit.args)

    if pred in _NODE_PREDS:
        try:
            solutions = enumerate_solutions(fb, pred, pattern)
        except ValueError as e:
            raise ClauseEvalError(str(e)) from None
        for sol in solutions:
            ext: dict[Var, object] = {}
            ok = True
            for a, value in zip(lit.args, sol):
                if isinstance(a, Var) and binding.get(a, FREE) is FREE:
                    if a in ext and ext[a] != value:
                        ok = False
                        break
                    ext[a] = value
            if ok:
                yield ext
        return

    slots = FEATURE_SIGNATURES.get(pred)
    if slots is None:
        raise ClauseEvalError(f"unknown body predicate {pred!r}")
    free_slots = [i for i, v in enumerate(pattern) if v is FREE]
    if not free_slots:
        if holds(fb, pred, pattern):
            yield {}
        return

    # Free variables in a feature literal range over the state's domains, so
    # coverage does not depend on where the literal sits in the body.
    def domain_for(slot: int) -> Sequence[object]:
        sort = slots[slot][0]
        if sort == "gpos":
            return fb.goal_positions
        if sort == "hpos":
            return fb.hyp_positions
        if sort == "state":
            return (fb.state_id,)
        return ()

    def expand(idx: int, current: list[object], ext: dict[Var, object]) -> Iterator[dict[Var, object]]:
        if idx == len(free_slots):
            if holds(fb, pred, tuple(current)):
                yield dict(ext)
            return
        slot = free_slots[idx]
        var = lit.args[slot]
        assert isinstance(var, Var)
        if var in ext:  # same variable already chosen by an earlier free slot
            current[slot] = ext[var]
            yield from expand(idx + 1, current, ext)
            current[slot] = FREE
            return
        for v in domain_for(slot):
            current[slot] = v
            ext[var] = v
            yield from expand(idx + 1, current, ext)
            del ext[var]
            current[slot] = FREE

    yield from expand(0, list(pattern), {})


def _solve(body: tuple[Literal, ...], i: int, fb: FactBase, binding: dict[Var, object]) -> bool:
    if i == len(body):
        return True
    for ext in _literal_solutions(body[i], fb, binding):
        binding.update(ext)
        if _solve(body, i + 1, fb, binding):
            return True
        for v in ext:
            del binding[v]
    return False


def covers(clause: Clause, fb: FactBase, max_proof_depth: int = 1000) -> bool:
    """True iff some ground substitution satisfies every body literal in the
    state, with the head state variable bound to the state."""
    if len(clause.body) > max_proof_depth:
        log.warning(
            "clause for %r exceeds proof depth %d; treating as non-coverage",
            clause.tactic,
            max_proof_depth,
        )
        return False
    binding: dict[Var, object] = {}
    head_state = clause.head.args[0]
    if isinstance(head_state, Var):
        binding[head_state] = fb.state_id
    elif head_state.value != fb.state_id:
        return False
    return _solve(clause.body, 0, fb, binding)


def mode_consistent(clause: Clause, variant: EncodingVariant) -> bool:
    """Directed variable flow: every input-slot variable of each body literal
    is the head state variable or an output of an earlier literal."""
    if not isinstance(clause.head.args[0], Var):
        return False
    bound: set[Var] = {clause.head.args[0]}
    for lit in clause.body:
        try:
            slots = signature(lit.pred, variant)
        except ValueError:
            return False
        if len(slots) != len(lit.args):
            return False
        outputs: list[Var] = []
        for (_sort, mode), arg in zip(slots, lit.args):
            if isinstance(arg, Const):
                continue
            if mode == "-":
                outputs.append(arg)
            elif arg not in bound:
                return False
        bound.update(outputs)
    return True


# --- best-first refinement search ---

@dataclass
class SearchResult:
    clause: Clause
    pos_covered: tuple[int, ...]
    neg_covered: tuple[int, ...]
    cost: float
    nodes: int
    timed_out: bool = False


def _literal_io(lit: Literal, variant: EncodingVariant) -> tuple[set[Var], set[Var]]:
    slots = signature(lit.pred, variant)
    ins: set[Var] = set()
    outs: set[Var] = set()
    for (_sort, mode), arg in zip(slots, lit.args):
        if isinstance(arg, Var):
            (outs if mode == "-" else ins).add(arg)
    return ins, outs


def search(
    positives: Sequence[FactBase],
    negatives: Sequence[FactBase],
    bottom: Clause,
    budget: SearchBudget,
    cost: CostSpec = CostSpec(),
) -> SearchResult | None:
    """Best-first search over mode-consistent subsequences of the bottom
    clause's body. Returns the best acceptable clause, or None if the budget
    is exhausted without finding one. Deterministic: expansion order is fixed
    and cost ties keep the clause found first.
    """
    if not positives:
        return None
    if budget.max_nodes <= 0:
        return None
    deadline = time.monotonic() + budget.timeout
    custom = len(negatives) == 0 or len(positives) == 1
    variant = positives[0].variant

    lit_io = [_literal_io(l, variant) for l in bottom.body]
    head_var = bottom.head.args[0]
    assert isinstance(head_var, Var)

    def clause_cost(p: int, n: int, length: int) -> float:
        if custom:
            return p * cost.custom_weight - (length - 1)
        return p - n - (length - 1)

    def acceptable(p: int, n: int, c: float) -> bool:
        if custom:
            return p >= cost.custom_min_pos
        return c > cost.floor

    def upper_bound(p: int, length: int) -> float:
        # best score this node or any descendant could reach (N = 0, no growth)
        if custom:
            return p * cost.custom_weight - (length - 1)
        return p - (length - 1)

    nodes = 1  # the bare head counts as the first evaluated clause
    best: SearchResult | None = None
    counter = itertools.count()

    root_pos = tuple(fb.state_id for fb in positives)  # empty body covers all
    root_neg = tuple(fb.state_id for fb in negatives)
    root_cost = clause_cost(len(root_pos), len(root_neg), 1)
    if acceptable(len(root_pos), len(root_neg), root_cost):
        best = SearchResult(Clause(bottom.head, ()), root_pos, root_neg, root_cost, nodes)

    pos_by_id = {fb.state_id: fb for fb in positives}
    neg_by_id = {fb.state_id: fb for fb in negatives}

    # frontier entries: (-cost, seq, literal indices, bound vars, pos ids, neg ids)
    frontier: list[tuple[float, int, tuple[int, ...], frozenset, tuple[int, ...], tuple[int, ...]]] = [
        (-root_cost, next(counter), (), frozenset({head_var}), root_pos, root_neg)
    ]
    timed_out = False

    while frontier:
        if time.monotonic() > deadline:
            timed_out = True
            break
        if nodes >= budget.max_nodes:
            break
        _, _, indices, bound, pos_ids, neg_ids = heapq.heappop(frontier)
        length = 1 + len(indices)
        if length >= budget.max_clause_length:
            continue
        if best is not None and upper_bound(len(pos_ids), length + 1) <= best.cost:
            continue
        start = indices[-1] + 1 if indices else 0
        for j in range(start, len(bottom.body)):
            if nodes >= budget.max_nodes:
                break
            if time.monotonic() > deadline:
                timed_out = True
                break
            ins, outs = lit_io[j]
            if not ins <= bound:
                continue
            child_indices = indices + (j,)
            child_clause = Clause(bottom.head, tuple(bottom.body[k] for k in child_indices))
            nodes += 1
            child_pos = tuple(
                sid for sid in pos_ids if covers(child_clause, pos_by_id[sid], budget.max_proof_depth)
            )
            if not child_pos:
                continue
            child_len = length + 1
            if best is not None and upper_bound(len(child_pos), child_len) <= best.cost:
                continue
            if custom:
                child_neg = neg_ids
                child_cost = clause_cost(len(child_pos), 0, child_len)
            else:
                child_neg = tuple(
                    sid for sid in neg_ids if covers(child_clause, neg_by_id[sid], budget.max_proof_depth)
                )
                child_cost = clause_cost(len(child_pos), len(child_neg), child_len)
            # a literal that changes no coverage and introduces no variable can
            # be dropped from any clause containing it for a strictly better
            # cost, so the whole branch is redundant
            if (
                not (outs - bound)
                and child_pos == pos_ids
                and (custom or child_neg == neg_ids)
            ):
                continue
            if acceptable(len(child_pos), len(child_neg), child_cost) and (
                best is None or child_cost > best.cost
            ):
                best = SearchResult(child_clause, child_pos, child_neg, child_cost, nodes)
            heapq.heappush(
                frontier,
                (-child_cost, next(counter), child_indices, bound | outs, child_pos, child_neg),
            )

    if best is None:
        return None
    if custom:
        # negatives play no role in the custom cost; report true coverage
        best.neg_covered = tuple(
            fb.state_id for fb in negatives if covers(best.clause, fb, budget.max_proof_depth)
        )
    best.nodes = nodes
    best.timed_out = timed_out
    return best


# --- greedy cover loop and merging ---

@dataclass
class TaskReport:
    tactic: str
    variant: Variant
    positives: int
    negatives: int
    clauses_found: int
    uncovered: int
    failed: bool
    seconds: float
    nodes: int


@dataclass
class LearnResult:
    clauses: list[Clause] = field(default_factory=list)
    reports: list[TaskReport] = field(default_factory=list)

    @property
    def any_failed(self) -> bool:
        return any(r.failed for r in self.reports)


def dedup_clauses(clauses: Sequence[Clause]) -> list[Clause]:
    """Remove syntactic duplicates up to variable renaming, keeping the first."""
    seen: set[str] = set()
    out: list[Clause] = []
    for c in clauses:
        key = format_clause(canonical(c))
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def reduce_subsumed(clauses: Sequence[Clause]) -> list[Clause]:
    """Drop clauses theta-subsumed by another clause of the same tactic.

    Shorter clauses are processed first so the more general rule of any
    subsumption pair survives; the output contains no subsumption-related
    pair in either direction.
    """
    by_tactic: dict[str, list[Clause]] = {}
    for c in clauses:
        by_tactic.setdefault(c.tactic, []).append(c)
    kept_all: list[Clause] = []
    for tactic in sorted(by_tactic):
        group = sorted(by_tactic[tactic], key=lambda c: (c.length(), format_clause(canonical(c))))
        kept: list[Clause] = []
        for c in group:
            if any(theta_subsumes(k, c) for k in kept):
                continue
            kept = [k for k in kept if not theta_subsumes(c, k)]
            kept.append(c)
        kept_all.extend(kept)
    return kept_all


def learn_tactic(
    tasks: Sequence,
    encoded: Mapping[int, FactBase],
    budget: SearchBudget,
    cost: CostSpec = CostSpec(),
) -> LearnResult:
    """Greedy cover over each task's positives, then merge: deduplicate up to
    renaming and remove intra-tactic subsumed clauses.

    ``tasks`` is a sequence of :class:`tacrules.selection.LearningTask`, all
    sharing one tactic and one variant. A task stops at the first seed whose
    search finds no acceptable clause; the failure is recorded, not raised.
    """
    result = LearnResult()
    if not tasks:
        return result
    tactics = {t.tactic for t in tasks}
    variants = {t.variant for t in tasks}
    if len(tactics) > 1 or len(variants) > 1:
        raise ValueError("learn_tactic requires tasks sharing one tactic and variant")
    collected: list[Clause] = []
    for task in tasks:
        t0 = time.monotonic()
        total_nodes = 0
        found_count = 0
        failed = False
        uncovered = sorted(task.positives)
        negatives = [encoded[i] for i in task.negatives]
        while uncovered:
            seed = uncovered[0]
            bottom = saturate(
                encoded[seed],
                task.tactic,
                with_features=task.variant.with_features,
                depth=budget.saturation_variable_depth,
                max_bottom=budget.max_bottom_literals,
            )
            positives = [encoded[i] for i in uncovered]
            res = search(positives, negatives, bottom, budget, cost)
            if res is None:
                total_nodes += budget.max_nodes
                failed = True
                break
            total_nodes += res.nodes
            if seed not in res.pos_covered:
                # cannot happen for subsequences of the seed's own bottom clause
                log.error("search returned a clause not covering its seed %d", seed)
                failed = True
                break
            collected.append(res.clause)
            found_count += 1
            covered = set(res.pos_covered)
            uncovered = [p for p in uncovered if p not in covered]
        result.reports.append(
            TaskReport(
                tactic=task.tactic,
                variant=task.variant,
                positives=len(task.positives),
                negatives=len(task.negatives),
                clauses_found=found_count,
                uncovered=len(uncovered),
                failed=failed,
                seconds=time.monotonic() - t0,
                nodes=total_nodes,
            )
        )
    result.clauses = reduce_subsumed(dedup_clauses(collected))
    return result
