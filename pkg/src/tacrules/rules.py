"""Learned rules as a prediction filter.

A rule set accepts a (state, tactic) pair when at least one rule for that
tactic covers the state. Reordering is a stable partition of the k-NN
preselection: accepted tactics first, rejected after, both in their original
relative order. Per-rule true/false-positive counts accumulated on a
validation run drive precision pruning: a rule whose precision falls below
the quality threshold is dropped (strictly below: a rule exactly at the
threshold survives; rules that never fired are dropped at any positive
threshold).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import IO, Iterable, Sequence

from .clauses import Clause, format_clause, parse_rules
from .encoding import FactBase
from .ilp import Variant, covers
from .knn import Preselection


class VariantMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    id: int
    clause: Clause
    tp: int = 0
    fp: int = 0

    @property
    def tactic(self) -> str:
        return self.clause.tactic

    @property
    def precision(self) -> Fraction | None:
        fired = self.tp + self.fp
        if fired == 0:
            return None
        return Fraction(self.tp, fired)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, expected: bool, accepted: bool) -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + (expected and accepted),
            fp=self.fp + (accepted and not expected),
            tn=self.tn + (not accepted and not expected),
            fn=self.fn + (expected and not accepted),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    variant: Variant
    counts: ConfusionCounts = field(default_factory=ConfusionCounts)

    @classmethod
    def from_clauses(cls, clauses: Iterable[Clause], variant: Variant) -> "RuleSet":
        return cls(tuple(Rule(i, c) for i, c in enumerate(clauses)), variant)

    def for_tactic(self, tactic: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.tactic == tactic)

    def accepts(
        self, fb: FactBase, tactic: str, max_proof_depth: int = 1000
    ) -> tuple[bool, list[int]]:
        """Whether any rule for ``tactic`` covers the state; returns all
        covering rule ids (every covering rule shares the stat credit)."""
        if fb.variant is not self.variant.encoding:
            raise VariantMismatchError(
                f"rule set is {self.variant.value}, state encoded {fb.variant.value}"
            )
        hits = [
            r.id
            for r in self.rules
            if r.tactic == tactic and covers(r.clause, fb, max_proof_depth)
        ]
        return (bool(hits), hits)

    def reorder(self, fb: FactBase, preselection: Preselection) -> list[str]:
        """Stable partition: accepted tactics keep their order, then rejected
        ones keep theirs. Always a permutation of the input."""
        goods: list[str] = []
        bads: list[str] = []
        for tactic in preselection.tactics:
            accepted, _ = self.accepts(fb, tactic)
            (goods if accepted else bads).append(tactic)
        return goods + bads


@dataclass(frozen=True)
class PredictionEvent:
    """One (state, preselected tactic) decision, for stat re-derivations."""

    state_id: int
    tactic: str
    expected: bool
    accepted: bool
    rule_ids: tuple[int, ...]


def accumulate_stats(
    ruleset: RuleSet,
    dataset: Sequence[tuple[FactBase, str, Preselection]],
    max_proof_depth: int = 1000,
) -> tuple[RuleSet, list[PredictionEvent]]:
    """Run every preselected tactic of every state through the rules.

    A prediction is expected iff the preselected tactic equals the state's
    true tactic, and declared positive iff the rules accept it. Every
    covering rule's tp/fp is credited; the global confusion counts each
    prediction once. Tactics with no rules at all count as rejected.
    """
    tp = {r.id: r.tp for r in ruleset.rules}
    fp = {r.id: r.fp for r in ruleset.rules}
    counts = ruleset.counts
    events: list[PredictionEvent] = []
    for fb, truth, presel in dataset:
        for tactic in presel.tactics:
            expected = tactic == truth
            accepted, hits = ruleset.accepts(fb, tactic, max_proof_depth)
            for rid in hits:
                if expected:
                    tp[rid] += 1
                else:
                    fp[rid] += 1
            counts = counts.add(expected, accepted)
            events.append(PredictionEvent(fb.state_id, tactic, expected, accepted, tuple(hits)))
    rules = tuple(replace(r, tp=tp[r.id], fp=fp[r.id]) for r in ruleset.rules)
    return RuleSet(rules, ruleset.variant, counts), events


def prune(ruleset: RuleSet, qualt: Fraction) -> RuleSet:
    """Drop rules with precision strictly below ``qualt``. Rules that never
    fired have no evidence: kept only at qualt == 0."""
    if qualt < 0:
        raise ValueError("quality threshold must be nonnegative")
    kept = []
    for r in ruleset.rules:
        p = r.precision
        if p is None:
            if qualt > 0:
                continue
        elif p < qualt:
            continue
        kept.append(r)
    return RuleSet(tuple(kept), ruleset.variant, ruleset.counts)


# --- persistence: rule file plus a sidecar stats table ---

def save_rules(ruleset: RuleSet, f: IO[str]) -> None:
    f.write(f"% variant: {ruleset.variant.value}\n")
    for r in ruleset.rules:
        f.write(format_clause(r.clause) + "\n")


def load_rules(f: IO[str], variant: Variant | None = None) -> RuleSet:
    text = f.read()
    header_variant: Variant | None = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("% variant:"):
            header_variant = Variant(stripped.split(":", 1)[1].strip())
            break
        if stripped and not stripped.startswith("%"):
            break
    use = variant or header_variant
    if use is None:
        raise ValueError("rule file has no variant header; pass the variant explicitly")
    clauses = parse_rules(text)
    return RuleSet.from_clauses(clauses, use)


def save_stats(ruleset: RuleSet, f: IO[str]) -> None:
    f.write("rule_id\ttp\tfp\tprecision\n")
    for r in ruleset.rules:
        p = r.precision
        f.write(f"{r.id}\t{r.tp}\t{r.fp}\t{'n/a' if p is None else format(float(p), '.6f')}\n")


def load_stats(ruleset: RuleSet, f: IO[str]) -> RuleSet:
    rules = {r.id: r for r in ruleset.rules}
    header = f.readline()
    if not header.startswith("rule_id"):
        raise ValueError("stats file missing header")
    for line in f:
        if not line.strip():
            continue
        rid_s, tp_s, fp_s, _prec = line.rstrip("\n").split("\t")
        rid = int(rid_s)
        if rid in rules:
            rules[rid] = replace(rules[rid], tp=int(tp_s), fp=int(fp_s))
    return RuleSet(tuple(rules[r.id] for r in ruleset.rules), ruleset.variant, ruleset.counts)
