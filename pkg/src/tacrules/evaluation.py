"""Metrics, the (pos, neg, qualt) sweep, and test-split reporting.

Metrics are exact rationals: F-1 is 2TP/(2TP+FP+FN) and rule precision is
TP/(TP+FP); undefined values (zero denominators) surface as ``n/a`` in
reports, never as a silent 0. Reports are deterministic given seeds: rows
are emitted in a fixed sort order and wall-clock timings live in a separate
sidecar, not in the report body.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .encoding import encode
from .ilp import CostSpec, SearchBudget, Variant, learn_tactic
from .knn import Preselection, fit, preselect
from .rules import ConfusionCounts, PredictionEvent, RuleSet, accumulate_stats, prune
from .selection import build_tasks
from .terms import Corpus, Split

TOPK_MAX = 50

POS_GRID = (1, 2, 4, 8, 16, 32)
NEG_GRID = (0, 1, 2, 4, 8, 16, 32, 64)
QUALT_GRID = tuple(Fraction(n, 100) for n in (0, 6, 12, 18, 24, 30))


def f1(c: ConfusionCounts) -> Fraction | None:
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return None
    return Fraction(2 * c.tp, denom)


def precision(c: ConfusionCounts) -> Fraction | None:
    if c.tp + c.fp == 0:
        return None
    return Fraction(c.tp, c.tp + c.fp)


def topk_accuracy(
    ranked: Sequence[Sequence[str]], truths: Sequence[str], k: int
) -> Fraction:
    """Fraction of states whose true tactic appears among the first k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(ranked) != len(truths):
        raise ValueError("ranked predictions and truth labels differ in length")
    if not truths:
        return Fraction(0)
    hits = sum(1 for preds, truth in zip(ranked, truths) if truth in list(preds)[:k])
    return Fraction(hits, len(truths))


@dataclass(frozen=True)
class SweepGrid:
    pos_values: tuple[int, ...] = (1,)
    neg_values: tuple[int, ...] = (0,)
    qualt_values: tuple[Fraction, ...] = QUALT_GRID
    variants: tuple[Variant, ...] = (Variant.AF,)
    strict: bool = True  # restrict values to the published grids

    def __post_init__(self) -> None:
        for p in self.pos_values:
            if self.strict and p not in POS_GRID:
                raise ValueError(f"pos value {p} outside the sweep grid {POS_GRID}")
            if p < 1 or p > 32:
                raise ValueError(f"pos value {p} out of range [1, 32]")
        for n in self.neg_values:
            if self.strict and n not in NEG_GRID:
                raise ValueError(f"neg value {n} outside the sweep grid {NEG_GRID}")
            if n < 0 or n > 64:
                raise ValueError(f"neg value {n} out of range [0, 64]")
        for q in self.qualt_values:
            if self.strict and q not in QUALT_GRID:
                raise ValueError(f"qualt value {q} outside the sweep grid")
            if q < 0 or q > Fraction(30, 100):
                raise ValueError(f"qualt value {q} out of range [0, 0.30]")
        if not self.variants:
            raise ValueError("at least one variant required")


@dataclass(frozen=True)
class ReportRow:
    variant: str
    pos: int | None
    neg: int | None
    qualt: Fraction | None
    split: str
    theory: str  # "ALL" pools every theory of the split
    counts: ConfusionCounts | None
    topk: tuple[Fraction, ...]  # indices 0..49 give top-1..top-50

    def sort_key(self) -> tuple:
        return (
            self.variant,
            -1 if self.pos is None else self.pos,
            -1 if self.neg is None else self.neg,
            Fraction(-1) if self.qualt is None else self.qualt,
            self.split,
            self.theory,
        )


def _fmt(x: Fraction | int | None, places: int = 6) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, int):
        return str(x)
    return format(float(x), f".{places}f")


def format_report(rows: Sequence[ReportRow]) -> str:
    header = ["variant", "pos", "neg", "qualt", "split", "theory", "tp", "fp", "tn", "fn", "f1"]
    header += [f"top{k}" for k in range(1, TOPK_MAX + 1)]
    lines = ["\t".join(header)]
    for r in sorted(rows, key=ReportRow.sort_key):
        c = r.counts
        cells = [
            r.variant,
            _fmt(r.pos),
            _fmt(r.neg),
            "n/a" if r.qualt is None else format(float(r.qualt), ".2f"),
            r.split,
            r.theory,
            _fmt(c.tp if c else None),
            _fmt(c.fp if c else None),
            _fmt(c.tn if c else None),
            _fmt(c.fn if c else None),
            _fmt(f1(c) if c else None),
        ]
        cells += [_fmt(v) for v in r.topk]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


# --- shared event bookkeeping ---

@dataclass
class _StateOutcome:
    theory: str
    truth: str
    order: list[str]  # preselection order
    accepted: list[bool]

    def reordered(self) -> list[str]:
        goods = [t for t, a in zip(self.order, self.accepted) if a]
        bads = [t for t, a in zip(self.order, self.accepted) if not a]
        return goods + bads


def _outcomes(
    events: Sequence[PredictionEvent],
    kept_ids: set[int] | None,
    theory_of: Mapping[int, str],
    truth_of: Mapping[int, str],
) -> dict[int, _StateOutcome]:
    out: dict[int, _StateOutcome] = {}
    for e in events:
        o = out.get(e.state_id)
        if o is None:
            o = _StateOutcome(theory_of[e.state_id], truth_of[e.state_id], [], [])
            out[e.state_id] = o
        accepted = e.accepted if kept_ids is None else bool(set(e.rule_ids) & kept_ids)
        o.order.append(e.tactic)
        o.accepted.append(accepted)
    return out


def _confusion(outcomes: Sequence[_StateOutcome]) -> ConfusionCounts:
    c = ConfusionCounts()
    for o in outcomes:
        for tactic, accepted in zip(o.order, o.accepted):
            c = c.add(tactic == o.truth, accepted)
    return c


def _topk_vector(ranked: Sequence[Sequence[str]], truths: Sequence[str]) -> tuple[Fraction, ...]:
    if not truths:
        return tuple(Fraction(0) for _ in range(TOPK_MAX))
    ranks: list[int | None] = []
    for preds, truth in zip(ranked, truths):
        preds = list(preds)
        ranks.append(preds.index(truth) + 1 if truth in preds else None)
    n = len(truths)
    return tuple(
        Fraction(sum(1 for r in ranks if r is not None and r <= k), n)
        for k in range(1, TOPK_MAX + 1)
    )


def _rows_for(
    outcomes: dict[int, _StateOutcome],
    variant: str,
    pos: int | None,
    neg: int | None,
    qualt: Fraction | None,
    split: str,
    reorder: bool,
) -> list[ReportRow]:
    by_theory: dict[str, list[_StateOutcome]] = {}
    ordered = [outcomes[sid] for sid in sorted(outcomes)]
    for o in ordered:
        by_theory.setdefault(o.theory, []).append(o)
    rows = []
    for theory, group in sorted(by_theory.items()):
        ranked = [o.reordered() if reorder else o.order for o in group]
        rows.append(
            ReportRow(
                variant,
                pos,
                neg,
                qualt,
                split,
                theory,
                _confusion(group),
                _topk_vector(ranked, [o.truth for o in group]),
            )
        )
    ranked = [o.reordered() if reorder else o.order for o in ordered]
    rows.append(
        ReportRow(
            variant,
            pos,
            neg,
            qualt,
            split,
            "ALL",
            _confusion(ordered),
            _topk_vector(ranked, [o.truth for o in ordered]),
        )
    )
    return rows


@dataclass(frozen=True)
class BestCell:
    pos: int
    neg: int
    qualt: Fraction
    f1: Fraction


@dataclass
class SweepResult:
    rows: list[ReportRow]
    best: dict[Variant, BestCell]
    rulesets: dict[tuple[Variant, int, int], RuleSet]  # with validation stats
    timings: list[tuple[str, int, int, str, float]]  # variant, pos, neg, tactic, seconds
    any_failed: bool = False

    def best_ruleset(self, variant: Variant) -> RuleSet | None:
        cell = self.best.get(variant)
        if cell is None:
            return None
        return prune(self.rulesets[(variant, cell.pos, cell.neg)], cell.qualt)


def run_sweep(
    corpus: Corpus,
    grid: SweepGrid,
    budget: SearchBudget,
    cost: CostSpec = CostSpec(),
    knn_k: int = 17,
    walk_length: int = 2,
    seed: int = 0,
) -> SweepResult:
    """Learn rules for every (variant, pos, neg) cell on the training split,
    evaluate on the validation split, and record the F-1 of each qualt
    pruning level. The corpus is expected to be orthogonalized already.
    Individual task failures are recorded and the sweep continues.
    """
    train = sorted(corpus.states_in(Split.TRAIN), key=lambda s: s.id)
    valid = sorted(corpus.states_in(Split.VALIDATION), key=lambda s: s.id)
    if not train:
        raise ValueError("sweep requires a nonempty training split")
    if not valid:
        raise ValueError("sweep requires a nonempty validation split")
    model = fit(train, walk_length)
    presel = {s.id: preselect(model, s, knn_k) for s in valid}
    theory_of = {s.id: s.theory for s in valid}
    truth_of = {s.id: s.tactic for s in valid}

    result = SweepResult(rows=[], best={}, rulesets={}, timings=[])
    for variant in sorted(grid.variants, key=lambda v: v.value):
        encoded = {s.id: encode(s, variant.encoding) for s in train}
        valid_fb = {s.id: encode(s, variant.encoding) for s in valid}
        dataset = [(valid_fb[s.id], s.tactic, presel[s.id]) for s in valid]
        for pos in grid.pos_values:
            for neg in grid.neg_values:
                tasks = build_tasks(corpus, model, pos, neg, variant, seed)
                clauses = []
                for tactic in sorted({t.tactic for t in tasks}):
                    res = learn_tactic(
                        [t for t in tasks if t.tactic == tactic], encoded, budget, cost
                    )
                    clauses.extend(res.clauses)
                    result.any_failed = result.any_failed or res.any_failed
                    for rep in res.reports:
                        result.timings.append(
                            (variant.value, pos, neg, rep.tactic, rep.seconds)
                        )
                ruleset = RuleSet.from_clauses(clauses, variant)
                with_stats, events = accumulate_stats(ruleset, dataset, budget.max_proof_depth)
                result.rulesets[(variant, pos, neg)] = with_stats
                for qualt in grid.qualt_values:
                    kept = {r.id for r in prune(with_stats, qualt).rules}
                    outcomes = _outcomes(events, kept, theory_of, truth_of)
                    result.rows.extend(
                        _rows_for(outcomes, variant.value, pos, neg, qualt, "validation", True)
                    )
                    pooled = _confusion([outcomes[sid] for sid in sorted(outcomes)])
                    score = f1(pooled)
                    if score is not None:
                        cell = BestCell(pos, neg, qualt, score)
                        cur = result.best.get(variant)
                        if (
                            cur is None
                            or score > cur.f1
                            or (score == cur.f1 and (pos, neg, qualt) < (cur.pos, cur.neg, cur.qualt))
                        ):
                            result.best[variant] = cell
    result.rows.sort(key=ReportRow.sort_key)
    return result


@dataclass
class TestResult:
    rows: list[ReportRow]


def run_test(
    corpus: Corpus,
    rulesets: Mapping[Variant, RuleSet],
    knn_k: int = 17,
    walk_length: int = 2,
    max_proof_depth: int = 1000,
) -> TestResult:
    """Evaluate pruned rule sets on the test split: per-theory (plus pooled)
    confusion/F-1 over preselections, and top-k accuracy for plain k-NN
    (variant column ``KNN``) and for rule-reordered predictions."""
    train = sorted(corpus.states_in(Split.TRAIN), key=lambda s: s.id)
    test = sorted(corpus.states_in(Split.TEST), key=lambda s: s.id)
    if not train:
        raise ValueError("test run requires a training split for the k-NN model")
    if not test:
        raise ValueError("test run requires a nonempty test split")
    model = fit(train, walk_length)
    presel = {s.id: preselect(model, s, knn_k) for s in test}
    theory_of = {s.id: s.theory for s in test}
    truth_of = {s.id: s.tactic for s in test}

    rows: list[ReportRow] = []
    plain = {
        s.id: _StateOutcome(s.theory, s.tactic, list(presel[s.id].tactics), [])
        for s in test
    }
    for o in plain.values():
        o.accepted = [False] * len(o.order)
    rows.extend(_rows_for(plain, "KNN", None, None, None, "test", False))

    for variant in sorted(rulesets, key=lambda v: v.value):
        rs = rulesets[variant]
        encoded = {s.id: encode(s, variant.encoding) for s in test}
        dataset = [(encoded[s.id], s.tactic, presel[s.id]) for s in test]
        _, events = accumulate_stats(rs, dataset, max_proof_depth)
        outcomes = _outcomes(events, None, theory_of, truth_of)
        rows.extend(_rows_for(outcomes, variant.value, None, None, None, "test", True))
    rows.sort(key=ReportRow.sort_key)
    return TestResult(rows)
