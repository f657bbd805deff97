"""Building per-tactic learning tasks.

Three steps: orthogonalization relabels a state with the first of the four
automation tactics (assumption, reflexivity, trivial, auto) that closes it,
according to a pluggable oracle table; positives of each tactic are split
into roughly equal-sized clusters by a size-constrained k-means; negatives
for a cluster are the nearest other-tactic states of its members, ranked by
k-NN distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ilp import Variant
from .knn import FeatureVector, NeighborModel, extract_features
from .terms import Corpus, Split

AUTOMATION_ORDER = ("assumption", "reflexivity", "trivial", "auto")
# closed-by relations: assumption and reflexivity imply trivial, trivial
# implies auto
_IMPLIES = (("assumption", "trivial"), ("reflexivity", "trivial"), ("trivial", "auto"))


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class AutomationOracle:
    """Which automation tactics close each state. Missing ids mean none."""

    table: dict[int, frozenset[str]]

    def __post_init__(self) -> None:
        for sid, closes in self.table.items():
            unknown = closes - set(AUTOMATION_ORDER)
            if unknown:
                raise OracleError(f"state {sid}: unknown automation tactic {sorted(unknown)}")
            for weaker, stronger in _IMPLIES:
                if weaker in closes and stronger not in closes:
                    raise OracleError(
                        f"state {sid}: {weaker} closes the state but {stronger} does not"
                    )

    def closes(self, state_id: int) -> frozenset[str]:
        return self.table.get(state_id, frozenset())


def parse_oracle(lines: Iterable[str]) -> AutomationOracle:
    """Line format: ``id: <int> closes: [name, name, ...]``."""
    table: dict[int, frozenset[str]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            head, closes_part = line.split("closes:", 1)
            if not head.strip().startswith("id:"):
                raise ValueError
            sid = int(head.strip()[3:].strip())
            inner = closes_part.strip()
            if not (inner.startswith("[") and inner.endswith("]")):
                raise ValueError
            names = [n.strip() for n in inner[1:-1].split(",") if n.strip()]
        except ValueError:
            raise OracleError(f"line {lineno}: expected 'id: <int> closes: [...]'") from None
        if sid in table:
            raise OracleError(f"line {lineno}: duplicate id {sid}")
        table[sid] = frozenset(names)
    return AutomationOracle(table)


def load_oracle(path: str) -> AutomationOracle:
    with open(path, "r", encoding="utf-8") as f:
        return parse_oracle(f)


def format_oracle(oracle: AutomationOracle) -> str:
    lines = []
    for sid in sorted(oracle.table):
        names = ", ".join(sorted(oracle.table[sid]))
        lines.append(f"id: {sid} closes: [{names}]")
    return "\n".join(lines) + ("\n" if lines else "")


def orthogonalize(corpus: Corpus, oracle: AutomationOracle) -> Corpus:
    """Relabel each state with the first automation tactic that closes it
    (fixed order: assumption, reflexivity, trivial, auto); states closed by
    none keep their label. Applied uniformly to every split so that
    evaluation sees the same label space as learning. Idempotent."""
    labels: dict[int, str] = {}
    for s in corpus.states:
        closes = oracle.closes(s.id)
        for tac in AUTOMATION_ORDER:
            if tac in closes:
                labels[s.id] = tac
                break
    return corpus.relabeled(labels)


# --- constrained k-means ---

def _dense_matrix(vectors: Sequence[FeatureVector], idf: Mapping[str, float] | None) -> np.ndarray:
    tokens = sorted({tok for v in vectors for tok, _ in v.counts})
    index = {tok: i for i, tok in enumerate(tokens)}
    mat = np.zeros((len(vectors), max(len(tokens), 1)), dtype=float)
    for r, v in enumerate(vectors):
        for tok, n in v.counts:
            w = 1.0 if idf is None else idf.get(tok, 0.0)
            mat[r, index[tok]] = n * w
    return mat


def cluster_positives(
    positives: Sequence[FeatureVector],
    target_size: int,
    idf: Mapping[str, float] | None = None,
    seed: int = 0,
    max_iter: int = 50,
) -> list[list[int]]:
    """Partition indices 0..len(positives)-1 into ceil(n/target_size)
    clusters whose sizes all lie in [floor(n/k), ceil(n/k)].

    k-means with the assignment step solved exactly as a min-cost matching of
    points to per-cluster slots (squared Euclidean over idf-weighted
    vectors), so the size bounds hold at every iteration. Deterministic for a
    fixed seed.
    """
    n = len(positives)
    if n == 0:
        raise ValueError("cannot cluster an empty positive set")
    if target_size < 1:
        raise ValueError("target cluster size must be >= 1")
    k = math.ceil(n / target_size)
    if k <= 1:
        return [list(range(n))]

    base, extra = divmod(n, k)
    sizes = [base + 1] * extra + [base] * (k - extra)
    data = _dense_matrix(positives, idf)
    rng = np.random.default_rng(seed)
    centers = data[rng.choice(n, size=k, replace=False)].copy()

    # slot c repeated sizes[c] times; column j belongs to cluster slot_owner[j]
    slot_owner = np.repeat(np.arange(k), sizes)
    assign = np.full(n, -1)
    for _ in range(max_iter):
        # squared distances point x cluster, expanded to slots
        d2 = ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        cost = d2[:, slot_owner]
        rows, cols = linear_sum_assignment(cost)
        new_assign = np.full(n, -1)
        new_assign[rows] = slot_owner[cols]
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = data[assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return [sorted(int(i) for i in np.flatnonzero(assign == c)) for c in range(k)]


# --- learning tasks ---

@dataclass(frozen=True)
class LearningTask:
    tactic: str
    positives: tuple[int, ...]
    negatives: tuple[int, ...]  # ascending k-NN distance from the cluster
    variant: Variant

    def __post_init__(self) -> None:
        if set(self.positives) & set(self.negatives):
            raise ValueError(f"task for {self.tactic!r}: positives and negatives overlap")


def build_tasks(
    corpus: Corpus,
    model: NeighborModel,
    pos_size: int,
    neg_per_pos: int,
    variant: Variant,
    seed: int = 0,
) -> list[LearningTask]:
    """One task per positive cluster of each training tactic.

    A cluster's negatives are the union of its members' ``neg_per_pos``
    nearest other-tactic training states, deduplicated and ordered by the
    members' minimum distance (ties by state id).
    """
    train = sorted(corpus.states_in(Split.TRAIN), key=lambda s: s.id)
    by_id = {s.id: s for s in train}
    dist_cache: dict[int, list[tuple[float, int, str]]] = {}

    def distances_from(sid: int) -> list[tuple[float, int, str]]:
        if sid not in dist_cache:
            qv = extract_features(by_id[sid], model.walk_length)
            dist_cache[sid] = model.distances(qv)
        return dist_cache[sid]

    tactics = sorted({s.tactic for s in train})
    tasks: list[LearningTask] = []
    for tactic in tactics:
        members = [s for s in train if s.tactic == tactic]
        if not members:
            continue
        vectors = [extract_features(s, model.walk_length) for s in members]
        clusters = cluster_positives(vectors, pos_size, idf=model.idf, seed=seed)
        for cluster in clusters:
            pos_ids = tuple(members[i].id for i in cluster)
            best_dist: dict[int, float] = {}
            for i in cluster:
                ranked = sorted(
                    (d, sid) for d, sid, tac in distances_from(members[i].id) if tac != tactic
                )
                for d, sid in ranked[: max(neg_per_pos, 0)]:
                    if sid not in best_dist or d < best_dist[sid]:
                        best_dist[sid] = d
            neg_ids = tuple(sid for _, sid in sorted((d, sid) for sid, d in best_dist.items()))
            tasks.append(LearningTask(tactic, pos_ids, neg_ids, variant))
    return tasks
