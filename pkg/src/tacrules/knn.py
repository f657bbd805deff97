"""Tree-walk features and nearest-neighbor services.

One model serves two jobs: the tactic preselector (top-50 ranked tactics for
a query state) and the generic nearest-neighbor search used to pick negative
examples. Features are node-label unigrams plus vertical label digrams
(parent/child walks), with hypothesis-derived tokens prefixed ``h:``.
Similarity is idf-weighted cosine; neighbor voting with a configurable k
scores tactics. This is a documented, configurable approximation of the
proof-assistant k-NN it stands in for, not a reimplementation of it.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Sequence

from .terms import ProofState, Term

FORMAT_VERSION = 1


@dataclass(frozen=True)
class FeatureVector:
    counts: tuple[tuple[str, int], ...]  # sorted by token

    @classmethod
    def from_counter(cls, c: Counter) -> "FeatureVector":
        return cls(tuple(sorted(c.items())))

    def as_dict(self) -> dict[str, int]:
        return dict(self.counts)

    def __len__(self) -> int:
        return sum(n for _, n in self.counts)


def _walk_tokens(term: Term, walk_length: int, prefix: str, out: Counter) -> None:
    # vertical walks: chains of labels from ancestor to descendant, length
    # 1 (unigrams) up to walk_length, joined by '/'
    stack: list[tuple[Term, tuple[str, ...]]] = [(term, ())]
    while stack:
        node, ancestors = stack.pop()
        chain = ancestors + (node.label.name,)
        for w in range(1, min(walk_length, len(chain)) + 1):
            out[prefix + "/".join(chain[-w:])] += 1
        keep = chain[-(walk_length - 1) :] if walk_length > 1 else ()
        for child in node.children:
            stack.append((child, keep))


def extract_features(state: ProofState, walk_length: int = 2) -> FeatureVector:
    """Multiset of label walks: every node token and every parent/child
    digram (longer vertical walks if configured), goal and hypotheses alike,
    hypothesis tokens prefixed ``h:``."""
    c: Counter = Counter()
    _walk_tokens(state.goal, walk_length, "", c)
    for _, body in state.hypotheses:
        _walk_tokens(body, walk_length, "h:", c)
    return FeatureVector.from_counter(c)


@dataclass(frozen=True)
class ModelEntry:
    state_id: int
    tactic: str
    vector: FeatureVector


class NeighborModel:
    """Fitted store of training vectors with idf weights."""

    def __init__(self, entries: Sequence[ModelEntry], idf: dict[str, float], walk_length: int):
        self.entries = tuple(entries)
        self.idf = dict(idf)
        self.walk_length = walk_length
        self._norms = tuple(self._norm(e.vector) for e in self.entries)

    def _norm(self, v: FeatureVector) -> float:
        return math.sqrt(sum((n * self.idf.get(tok, 0.0)) ** 2 for tok, n in v.counts))

    def similarity(self, a: FeatureVector, b: FeatureVector, norm_a: float | None = None, norm_b: float | None = None) -> float:
        if norm_a is None:
            norm_a = self._norm(a)
        if norm_b is None:
            norm_b = self._norm(b)
        if norm_a == 0.0 or norm_b == 0.0:
            return 0.0
        bd = b.as_dict()
        dot = 0.0
        for tok, n in a.counts:  # counts are token-sorted: deterministic sums
            m = bd.get(tok)
            if m is not None:
                dot += (n * self.idf.get(tok, 0.0)) * (m * self.idf.get(tok, 0.0))
        return dot / (norm_a * norm_b)

    def distances(self, query: FeatureVector) -> list[tuple[float, int, str]]:
        """(distance, state_id, tactic) for every entry; distance in [0, 1]."""
        qn = self._norm(query)
        return [
            (1.0 - self.similarity(query, e.vector, qn, n), e.state_id, e.tactic)
            for e, n in zip(self.entries, self._norms)
        ]


def fit(train: Sequence[ProofState], walk_length: int = 2) -> NeighborModel:
    """idf(f) = ln(1 + N/df(f)); entries keep input order."""
    if not train:
        raise ValueError("cannot fit a neighbor model on an empty training set")
    entries = [ModelEntry(s.id, s.tactic, extract_features(s, walk_length)) for s in train]
    df: Counter = Counter()
    for e in entries:
        df.update({tok for tok, _ in e.vector.counts})
    n = len(entries)
    idf = {tok: math.log(1.0 + n / d) for tok, d in sorted(df.items())}
    return NeighborModel(entries, idf, walk_length)


def nearest_negatives(
    model: NeighborModel, query: ProofState, excluded_tactic: str, count: int
) -> list[int]:
    """Ids of the ``count`` nearest training states whose tactic differs from
    ``excluded_tactic``, ascending by distance, ties by state id."""
    if count <= 0:
        return []
    qv = extract_features(query, model.walk_length)
    ranked = sorted(
        (d, sid) for d, sid, tac in model.distances(qv) if tac != excluded_tactic
    )
    return [sid for _, sid in ranked[:count]]


@dataclass(frozen=True)
class Preselection:
    ranked: tuple[tuple[str, float], ...]  # (tactic, score), scores non-increasing

    @property
    def tactics(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.ranked)


def preselect(model: NeighborModel, query: ProofState, k: int = 17, limit: int = 50) -> Preselection:
    """Rank up to ``limit`` distinct tactics by summed similarity over the k
    nearest entries carrying each tactic. Deterministic: neighbor ties break
    by state id, score ties by tactic name."""
    qv = extract_features(query, model.walk_length)
    neighbors = sorted(model.distances(qv))[: max(k, 0)]
    scores: dict[str, float] = {}
    for d, _sid, tac in neighbors:
        scores[tac] = scores.get(tac, 0.0) + (1.0 - d)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:limit]
    return Preselection(tuple(ranked))


# --- persistence ---

def save_model(model: NeighborModel, f: IO[str]) -> None:
    obj = {
        "version": FORMAT_VERSION,
        "walk_length": model.walk_length,
        "idf": {tok: w for tok, w in sorted(model.idf.items())},
        "entries": [
            {"id": e.state_id, "tactic": e.tactic, "features": e.vector.as_dict()}
            for e in model.entries
        ],
    }
    json.dump(obj, f, separators=(",", ":"), sort_keys=True)


def load_model(f: IO[str]) -> NeighborModel:
    obj = json.load(f)
    if obj.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {obj.get('version')!r}")
    entries = [
        ModelEntry(
            e["id"],
            e["tactic"],
            FeatureVector.from_counter(Counter({k: int(v) for k, v in e["features"].items()})),
        )
        for e in obj["entries"]
    ]
    return NeighborModel(entries, {k: float(v) for k, v in obj["idf"].items()}, int(obj["walk_length"]))
