"""Corpus ingestion and serialization.

The on-disk corpus format is UTF-8 JSON lines, one proof state per line:

    {"id": 3, "theory": "Lists", "tactic": "simpl",
     "goal": {"k": "const", "n": "Coq.Init.Nat.sub", "c": [...]},
     "hyps": [{"name": "H", "body": {...}}]}

Node objects carry ``k`` (one of ``ind``/``const``/``constr``/``var``/``op``),
``n`` (the node name) and ``c`` (the child list; may be omitted when empty).
Serialization is canonical: fixed key order, compact separators, explicit
``c``, normalized tactic text. ``serialize(parse(serialize(x))) ==
serialize(x)`` for any parseable input.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Sequence

from .terms import (
    Category,
    Corpus,
    NodeLabel,
    ProofState,
    Split,
    Term,
    default_split,
    normalize_tactic,
)

_KIND_TO_CATEGORY = {
    "ind": Category.INDUCTIVE,
    "const": Category.CONSTANT,
    "constr": Category.CONSTRUCTOR,
    "var": Category.VARIABLE,
}
_CATEGORY_TO_KIND = {v: k for k, v in _KIND_TO_CATEGORY.items()}


class CorpusError(ValueError):
    """Malformed corpus input; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _term_from_obj(obj: object, line: int) -> Term:
    if not isinstance(obj, dict):
        raise CorpusError(f"node must be an object, got {type(obj).__name__}", line)
    try:
        kind = obj["k"]
        name = obj["n"]
    except KeyError as e:
        raise CorpusError(f"node missing field {e.args[0]!r}", line) from None
    if not isinstance(kind, str) or not isinstance(name, str):
        raise CorpusError("node fields 'k' and 'n' must be strings", line)
    children = obj.get("c", [])
    if not isinstance(children, list):
        raise CorpusError("node field 'c' must be a list", line)
    if kind == "op":
        category = None
    elif kind in _KIND_TO_CATEGORY:
        category = _KIND_TO_CATEGORY[kind]
    else:
        raise CorpusError(f"unknown node kind {kind!r}", line)
    try:
        label = NodeLabel(name=name, category=category)
    except ValueError as e:
        raise CorpusError(str(e), line) from None
    return Term(label, tuple(_term_from_obj(c, line) for c in children))


def _term_to_obj(term: Term) -> dict:
    label = term.label
    kind = "op" if label.category is None else _CATEGORY_TO_KIND[label.category]
    return {"k": kind, "n": label.name, "c": [_term_to_obj(c) for c in term.children]}


def _state_from_record(obj: dict, line: int) -> ProofState:
    for fld in ("id", "theory", "tactic", "goal", "hyps"):
        if fld not in obj:
            raise CorpusError(f"record missing field {fld!r}", line)
    if not isinstance(obj["id"], int) or isinstance(obj["id"], bool) or obj["id"] < 0:
        raise CorpusError("'id' must be a nonnegative integer", line)
    if not isinstance(obj["theory"], str) or not isinstance(obj["tactic"], str):
        raise CorpusError("'theory' and 'tactic' must be strings", line)
    if not isinstance(obj["hyps"], list):
        raise CorpusError("'hyps' must be a list", line)
    hyps: list[tuple[str, Term]] = []
    seen_names: set[str] = set()
    for h in obj["hyps"]:
        if not isinstance(h, dict) or "name" not in h or "body" not in h:
            raise CorpusError("hypothesis must be {name, body}", line)
        name = h["name"]
        if not isinstance(name, str) or not name:
            raise CorpusError("hypothesis name must be a non-empty string", line)
        if name in seen_names:
            raise CorpusError(f"duplicate hypothesis name {name!r}", line)
        seen_names.add(name)
        hyps.append((name, _term_from_obj(h["body"], line)))
    return ProofState(
        id=obj["id"],
        goal=_term_from_obj(obj["goal"], line),
        hypotheses=tuple(hyps),
        tactic=normalize_tactic(obj["tactic"]),
        theory=obj["theory"],
    )


def parse_corpus(stream: IO[bytes] | IO[str] | Iterable[str], split: dict[str, Split] | None = None) -> Corpus:
    """Parse a JSON-lines corpus.

    ``split`` assigns theories to train/validation/test; theories not listed
    default to the training split. Raises :class:`CorpusError` on malformed
    records, duplicate state ids, or duplicate hypothesis names.
    """
    states: list[ProofState] = []
    seen_ids: set[int] = set()
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        text = raw.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise CorpusError(f"invalid JSON ({e.msg})", lineno) from None
        if not isinstance(obj, dict):
            raise CorpusError("record must be a JSON object", lineno)
        state = _state_from_record(obj, lineno)
        if state.id in seen_ids:
            raise CorpusError(f"duplicate state id {state.id}", lineno)
        seen_ids.add(state.id)
        states.append(state)
    theories = sorted({s.theory for s in states})
    full_split = default_split(theories)
    if split:
        full_split.update(split)
    return Corpus(states=tuple(states), split=full_split)


def serialize_state(state: ProofState) -> str:
    record = {
        "id": state.id,
        "theory": state.theory,
        "tactic": state.tactic,
        "goal": _term_to_obj(state.goal),
        "hyps": [{"name": n, "body": _term_to_obj(b)} for n, b in state.hypotheses],
    }
    return json.dumps(record, separators=(",", ":"), ensure_ascii=True)


def serialize_corpus(corpus: Corpus | Sequence[ProofState]) -> str:
    states = corpus.states if isinstance(corpus, Corpus) else corpus
    return "".join(serialize_state(s) + "\n" for s in states)


def load_corpus(path: str, split: dict[str, Split] | None = None) -> Corpus:
    with open(path, "r", encoding="utf-8") as f:
        return parse_corpus(f, split=split)


def save_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_corpus(corpus))
