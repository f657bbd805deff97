import io
import random

import pytest

from tacrules.corpus import CorpusError, parse_corpus, serialize_corpus, serialize_state
from tacrules.synthetic import GeneratorSpec, generate_synthetic_corpus
from tacrules.terms import Split

EQ_RECORD = (
    '{"id": 1, "theory": "Logic", "tactic": "reflexivity",'
    ' "goal": {"k": "ind", "n": "Coq.Init.Logic.eq", "c":'
    ' [{"k": "var", "n": "x"}, {"k": "var", "n": "x"}]}, "hyps": []}'
)


def test_parse_smallest_equation():
    corpus = parse_corpus(io.StringIO(EQ_RECORD))
    assert len(corpus.states) == 1
    state = corpus.states[0]
    assert state.goal.node_count() == 3
    assert state.goal.label.name == "Coq.Init.Logic.eq"
    assert not state.hypotheses


def test_duplicate_id_reports_line():
    two = EQ_RECORD + "\n" + EQ_RECORD.replace('"id": 1', '"id": 1') + "\n"
    with pytest.raises(CorpusError) as e:
        parse_corpus(io.StringIO(two))
    assert "duplicate state id 1" in str(e.value)
    assert e.value.line == 2


def test_malformed_json_reports_line():
    with pytest.raises(CorpusError) as e:
        parse_corpus(io.StringIO(EQ_RECORD + "\n{oops\n"))
    assert e.value.line == 2


def test_duplicate_hypothesis_name_rejected():
    rec = (
        '{"id": 2, "theory": "t", "tactic": "auto", "goal": {"k": "var", "n": "x"},'
        ' "hyps": [{"name": "H", "body": {"k": "var", "n": "y"}},'
        ' {"name": "H", "body": {"k": "var", "n": "z"}}]}'
    )
    with pytest.raises(CorpusError) as e:
        parse_corpus(io.StringIO(rec))
    assert "duplicate hypothesis" in str(e.value)


def test_missing_field_rejected():
    with pytest.raises(CorpusError):
        parse_corpus(io.StringIO('{"id": 1, "theory": "t", "tactic": "auto", "hyps": []}'))


def test_unknown_node_kind_rejected():
    rec = '{"id": 1, "theory": "t", "tactic": "auto", "goal": {"k": "zzz", "n": "x"}, "hyps": []}'
    with pytest.raises(CorpusError):
        parse_corpus(io.StringIO(rec))


def test_roundtrip_serialize_parse_serialize_fixed_point():
    # 1000-state synthetic corpus: parse(serialize(parse(c))) == parse(c)
    spec = GeneratorSpec.single_theory(
        [
            ("t_eq", "equal_args_of_eq", 150),
            ("t_hyp", "goal_matches_hyp", 150),
            ("t_prod", "product_goal", 200),
            ("t_none", "none", 500),
        ]
    )
    corpus = generate_synthetic_corpus(spec, 11)
    assert len(corpus.states) == 1000
    first = serialize_corpus(corpus)
    reparsed = parse_corpus(io.StringIO(first))
    assert reparsed.states == corpus.states
    assert serialize_corpus(reparsed) == first


def test_tactic_normalized_on_parse():
    rec = EQ_RECORD.replace('"reflexivity"', '"  apply   H1 "')
    state = parse_corpus(io.StringIO(rec)).states[0]
    assert state.tactic == "apply H1"
    # canonicalized output is a fixed point
    out = serialize_state(state)
    assert parse_corpus(io.StringIO(out)).states[0] == state


def test_split_assignment():
    corpus = parse_corpus(io.StringIO(EQ_RECORD), split={"Logic": Split.TEST})
    assert corpus.split["Logic"] is Split.TEST
    assert corpus.states_in(Split.TEST) == corpus.states


def test_parse_accepts_missing_children_field():
    rec = '{"id": 3, "theory": "t", "tactic": "auto", "goal": {"k": "var", "n": "x"}, "hyps": []}'
    state = parse_corpus(io.StringIO(rec)).states[0]
    assert state.goal.node_count() == 1


def test_parse_bytes_stream():
    corpus = parse_corpus(io.BytesIO(EQ_RECORD.encode("utf-8")))
    assert len(corpus.states) == 1
