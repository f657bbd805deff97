import random

import pytest

from tacrules.terms import (
    Category,
    Corpus,
    InvalidPositionError,
    NodeLabel,
    ProofState,
    Split,
    Term,
    ident,
    node_at,
    normalize_tactic,
    op,
    subterm_at,
)

from oracles import all_positions, random_term, subterm


def sub_S_x_S_y() -> Term:
    # sub(S(x), S(y))
    return Term(
        ident(Category.CONSTANT, "sub"),
        (
            Term(ident(Category.CONSTRUCTOR, "S"), (Term(ident(Category.VARIABLE, "x")),)),
            Term(ident(Category.CONSTRUCTOR, "S"), (Term(ident(Category.VARIABLE, "y")),)),
        ),
    )


def test_node_at_root():
    assert node_at(sub_S_x_S_y(), ()).name == "sub"


def test_node_at_leftmost_leaf():
    assert node_at(sub_S_x_S_y(), (0, 0)).name == "x"


def test_node_at_out_of_bounds():
    with pytest.raises(InvalidPositionError):
        node_at(sub_S_x_S_y(), (2,))


def test_subterm_at_direct_child():
    t = subterm_at(sub_S_x_S_y(), (1,))
    assert t.label.name == "S"
    assert t.children[0].label.name == "y"


def test_subterm_at_root_is_identity():
    t = sub_S_x_S_y()
    assert subterm_at(t, ()) is t


def test_subterm_matches_naive_recursion():
    rng = random.Random(7)
    for _ in range(200):
        t = random_term(rng, 20)
        for pos in all_positions(t):
            assert subterm_at(t, pos) == subterm(t, pos)
            assert node_at(t, pos) == subterm(t, pos).label


def test_position_count_equals_node_count():
    rng = random.Random(8)
    for _ in range(100):
        t = random_term(rng, 25)
        positions = list(t.positions())
        assert len(positions) == t.node_count()
        assert len(set(positions)) == len(positions)


def test_positions_are_preorder_lexicographic():
    rng = random.Random(9)
    for _ in range(50):
        t = random_term(rng, 15)
        positions = list(t.positions())
        assert positions == sorted(positions)


def test_unknown_term_op_rejected():
    with pytest.raises(ValueError):
        op("frobnicate")
    with pytest.raises(ValueError):
        NodeLabel(name="", category=Category.CONSTANT)


def test_duplicate_hypothesis_name_rejected():
    g = sub_S_x_S_y()
    with pytest.raises(ValueError):
        ProofState(0, g, (("H", g), ("H", g)), "auto", "t")


def test_corpus_rejects_duplicate_ids():
    g = sub_S_x_S_y()
    s = ProofState(1, g, (), "auto", "t")
    with pytest.raises(ValueError):
        Corpus(states=(s, s), split={"t": Split.TRAIN})


def test_corpus_requires_split_for_every_theory():
    g = sub_S_x_S_y()
    s = ProofState(1, g, (), "auto", "t")
    with pytest.raises(ValueError):
        Corpus(states=(s,), split={})


def test_normalize_tactic_collapses_whitespace():
    assert normalize_tactic("  apply   H1 \n") == "apply H1"
    assert normalize_tactic("apply H1") != normalize_tactic("apply H2")
