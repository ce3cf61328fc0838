from __future__ import annotations

import pytest

from omni_infer import surface as S
from omni_infer.congen import GenError, GenState, generate, generate_scheme
from omni_infer.constraint_lang import (
    CMatch, count_matches, free_type_vars, match_paths, get_at,
    show_constraint, term_vars,
)
from omni_infer.core_types import Scheme, TArrow, TVar
from omni_infer.oracle import GroundUniverse, Oracle


def gen(src, labels):
    return generate(S.parse_term(src, labels), TVar("t"), GenState(labels))


def test_closed_terms_have_no_free_term_vars(point_labels):
    c = gen("let f = fun x -> x in (f 1, f true)", point_labels)
    assert term_vars(c) == set()
    assert free_type_vars(c) == {"t"}


def test_unbound_variable(point_labels):
    with pytest.raises(GenError):
        gen("fun x -> y", point_labels)


def test_unique_label_needs_no_match(point_labels):
    assert count_matches(gen("fun r -> r.color", point_labels)) == 0
    assert count_matches(gen("fun r -> r.point.x", point_labels)) == 0
    assert count_matches(gen("{ x = 1; y = 2 }", point_labels)) == 0


def test_overloaded_label_suspends(point_labels):
    c = gen("fun r -> r.x", point_labels)
    [p] = match_paths(c)
    m = get_at(c, p)
    assert isinstance(m, CMatch) and m.origin.describe() == "record projection .x"


def test_unknown_label_is_false(point_labels):
    c = gen("fun r -> r.nope", point_labels)
    assert "false" in show_constraint(c) and "label:nope" in repr(c)


@pytest.mark.parametrize("src,matches", [
    ("fun p -> <p>", 1),
    ("fun p -> [p]", 1),
    ("fun p -> p.1", 1),
    ("fun p -> (p.(1/2), <p : 'a. 'a -> 'a>)", 0),
])
def test_match_counts(src, matches, point_labels):
    assert count_matches(gen(src, point_labels)) == matches


def test_generate_scheme_is_rigid(point_labels):
    sig = Scheme(("a",), TArrow(TVar("a"), TVar("a")))
    st = GenState(point_labels)
    ok = generate_scheme(S.parse_term("fun x -> x"), sig, st)
    bad = generate_scheme(S.parse_term("fun x -> 1"), sig, st)
    oracle = Oracle(GroundUniverse(point_labels, 1), point_labels)
    assert oracle.sat(ok)
    assert not oracle.sat(bad)


@pytest.mark.parametrize("src,typable", [
    ("fun r -> (r.x, (r : point).y)", True),
    ("(fun x -> x) 1", True),
    ("1 2", False),
    ("fun r -> r.x", False),
    ("let f = fun x -> x in (f 1, f true)", True),
    ("fun f -> (f 1, f true)", False),
])
def test_generated_constraints_against_oracle(src, typable, point_labels):
    # the expectation is what the brute-force oracle decides
    oracle = Oracle(GroundUniverse(point_labels, 2), point_labels)
    assert oracle.typable(S.parse_term(src, point_labels)) is typable
