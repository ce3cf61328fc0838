from __future__ import annotations

from omni_infer.core_types import (
    BOOL, INT, UNIT, LabelEnv, LabelError, RecordDecl, Scheme, TArrow, TPoly,
    TRecord, TTuple, TVar, alpha_normal, arrows, canonical_shape, decompose,
    free_vars, match_type, shape_apply, shape_more_general, show_type, subst,
    types_equivalent,
)
import pytest

a, b = TVar("a"), TVar("b")
ID = TPoly(Scheme(("a",), TArrow(a, a)))


def test_decompose_roundtrip():
    for t in [INT, TArrow(INT, b), TTuple((a, BOOL, a)), TRecord("p", (INT,)), ID,
              TPoly(Scheme(("c",), TArrow(TVar("c"), a)))]:
        sh, args = decompose(t)
        assert alpha_normal(shape_apply(sh, args)) == alpha_normal(t)


def test_shape_is_canonical():
    assert canonical_shape(TArrow(INT, BOOL)) == canonical_shape(TArrow(a, b))
    assert canonical_shape(TArrow(INT, BOOL)) != canonical_shape(TTuple((INT, BOOL)))
    assert canonical_shape(INT) != canonical_shape(BOOL)


def test_poly_shape_ignores_bound_names():
    other = TPoly(Scheme(("z",), TArrow(TVar("z"), TVar("z"))))
    assert canonical_shape(ID) == canonical_shape(other)
    k = TPoly(Scheme(("a", "b"), arrows(a, b, a)))
    assert canonical_shape(ID) != canonical_shape(k)


def test_poly_holes_carry_free_vars():
    t = TPoly(Scheme(("c",), TArrow(TVar("c"), a)))
    sh, args = decompose(t)
    assert sh.arity == 1 and args == [a]


def test_subst_avoids_capture():
    t = TPoly(Scheme(("a",), TArrow(a, b)))
    out = subst(t, {"b": a})
    assert free_vars(out) == ["a"]


def test_match_type_and_generality():
    assert match_type(TArrow(a, a), TArrow(INT, INT)) == {"a": INT}
    assert match_type(TArrow(a, a), TArrow(INT, BOOL)) is None
    assert shape_more_general(canonical_shape(TArrow(a, b)), canonical_shape(TArrow(a, b)))


def test_types_equivalent_up_to_renaming():
    assert types_equivalent(TArrow(a, b), TArrow(b, a))
    assert not types_equivalent(TArrow(a, a), TArrow(a, b))
    assert alpha_normal(ID) == alpha_normal(TPoly(Scheme(("q",), TArrow(TVar("q"), TVar("q")))))


def test_show_type_letters():
    assert show_type(TArrow(ID, ID)) == "['a. 'a -> 'a] -> ['b. 'b -> 'b]"
    assert show_type(TArrow(TTuple((INT, INT)), UNIT)) == "int * int -> unit"
    assert show_type(TRecord("gpoint", (TVar("x"),))) == "'a gpoint"


def test_label_env():
    env = LabelEnv()
    env.declare(RecordDecl("point", (), (("x", INT), ("y", INT))))
    env.declare(RecordDecl("gray", (), (("x", INT), ("y", INT), ("color", INT))))
    assert env.label_unique("color") == "gray"
    assert env.label_unique("x") is None
    assert env.labels_unique(["x", "y"]) == "point"
    assert sorted(env.records_with("x")) == ["gray", "point"]
    with pytest.raises(LabelError):
        env.declare(RecordDecl("point", (), ()))
    with pytest.raises(LabelError):
        env.declare(RecordDecl("bad", (), (("x", a),)))
