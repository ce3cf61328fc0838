from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from omni_infer.core_types import (
    BOOL, INT, Scheme, TArrow, TPoly, TTuple, TVar, canonical_shape, types_equivalent,
)
from omni_infer.unifier import Clash, Cycle, Engine, EscapeError


def node(e, t, scope):
    return e.from_type(t, scope)


def test_occurs_check():
    e = Engine()
    s = {}
    a = node(e, TVar("a"), s)
    with pytest.raises(Cycle):
        e.unify(a, node(e, TArrow(TVar("a"), TVar("a")), s))


def test_alpha_equivalent_polytypes_unify():
    e = Engine()
    p = TPoly(Scheme(("a",), TArrow(TVar("a"), TVar("a"))))
    q = TPoly(Scheme(("z",), TArrow(TVar("z"), TVar("z"))))
    e.unify(node(e, p, {}), node(e, q, {}))
    assert e.solved_form()


def test_different_polytypes_clash():
    e = Engine()
    p = TPoly(Scheme(("a",), TArrow(TVar("a"), TVar("a"))))
    q = TPoly(Scheme(("a", "b"), TArrow(TVar("a"), TVar("b"))))
    with pytest.raises(Clash):
        e.unify(node(e, p, {}), node(e, q, {}))


def test_poly_holes_unify_free_parts():
    e = Engine()
    s = {}
    p = node(e, TPoly(Scheme(("a",), TArrow(TVar("a"), TVar("x")))), s)
    q = node(e, TPoly(Scheme(("a",), TArrow(TVar("a"), INT))), s)
    e.unify(p, q)
    assert e.read(s["x"]) == INT


def test_rigid_clash_and_escape():
    e = Engine()
    r1, r2 = e.rigid(1, name="r1"), e.rigid(1, name="r2")
    with pytest.raises(Clash):
        e.unify(r1, r2)
    e2 = Engine()
    r = e2.rigid(1, name="r")
    with pytest.raises(EscapeError):
        e2.unify(r, e2.from_type(INT, {}))
    e3 = Engine()
    r = e3.rigid(2, name="r")
    with pytest.raises(EscapeError):
        e3.unify(r, e3.fresh(level=1))


def test_levels_are_minimised():
    e = Engine()
    a, b = e.fresh(level=3), e.fresh(level=1)
    c = e.make(canonical_shape(TArrow(INT, INT)), [a, a], level=3)
    e.unify(c, e.make(canonical_shape(TArrow(INT, INT)), [b, b], level=1))
    assert e.find(a).level == 1 and e.find(c).level == 1


def test_waiters_released_on_structure():
    e = Engine()
    a = e.fresh()
    a.waiters.append("w")
    out = e.unify(a, e.from_type(INT, {}))
    assert out.runnable == ["w"]
    assert e.find(a).waiters == []


# random equation systems over a few variables
VARS = ["a", "b", "c", "d"]
leaf = st.sampled_from([TVar(v) for v in VARS] + [INT, BOOL])
types = st.recursive(leaf, lambda kids: st.one_of(
    st.builds(TArrow, kids, kids),
    st.builds(lambda x, y: TTuple((x, y)), kids, kids),
), max_leaves=6)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(types, types), min_size=1, max_size=6))
def test_solved_form_after_every_success(eqs):
    e = Engine(check_weight=True)
    scope = {}
    for l, r in eqs:
        try:
            e.unify(node(e, l, scope), node(e, r, scope))
        except (Clash, Cycle):
            break
        assert e.solved_form()
        # the equation now holds on the read-back
        assert e.read(node(e, l, scope)) == e.read(node(e, r, scope))


@settings(max_examples=200, deadline=None)
@given(types, types)
def test_unify_is_symmetric(l, r):
    def run(x, y):
        e = Engine()
        scope = {}
        try:
            e.unify(node(e, x, scope), node(e, y, scope))
        except (Clash, Cycle):
            return None
        return e.read(node(e, x, scope), names={})
    a, b = run(l, r), run(r, l)
    assert (a is None) == (b is None)
    if a is not None:
        assert types_equivalent(a, b)
