from __future__ import annotations

import pytest

from omni_infer import surface as S
from omni_infer.congen import GenState, builtin_env, generate
from omni_infer.constraint_lang import (
    Branch, CEq, CFalse, CLet, CApp, CMatch, MatchOrigin, PWild, conj, exists, forall,
)
from omni_infer.core_types import BOOL, INT, LabelEnv, TArrow, TVar, show_type, types_equivalent
from omni_infer.oracle import GroundUniverse, Oracle
from omni_infer.solver import (
    Ambiguous, DomainError, LabelError, ScopeEscape, TypeMismatch, solve,
)

a, b = TVar("a"), TVar("b")
O = MatchOrigin("test", "m", None)


def infer(src, labels, **kw):
    st = GenState(labels, env=builtin_env())
    c = generate(S.parse_term(src, labels), TVar("α0"), st)
    return solve(c, labels, builtin_env(), **kw)


def test_cyclic_matches_are_ambiguous():
    c = exists(["a", "b"], conj(
        CMatch(a, (Branch(PWild(), CEq(b, BOOL)),), O),
        CMatch(b, (Branch(PWild(), CEq(a, INT)),), O),
    ))
    res = solve(c)
    assert not res.ok and isinstance(res.error, Ambiguous)
    assert len(res.error.stuck) == 2
    assert Oracle(GroundUniverse(LabelEnv(), 1), LabelEnv()).sat(c) is False


def test_dependent_matches_solve_in_order():
    c = exists(["a", "b"], conj(
        CMatch(a, (Branch(PWild(), CEq(b, BOOL)),), O),
        CMatch(b, (Branch(PWild(), CEq(a, INT)),), O),
        CEq(a, INT),
    ))
    res = solve(c, instrument=True)
    assert res.ok
    assert res.match_history[0] == 2 and res.match_history[-1] == 0


def test_simple_errors():
    assert isinstance(solve(CEq(INT, BOOL)).error, TypeMismatch)
    assert isinstance(solve(exists(["a"], CEq(a, TArrow(a, a)))).error, TypeMismatch)
    assert not solve(CFalse("x")).ok
    esc = exists(["a"], forall(["b"], CEq(a, b)))
    assert isinstance(solve(esc).error, ScopeEscape)


def test_let_polymorphism():
    c = CLet("f", "a", exists(["b"], CEq(a, TArrow(b, b))),
             conj(CApp("f", TArrow(INT, INT)), CApp("f", TArrow(BOOL, BOOL))))
    res = solve(c)
    assert res.ok
    assert types_equivalent(res.let_schemes["a"].body, TArrow(b, b))


@pytest.mark.parametrize("src,err", [
    ("fun r -> r.x", Ambiguous),
    ("(fun r -> r.x) 1", TypeMismatch),
    ("({ x = 1 } : point)", DomainError),
    ("fun r -> r.z", LabelError),
    ("let f = fun r -> r.x in (f { x = 1; y = 2 }, f { x = 1; y = 2; color = 3 })", TypeMismatch),
])
def test_error_kinds(src, err, point_labels):
    res = infer(src, point_labels)
    assert isinstance(res.error, err), res.error


@pytest.mark.parametrize("src", [
    "let f = fun r -> r.x in f { x = 1; y = 2 }",
    "let f = fun r -> r.1 in (f (1, 2), f (true, false))",
    "fun p -> let q = (p : ['a. 'a -> 'a]) in <q>",
    "fun r -> (r.x, (r : gray_point).y)",
])
def test_agrees_with_oracle_on_backprop(src, point_labels):
    e = S.parse_term(src, point_labels)
    oracle = Oracle(GroundUniverse(point_labels, 2), point_labels)
    [p, *_] = oracle.principals(e)
    for order in ("left", "right"):
        res = infer(src, point_labels, order=order)
        assert res.ok, res.error
        assert types_equivalent(res.assignment["α0"], p)


def test_solved_form_and_trace(point_labels):
    res = infer("let f = fun r -> r.x in f { x = 1; y = 2 }", point_labels, trace=True)
    assert res.ok and res.solved_form
    rules = {line.split(":")[0] for line in res.trace}
    assert {"S-Let", "S-Match-Suspend", "S-Let-Solve"} <= rules


def test_step_bound_on_small_terms(point_labels):
    res = infer("let f = fun r -> r.x in (f { x = 1; y = 2 }, f { x = 3; y = 4 })",
                point_labels, instrument=True)
    assert res.ok
    assert res.steps <= res.step_bound
    hist = res.match_history
    assert all(x >= y for x, y in zip(hist, hist[1:]))


def test_order_argument_checked():
    with pytest.raises(ValueError):
        solve(CEq(INT, INT), order="middle")


def test_printed_result(point_labels):
    res = infer("fun x -> <(x : ['a. 'a -> 'a])> x", point_labels)
    assert show_type(res.assignment["α0"]) == "['a. 'a -> 'a] -> ['b. 'b -> 'b]"
