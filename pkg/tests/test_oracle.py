from __future__ import annotations

import random

import pytest

from omni_infer import surface as S
from omni_infer.constraint_lang import (
    Branch, CEq, CLet, CApp, CMatch, FreshSupply, MatchOrigin, PTuple, conj, exists, forall,
)
from omni_infer.core_types import BOOL, INT, LabelEnv, TArrow, TTuple, TVar, show_type
from omni_infer.oracle import (
    BudgetExceeded, GroundUniverse, Oracle, RefSolver, TermGen, Unsat, term_size,
)

a, b = TVar("a"), TVar("b")


def ref(c, free=()):
    r = RefSolver(LabelEnv(), {}, FreshSupply("r"))
    r.run(c, {}, tuple(free))
    return r


def test_universe_is_adequate(point_labels):
    u = GroundUniverse(point_labels, 2)
    u.check_adequate()
    assert INT in u.types and TArrow(INT, BOOL) in u.types
    assert len(GroundUniverse(point_labels, 1)) < len(u)


def test_ref_solver_basics():
    r = ref(exists(["a"], conj(CEq(b, TArrow(a, a)), CEq(a, INT))), ["b"])
    assert r.resolve(b) == TArrow(INT, INT)
    with pytest.raises(Unsat):
        ref(exists(["a"], CEq(a, TArrow(a, INT))))
    with pytest.raises(Unsat):
        ref(forall(["a"], CEq(b, a)), ["b"])
    poly = CLet("f", "a", exists(["b"], CEq(a, TArrow(b, b))),
                conj(CApp("f", TArrow(INT, INT)), CApp("f", TArrow(BOOL, BOOL))))
    ref(poly)


def test_match_search():
    o = Oracle(GroundUniverse(LabelEnv(), 1), LabelEnv())
    m = CMatch(a, (Branch(PTuple("c", 1), CEq(b, TVar("c"))),), MatchOrigin("t", ".1", None))
    assert o.sat(exists(["a", "b"], conj(m, CEq(a, TTuple((INT, BOOL))), CEq(b, INT))))
    assert not o.sat(exists(["a", "b"], conj(m, CEq(a, TTuple((INT, BOOL))), CEq(b, BOOL))))
    assert not o.sat(exists(["a", "b"], m))


def test_budget(point_labels):
    o = Oracle(GroundUniverse(point_labels, 1), point_labels, max_matches=1)
    with pytest.raises(BudgetExceeded):
        o.typable(S.parse_term("fun r -> (r.x, r.y)", point_labels))


def test_ground_typings(point_labels):
    o = Oracle(GroundUniverse(point_labels, 2), point_labels)
    got = o.ground_typings(S.parse_term("fun x -> x", point_labels))
    assert TArrow(INT, INT) in got and TArrow(INT, BOOL) not in got
    assert o.ground_typings(S.parse_term("1 2", point_labels)) == set()


def test_symbolic_unicity_matches_enumeration(point_labels):
    u = GroundUniverse(point_labels, 2)
    fast = Oracle(u, point_labels)
    slow = Oracle(u, point_labels, brute=True)
    rng = random.Random(11)
    gen = TermGen(rng, point_labels)
    for _ in range(150):
        e = gen.term(rng.randint(2, 7))
        try:
            want = slow.typable(e)
        except BudgetExceeded:
            continue
        assert fast.typable(e) == want, S.pretty_term(e)


def test_generator_is_deterministic(point_labels):
    def draw(seed):
        rng = random.Random(seed)
        g = TermGen(rng, point_labels)
        return [S.pretty_term(g.term(rng.randint(1, 8))) for _ in range(20)]
    assert draw(3) == draw(3)
    rng = random.Random(4)
    g = TermGen(rng, point_labels)
    assert all(term_size(g.term(n)) <= n for n in range(1, 9) for _ in range(20))
