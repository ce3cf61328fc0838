"""Acceptance criteria. Each test records one PASS/FAIL line, printed after the run."""
from __future__ import annotations

import functools
import random
import time

from omni_infer import surface as S
from omni_infer.cli import check_program, infer_binding
from omni_infer.congen import GenState, builtin_env, generate
from omni_infer.constraint_lang import Branch, CEq, CMatch, MatchOrigin, PWild, conj, exists
from omni_infer.core_types import (
    BOOL, INT, LabelEnv, Scheme, TArrow, TPoly, TTuple, TVar, match_type, types_equivalent,
)
from omni_infer.oracle import POINT_DECLS, BudgetExceeded, GroundUniverse, Oracle, TermGen
from omni_infer.solver import STEP_CONSTANT, Ambiguous, solve
from omni_infer.unifier import Clash, Cycle, Engine

from conftest import corpus_files, load, report

FUZZ_TERMS = 500
FUZZ_MAX_SIZE = 8
FUZZ_SEED = 2024
FUZZ_SECONDS = 120
CORPUS_SECONDS = 1.0


def cyclic_constraint():
    a, b = TVar("a"), TVar("b")
    o = MatchOrigin("cyclic", "match", None)
    return exists(["a", "b"], conj(
        CMatch(a, (Branch(PWild(), CEq(b, BOOL)),), o),
        CMatch(b, (Branch(PWild(), CEq(a, INT)),), o),
    ))


@functools.lru_cache(maxsize=None)
def fuzz_run():
    """Solver and oracle verdicts on a fixed sample of random closed terms."""
    prog = S.parse(POINT_DECLS)
    labels = prog.labels
    universe = GroundUniverse(labels, 2)
    universe.check_adequate()
    rng = random.Random(FUZZ_SEED)
    gen = TermGen(rng, labels)
    rows, skipped = [], 0
    start = time.perf_counter()
    while len(rows) < FUZZ_TERMS:
        e = gen.term(rng.randint(1, FUZZ_MAX_SIZE))
        oracle = Oracle(universe, labels)
        try:
            principals = oracle.principals(e)
        except BudgetExceeded:
            skipped += 1
            continue
        r = infer_binding(S.Binding("t", e, None), prog, builtin_env(), instrument=True)
        rows.append((e, principals, r, oracle))
    return rows, skipped, time.perf_counter() - start


# 1 ---------------------------------------------------------------------------
def test_corpus():
    start = time.perf_counter()
    failures = []
    bindings = 0
    for path in corpus_files():
        for r in check_program(S.parse(path.read_text())):
            bindings += 1
            if not r.met:
                failures.append(f"{path.stem}/{r.describe()}")
    res = solve(cyclic_constraint())
    if not isinstance(res.error, Ambiguous):
        failures.append("cyclic match constraint was not ambiguous")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < CORPUS_SECONDS
    report("1 corpus", ok, f"{bindings} bindings + cyclic constraint, {len(failures)} unmet, "
           f"{elapsed:.3f}s (limit {CORPUS_SECONDS}s)" + "".join(f"; {x}" for x in failures))
    assert not failures
    assert elapsed < CORPUS_SECONDS


# 2 ---------------------------------------------------------------------------
def test_oracle_equivalence():
    rows, skipped, elapsed = fuzz_run()
    bad = [S.pretty_term(e) for e, ps, r, _ in rows if bool(ps) != (r.outcome == "accept")]
    accepted = sum(1 for _, ps, _, _ in rows if ps)
    ok = not bad and elapsed < FUZZ_SECONDS
    report("2 oracle equivalence", ok,
           f"{len(rows)} terms (size <= {FUZZ_MAX_SIZE}, {accepted} typable, {skipped} over budget "
           f"and redrawn), {len(bad)} mismatches, {elapsed:.1f}s (limit {FUZZ_SECONDS}s)")
    assert not bad, bad[:5]
    assert elapsed < FUZZ_SECONDS


# 3 ---------------------------------------------------------------------------
def test_principality():
    rows, _, _ = fuzz_run()
    checked, same, bad = 0, 0, []
    for e, ps, r, oracle in rows:
        if r.outcome != "accept":
            continue
        t = r.scheme.body
        if any(types_equivalent(t, p) for p in ps):
            same += 1
        else:
            bad.append(f"{S.pretty_term(e)} : solver {t}, oracle {ps}")
        for g in oracle.ground_typings(e):
            checked += 1
            if match_type(t, g) is None:
                bad.append(f"{S.pretty_term(e)} : {g}")
    report("3 principality", not bad,
           f"{checked} oracle ground typings are instances of the solver scheme, "
           f"{same} solver types equal an oracle principal up to renaming, {len(bad)} failures")
    assert not bad, bad[:5]


# 4 ---------------------------------------------------------------------------
def _random_type(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([TVar("a"), TVar("b"), TVar("c"), INT, BOOL])
    if rng.random() < 0.5:
        return TArrow(_random_type(rng, depth - 1), _random_type(rng, depth - 1))
    return TTuple((_random_type(rng, depth - 1), _random_type(rng, depth - 1)))


def test_unifier_properties():
    problems = []
    e = Engine()
    s = {}
    try:
        e.unify(e.from_type(TVar("a"), s), e.from_type(TArrow(TVar("a"), TVar("a")), s))
        problems.append("occurs check accepted a = a -> a")
    except Cycle:
        pass
    idp = TPoly(Scheme(("a",), TArrow(TVar("a"), TVar("a"))))
    idq = TPoly(Scheme(("z",), TArrow(TVar("z"), TVar("z"))))
    kp = TPoly(Scheme(("a", "b"), TArrow(TVar("a"), TVar("b"))))
    e = Engine()
    try:
        e.unify(e.from_type(idp, {}), e.from_type(idq, {}))
    except Clash:
        problems.append("alpha-equivalent polytypes clashed")
    try:
        e.unify(e.from_type(idp, {}), e.from_type(kp, {}))
        problems.append("distinct polytypes unified")
    except Clash:
        pass
    rng = random.Random(7)
    successes = 0
    for _ in range(500):
        e = Engine(check_weight=True)
        scope = {}
        for _ in range(rng.randint(1, 5)):
            l, r = _random_type(rng, 3), _random_type(rng, 3)
            try:
                e.unify(e.from_type(l, scope), e.from_type(r, scope))
            except (Clash, Cycle):
                break
            successes += 1
            if not e.solved_form():
                problems.append(f"not in solved form after {l} = {r}")
    report("4 unifier properties", not problems,
           f"occurs check, polytype alpha-equivalence and clash, solved form after "
           f"{successes} successful unifications; {len(problems)} problems")
    assert not problems, problems


# 5 ---------------------------------------------------------------------------
def test_termination():
    over, nonmono, runs, worst = [], [], 0, 0.0
    results = []
    for path in corpus_files():
        for order in ("left", "right"):
            for r in check_program(S.parse(path.read_text()), order=order, instrument=True):
                if r.solve is not None:
                    results.append((f"{path.stem}/{r.name}", r.solve))
    for e, _, r, _ in fuzz_run()[0]:
        if r.solve is not None:
            results.append((S.pretty_term(e), r.solve))
    cyc = solve(cyclic_constraint(), instrument=True)
    results.append(("cyclic", cyc))
    for name, res in results:
        runs += 1
        worst = max(worst, res.steps / res.size ** 2)
        if res.steps > res.step_bound:
            over.append(name)
        h = res.match_history
        if any(x < y for x, y in zip(h, h[1:])):
            nonmono.append(name)
    ok = not over and not nonmono
    report("5 termination", ok,
           f"{runs} solver runs, max steps/size^2 = {worst:.2f} <= K = {STEP_CONSTANT}, "
           f"{len(over)} over bound, {len(nonmono)} with growing match count")
    assert not over, over[:5]
    assert not nonmono, nonmono[:5]


# 6 ---------------------------------------------------------------------------
def test_order_independence():
    schemes = {}
    for name in ("ex_6_2", "ex_6_3"):
        for order in ("left", "right"):
            rs = check_program(load(name), order=order)
            schemes[(name, order)] = rs[-1].scheme
    ok = all(s is not None for s in schemes.values())
    if ok:
        first = next(iter(schemes.values())).body
        ok = all(types_equivalent(first, s.body) for s in schemes.values())
    diffs = 0
    for path in corpus_files():
        prog = S.parse(path.read_text())
        left = check_program(prog, order="left")
        right = check_program(prog, order="right")
        for l, r in zip(left, right):
            same = l.outcome == r.outcome and (
                l.outcome != "accept" or types_equivalent(l.scheme.body, r.scheme.body))
            diffs += not same
    ok = ok and diffs == 0
    report("6 order independence", ok,
           f"ex_6_2 and ex_6_3 under left and right scheduling agree; "
           f"{diffs} corpus bindings differ between orders")
    assert ok


if __name__ == "__main__":
    import conftest
    for test in (test_corpus, test_oracle_equivalence, test_principality,
                 test_unifier_properties, test_termination, test_order_independence):
        try:
            test()
        except AssertionError:
            pass
    for key in sorted(conftest.ACCEPTANCE):
        ok, detail = conftest.ACCEPTANCE[key]
        print(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
