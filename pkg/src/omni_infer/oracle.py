"""A brute-force reference for constraint satisfiability.

Simple constraints are solved by an independent substitution-based solver.
Suspended matches are handled by searching every discharge order: a match may
be discharged once its scrutinee's shape is the same in every solution of the
erased surrounding constraint.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Optional

from .congen import GenError, GenState, builtin_env, generate
from .constraint_lang import (
    AbsLeq, CAnd, CApp, CEq, CExists, CFalse, CForall, CLet, CMatch, CMultiEq,
    CTrue, Constraint, DomEq, FreshSupply, LabLeq, SchemeLeq, children,
    count_matches, desugar, discharge, erase, free_type_vars, get_at, replace_at,
)
from .core_types import (
    BOOL, INT, UNIT, LabelEnv, Scheme, TArrow, TPoly, TRecord, TTuple, TVar,
    Type, arrows, canonical_shape, decompose, free_vars, match_type, subst,
    subst_scheme,
)
from . import surface as S


class BudgetExceeded(Exception):
    pass


class Unsat(Exception):
    pass


# ---------------------------------------------------------------------------
# ground universe


class GroundUniverse:
    """A finite set of ground types, closed under subterms."""

    POLYS = (
        Scheme(("a",), TArrow(TVar("a"), TVar("a"))),
        Scheme(("a", "b"), arrows(TVar("a"), TVar("b"), TVar("a"))),
    )

    def __init__(self, labels: Optional[LabelEnv] = None, depth: int = 2):
        self.labels = labels or LabelEnv()
        self.depth = depth
        simple = [UNIT, INT, BOOL]
        base = list(simple)
        for name, decl in self.labels.records.items():
            n = len(decl.params)
            if n > 2:
                continue
            for args in itertools.product((INT, BOOL), repeat=n):
                base.append(TRecord(name, tuple(args)))
        base += [TPoly(s) for s in self.POLYS]
        layers = [base]
        seen = list(base)
        for _ in range(1, depth):
            prev = seen[:]
            new = []
            for a in prev:
                for b in prev:
                    new.append(TArrow(a, b))
                    new.append(TTuple((a, b)))
            seen = prev + [t for t in new if t not in prev]
            layers.append(new)
        self.types = list(dict.fromkeys(seen))

    def __len__(self) -> int:
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    def shapes(self) -> list:
        return list(dict.fromkeys(canonical_shape(t) for t in self.types))

    def check_adequate(self) -> None:
        """At least two distinct shapes for every category that the universe covers."""
        cats: dict = {}
        for sh in self.shapes():
            body = sh.body
            key = type(body).__name__ if not isinstance(body, TRecord) else "record"
            cats.setdefault(key, set()).add(sh)
        nullary = {s for s in self.shapes() if s.arity == 0 and not isinstance(s.body, (TPoly, TRecord))}
        assert len(nullary) >= 2, "need two distinct base shapes"
        assert len(cats.get("TPoly", ())) >= 2, "need two distinct polytype shapes"
        if len(self.labels.records) >= 2:
            assert len(cats.get("record", ())) >= 2, "need two distinct record shapes"
        if self.depth >= 2:
            assert "TArrow" in cats and "TTuple" in cats


# ---------------------------------------------------------------------------
# reference solver for simple constraints


class RefSolver:
    def __init__(self, labels: LabelEnv, env: dict, fresh: FreshSupply):
        self.labels = labels
        self.env = env
        self.fresh = fresh
        self.s: dict = {}
        self.rigid: set = set()

    def walk(self, t: Type) -> Type:
        while isinstance(t, TVar) and t.name in self.s:
            t = self.s[t.name]
        return t

    def resolve(self, t: Type) -> Type:
        t = self.walk(t)
        if isinstance(t, TVar):
            return t
        if isinstance(t, TPoly):
            fv = free_vars(t)
            if not any(v in self.s for v in fv):
                return t
            return TPoly(subst_scheme(t.scheme, {v: self.resolve(TVar(v)) for v in fv}))
        sh, args = decompose(t)
        if not args:
            return t
        return subst(sh.body, dict(zip(sh.holes, [self.resolve(a) for a in args])))

    def unify(self, a: Type, b: Type) -> None:
        todo = [(a, b)]
        while todo:
            x, y = todo.pop()
            x, y = self.walk(x), self.walk(y)
            if x == y:
                continue
            if isinstance(x, TVar) and x.name not in self.rigid:
                self._bind(x.name, y)
            elif isinstance(y, TVar) and y.name not in self.rigid:
                self._bind(y.name, x)
            elif isinstance(x, TVar) or isinstance(y, TVar):
                raise Unsat("rigid")
            else:
                sx, ax = decompose(x)
                sy, ay = decompose(y)
                if sx != sy:
                    raise Unsat("clash")
                todo.extend(zip(ax, ay))

    def _bind(self, v: str, t: Type) -> None:
        if v in free_vars(self.resolve(t)):
            raise Unsat("cycle")
        self.s[v] = t

    def ftv(self, names) -> set:
        out = set()
        for n in names:
            out.update(free_vars(self.resolve(TVar(n))))
        return out

    def env_ftv(self, env: dict) -> set:
        out = set()
        for sch in env.values():
            fv = free_vars(self.resolve(sch.body))
            out.update(v for v in fv if v not in sch.quantified)
        return out

    def run(self, c: Constraint, env: dict, scope: tuple) -> None:
        if isinstance(c, CTrue):
            return
        if isinstance(c, CFalse):
            raise Unsat(c.reason)
        if isinstance(c, CAnd):
            self.run(c.left, env, scope)
            self.run(c.right, env, scope)
        elif isinstance(c, CExists):
            self.run(c.body, env, scope + (c.var,))
        elif isinstance(c, CForall):
            self.rigid.add(c.var)
            self.run(c.body, env, scope + (c.var,))
            if c.var in self.ftv(scope) or c.var in self.env_ftv(env):
                raise Unsat("escape")
        elif isinstance(c, CEq):
            self.unify(c.left, c.right)
        elif isinstance(c, CMultiEq):
            for a, b in zip(c.types, c.types[1:]):
                self.unify(a, b)
        elif isinstance(c, CLet):
            self.run(c.defn, env, scope + (c.var,))
            t = self.resolve(TVar(c.var))
            outer = self.ftv(scope) | self.env_ftv(env)
            gen = tuple(v for v in free_vars(t) if v not in outer and v not in self.rigid)
            inner = dict(env)
            inner[c.x] = Scheme(gen, t)
            self.run(c.body, inner, scope)
        elif isinstance(c, CApp):
            sch = env.get(c.x)
            if sch is None:
                raise Unsat(f"unbound {c.x}")
            ren = {q: TVar(self.fresh()) for q in sch.quantified}
            self.unify(subst(sch.body, ren), c.type)
        elif isinstance(c, (LabLeq, DomEq, SchemeLeq, AbsLeq)):
            self.run(desugar(c, self.labels, self.fresh), env, scope)
        elif isinstance(c, CMatch):
            raise ValueError("the reference solver only handles simple constraints")
        else:
            raise ValueError(f"unsupported constraint {c!r}")


# ---------------------------------------------------------------------------
# matches, by search over discharge orders


def _active(c: Constraint, path: tuple = ()) -> list:
    """Paths to matches that are not nested inside another match's branch."""
    if isinstance(c, CMatch):
        return [path]
    out = []
    for i, k in enumerate(children(c)):
        out.extend(_active(k, path + (i,)))
    return out


@dataclass
class Oracle:
    universe: GroundUniverse
    labels: LabelEnv
    env: dict = field(default_factory=builtin_env)
    max_matches: int = 4
    budget: int = 20000
    brute: bool = False

    def __post_init__(self):
        self.fresh = FreshSupply("ω")
        self.solves = 0

    # simple constraints --------------------------------------------------
    def ref(self, c: Constraint, free) -> RefSolver:
        self.solves += 1
        if self.solves > self.budget:
            raise BudgetExceeded("too many reference solves")
        r = RefSolver(self.labels, self.env, self.fresh)
        r.run(c, dict(self.env), tuple(free))
        return r

    def _unicity(self, c: Constraint, path: tuple, m: CMatch, free):
        """None if unicity fails, 'unsat' if the erased context is unsatisfiable, else shapes."""
        g = self.fresh()
        probe = erase(replace_at(c, path, CEq(m.scrutinee, TVar(g))))
        try:
            r = self.ref(probe, list(free) + [g])
        except Unsat:
            try:
                self.ref(erase(c), free)
            except Unsat:
                return "unsat"
            # every shape is vacuously unique
            return self.universe.shapes()
        p = r.resolve(TVar(g))
        if self.brute:
            # enumerate instances of p built from universe types
            fv = free_vars(p)
            shapes = {canonical_shape(subst(p, {v: u for v in fv})) for u in self.universe}
            return list(shapes) if len(shapes) == 1 else None
        if isinstance(p, TVar):
            return None
        return [canonical_shape(p)]

    def search(self, c: Constraint, free, root: Optional[str] = None, want_all: bool = False) -> list:
        """Principal types of `root` (or True markers) over successful discharge orders."""
        if count_matches(c) > self.max_matches:
            raise BudgetExceeded("too many matches")
        paths = _active(c)
        if not paths:
            try:
                r = self.ref(c, free)
            except Unsat:
                return []
            return [r.resolve(TVar(root)) if root else True]
        found = []
        for path in paths:
            m = get_at(c, path)
            shapes = self._unicity(c, path, m, free)
            if shapes is None:
                continue
            if shapes == "unsat":
                return []
            for sh in shapes:
                dc = discharge(m, sh, self.fresh, self.labels)
                got = self.search(replace_at(c, path, dc), free, root, want_all)
                if got:
                    found.extend(got)
                    if not want_all:
                        return found
        return found

    # public API ----------------------------------------------------------
    def sat(self, c: Constraint) -> bool:
        free = sorted(free_type_vars(c))
        return bool(self.search(c, free))

    def principals(self, e: S.Term, want_all: bool = True) -> list:
        st = GenState(self.labels, env=dict(self.env))
        try:
            c = generate(e, TVar("α0"), st)
        except GenError:
            return []
        return self.search(c, ["α0"], "α0", want_all)

    def typable(self, e: S.Term) -> bool:
        return bool(self.principals(e, want_all=False))

    def ground_typings(self, e: S.Term, limit: int = 200) -> set:
        out = set()
        fill = [t for t in self.universe if not isinstance(t, (TArrow, TTuple))]
        for p in self.principals(e):
            for g in self.universe:
                if match_type(p, g) is not None:
                    out.add(g)
            fv = free_vars(p)
            for combo in itertools.islice(itertools.product(fill, repeat=len(fv)), limit):
                out.add(subst(p, dict(zip(fv, combo))))
        return out


# ---------------------------------------------------------------------------
# random closed terms


POINT_DECLS = "type point = {x:int; y:int}\ntype gray_point = {x:int; y:int; color:int}\n"
ID_SCHEME = Scheme(("a",), TArrow(TVar("a"), TVar("a")))


def fuzz_labels() -> LabelEnv:
    return S.parse(POINT_DECLS).labels


class TermGen:
    """Random closed terms over unit, int, bool, point, gray_point, pairs and [∀a.a→a]."""

    def __init__(self, rng: random.Random, labels: Optional[LabelEnv] = None):
        self.rng = rng
        self.labels = labels or fuzz_labels()
        self.names = itertools.count()

    FORMS = {"fun": 3, "app": 3, "let": 3, "tuple": 2, "proj": 2, "xproj": 1,
             "field": 3, "xfield": 1, "record": 2, "box": 2, "xbox": 1,
             "unbox": 2, "xunbox": 1, "annot": 1, "leaf": 1}
    # destructors prefer a subterm built by the matching constructor
    WANT = {"proj": "tuple", "xproj": "tuple", "field": "record", "xfield": "record",
            "unbox": "box", "xunbox": "xbox", "app": "fun"}

    def term(self, size: int, scope: tuple = (), want: Optional[str] = None) -> S.Term:
        rng = self.rng
        if size <= 1:
            return self.leaf(scope)
        forms = dict(self.FORMS)
        if size < 3:
            for f in ("app", "let", "tuple", "record"):
                forms.pop(f)
        if want in forms and rng.random() < 0.5:
            kind = want
        elif want is not None and scope and rng.random() < 0.3:
            return S.Var(rng.choice(scope))
        else:
            kind = rng.choices(list(forms), weights=list(forms.values()))[0]
        sub = lambda k, sc=scope: self.term(k, sc, self.WANT.get(kind))
        n = size - 1
        if kind == "leaf":
            return self.leaf(scope)
        if kind == "fun":
            x = f"x{next(self.names)}"
            return S.Fun(x, self.term(n, scope + (x,)))
        if kind == "app":
            k = rng.randint(1, n - 1)
            return S.App(sub(n - k), self.term(k, scope))
        if kind == "tuple":
            k = rng.randint(1, n - 1)
            return S.TupleLit((self.term(k, scope), self.term(n - k, scope)))
        if kind == "let":
            x = f"y{next(self.names)}"
            k = rng.randint(1, n - 1)
            return S.Let(x, self.term(k, scope), self.term(n - k, scope + (x,)))
        if kind == "proj":
            return S.ProjImplicit(sub(n), rng.choice((1, 2)))
        if kind == "xproj":
            return S.ProjExplicit(sub(n), rng.choice((1, 2)), 2)
        if kind == "field":
            return S.FieldImplicit(sub(n), rng.choice(("x", "y", "color")))
        if kind == "xfield":
            rec = rng.choice(("point", "gray_point"))
            return S.FieldExplicit(sub(n), rec, rng.choice(("x", "y")))
        if kind == "record":
            color = n >= 3 and rng.random() < 0.3
            m = n - 1 if color else n
            k = rng.randint(1, m - 1)
            fields = [("x", self.term(k, scope)), ("y", self.term(m - k, scope))]
            if color:
                fields.append(("color", S.IntLit(0)))
            return S.RecordLit(tuple(fields))
        if kind == "box":
            return S.PolyBoxImplicit(self.term(n, scope))
        if kind == "xbox":
            return S.PolyBoxExplicit(self.term(n, scope), (), ID_SCHEME)
        if kind == "unbox":
            return S.UnboxImplicit(sub(n))
        if kind == "xunbox":
            return S.UnboxExplicit(sub(n), (), ID_SCHEME)
        target = rng.choice((INT, TRecord("point"), TPoly(ID_SCHEME), TArrow(TVar("a"), TVar("a"))))
        flex = tuple(free_vars(target))
        return S.Annot(self.term(n, scope), flex, target)

    def leaf(self, scope: tuple) -> S.Term:
        rng = self.rng
        opts = ["unit", "int", "bool"] + ["var"] * (3 if scope else 0)
        k = rng.choice(opts)
        if k == "var":
            return S.Var(rng.choice(scope))
        if k == "unit":
            return S.UnitLit()
        if k == "int":
            return S.IntLit(rng.randint(0, 9))
        return S.BoolLit(rng.random() < 0.5)


def term_size(e: S.Term) -> int:
    n = 1
    for f in e.__dataclass_fields__:
        v = getattr(e, f)
        if isinstance(v, S.Term):
            n += term_size(v)
        elif isinstance(v, tuple):
            for item in v:
                if isinstance(item, S.Term):
                    n += term_size(item)
                elif isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], S.Term):
                    n += term_size(item[1])
    return n
