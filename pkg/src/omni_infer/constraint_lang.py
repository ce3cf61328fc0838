"""The constraint language: syntax, patterns, match discharge, erasure."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterable, Optional, Union

from .core_types import (
    LabelEnv, Scheme, Shape, TPoly, TRecord, TTuple, TVar, Type, free_vars,
    scheme_free_vars, shape_apply, show_type, subst, subst_scheme,
)


class Constraint:
    __slots__ = ()

    def __str__(self) -> str:
        return show_constraint(self)


@dataclass(frozen=True)
class RVar:
    """Record pattern variable (ρ)."""
    name: str


@dataclass(frozen=True)
class SVar:
    """Scheme pattern variable (ς)."""
    name: str


@dataclass(frozen=True)
class MatchOrigin:
    kind: str
    detail: str = ""
    span: object = None

    def describe(self) -> str:
        return f"{self.kind} {self.detail}".strip()


@dataclass(frozen=True)
class CTrue(Constraint):
    pass


@dataclass(frozen=True)
class CFalse(Constraint):
    reason: str = field(default="", compare=False)


@dataclass(frozen=True)
class CAnd(Constraint):
    left: Constraint
    right: Constraint


@dataclass(frozen=True)
class CExists(Constraint):
    var: str
    body: Constraint


@dataclass(frozen=True)
class CForall(Constraint):
    var: str
    body: Constraint


@dataclass(frozen=True)
class CEq(Constraint):
    left: Type
    right: Type


@dataclass(frozen=True)
class CMultiEq(Constraint):
    types: tuple


@dataclass(frozen=True)
class CLet(Constraint):
    x: str
    var: str
    defn: Constraint
    body: Constraint


@dataclass(frozen=True)
class CLetR(Constraint):
    x: str
    root: str
    region_vars: tuple
    defn: Constraint
    body: Constraint


@dataclass(frozen=True)
class CApp(Constraint):
    x: str
    type: Type


@dataclass(frozen=True)
class CExistsInst(Constraint):
    inst: str
    x: str
    body: Constraint


@dataclass(frozen=True)
class CIncrInst(Constraint):
    inst: str
    source: str
    type: Type


# patterns


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class PWild(Pattern):
    pass


@dataclass(frozen=True)
class PTuple(Pattern):
    var: str
    index: int


@dataclass(frozen=True)
class PRecord(Pattern):
    var: str


@dataclass(frozen=True)
class PPoly(Pattern):
    var: str


@dataclass(frozen=True)
class Branch:
    pattern: Pattern
    body: Constraint


@dataclass(frozen=True)
class CMatch(Constraint):
    scrutinee: Type
    branches: tuple
    origin: Optional[MatchOrigin] = field(default=None, compare=False)

    def __post_init__(self):
        wild = sum(isinstance(b.pattern, PWild) for b in self.branches)
        recs = sum(isinstance(b.pattern, PRecord) for b in self.branches)
        polys = sum(isinstance(b.pattern, PPoly) for b in self.branches)
        tups = sum(isinstance(b.pattern, PTuple) for b in self.branches)
        if wild and len(self.branches) > 1:
            raise ValueError("a wildcard branch overlaps every other branch")
        if recs > 1 or polys > 1 or tups > 1:
            raise ValueError("match branches must be pairwise disjoint")


# meta-constraints, only meaningful once their pattern variables are substituted


@dataclass(frozen=True)
class LabLeq(Constraint):
    label: str
    record: Union[str, RVar]
    left: Type
    right: Type


@dataclass(frozen=True)
class DomEq(Constraint):
    record: Union[str, RVar]
    labels: frozenset


@dataclass(frozen=True)
class SchemeLeq(Constraint):
    scheme: Union[Scheme, SVar]
    type: Type


@dataclass(frozen=True)
class AbsLeq(Constraint):
    x: str
    scheme: Union[Scheme, SVar]


TRUE = CTrue()
FALSE = CFalse()


def conj(*cs: Constraint) -> Constraint:
    parts = [c for c in cs if not isinstance(c, CTrue)]
    if not parts:
        return TRUE
    out = parts[-1]
    for c in reversed(parts[:-1]):
        out = CAnd(c, out)
    return out


def exists(vars: Iterable[str], c: Constraint) -> Constraint:
    for v in reversed(list(vars)):
        c = CExists(v, c)
    return c


def forall(vars: Iterable[str], c: Constraint) -> Constraint:
    for v in reversed(list(vars)):
        c = CForall(v, c)
    return c


class FreshSupply:
    def __init__(self, prefix: str = "t"):
        self.prefix = prefix
        self.counter = itertools.count(1)

    def __call__(self) -> str:
        return f"{self.prefix}{next(self.counter)}"


# ---------------------------------------------------------------------------
# generic traversal


def children(c: Constraint) -> list:
    if isinstance(c, CAnd):
        return [c.left, c.right]
    if isinstance(c, (CExists, CForall, CExistsInst)):
        return [c.body]
    if isinstance(c, (CLet, CLetR)):
        return [c.defn, c.body]
    if isinstance(c, CMatch):
        return [b.body for b in c.branches]
    return []


def with_children(c: Constraint, kids: list) -> Constraint:
    if isinstance(c, CAnd):
        return CAnd(kids[0], kids[1])
    if isinstance(c, (CExists, CForall, CExistsInst)):
        return replace(c, body=kids[0])
    if isinstance(c, (CLet, CLetR)):
        return replace(c, defn=kids[0], body=kids[1])
    if isinstance(c, CMatch):
        brs = tuple(Branch(b.pattern, k) for b, k in zip(c.branches, kids))
        return CMatch(c.scrutinee, brs, c.origin)
    return c


def size(c: Constraint) -> int:
    return 1 + sum(size(k) for k in children(c))


def count_matches(c: Constraint) -> int:
    own = 1 if isinstance(c, CMatch) else 0
    return own + sum(count_matches(k) for k in children(c))


def erase(c: Constraint) -> Constraint:
    """Replace every suspended match by true."""
    if isinstance(c, CMatch):
        return TRUE
    kids = children(c)
    if not kids:
        return c
    return with_children(c, [erase(k) for k in kids])


def is_simple(c: Constraint) -> bool:
    if isinstance(c, CMatch):
        return False
    return all(is_simple(k) for k in children(c))


def match_paths(c: Constraint, path: tuple = ()) -> list:
    """Paths (child index sequences) to every match, outermost first."""
    out = [path] if isinstance(c, CMatch) else []
    for i, k in enumerate(children(c)):
        out.extend(match_paths(k, path + (i,)))
    return out


def get_at(c: Constraint, path: tuple) -> Constraint:
    for i in path:
        c = children(c)[i]
    return c


def replace_at(c: Constraint, path: tuple, new: Constraint) -> Constraint:
    if not path:
        return new
    kids = children(c)
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(c, kids)


def _types_of(c: Constraint) -> list:
    if isinstance(c, CEq):
        return [c.left, c.right]
    if isinstance(c, CMultiEq):
        return list(c.types)
    if isinstance(c, (CApp, CIncrInst)):
        return [c.type]
    if isinstance(c, CMatch):
        return [c.scrutinee]
    if isinstance(c, LabLeq):
        return [c.left, c.right]
    if isinstance(c, SchemeLeq):
        out = [c.type]
        if isinstance(c.scheme, Scheme):
            out.append(TPoly(c.scheme))
        return out
    if isinstance(c, AbsLeq) and isinstance(c.scheme, Scheme):
        return [TPoly(c.scheme)]
    return []


def _binders(c: Constraint) -> list:
    if isinstance(c, (CExists, CForall)):
        return [c.var]
    return []


def free_type_vars(c: Constraint) -> set:
    """Free type variables of a constraint (pattern-bound tuple variables excluded)."""
    out: set = set()
    for t in _types_of(c):
        out.update(free_vars(t))
    if isinstance(c, (CExists, CForall)):
        return out | (free_type_vars(c.body) - {c.var})
    if isinstance(c, CLet):
        return out | (free_type_vars(c.defn) - {c.var}) | free_type_vars(c.body)
    if isinstance(c, CLetR):
        bound = {c.root, *c.region_vars}
        return out | (free_type_vars(c.defn) - bound) | free_type_vars(c.body)
    if isinstance(c, CMatch):
        for b in c.branches:
            inner = free_type_vars(b.body)
            if isinstance(b.pattern, PTuple):
                inner.discard(b.pattern.var)
            out |= inner
        return out
    for k in children(c):
        out |= free_type_vars(k)
    return out


def term_vars(c: Constraint) -> set:
    """Free term variables."""
    if isinstance(c, CApp):
        return {c.x}
    if isinstance(c, AbsLeq):
        return {c.x}
    if isinstance(c, (CLet, CLetR)):
        return term_vars(c.defn) | (term_vars(c.body) - {c.x})
    out: set = set()
    for k in children(c):
        out |= term_vars(k)
    return out


# ---------------------------------------------------------------------------
# substitution


def subst_constraint(c: Constraint, tmap: dict, rmap: Optional[dict] = None,
                     smap: Optional[dict] = None) -> Constraint:
    """Substitute type variables, record pattern variables and scheme pattern variables."""
    rmap = rmap or {}
    smap = smap or {}

    def rec(r):
        return rmap.get(r.name, r) if isinstance(r, RVar) else r

    def go(c: Constraint, tm: dict) -> Constraint:
        ty = (lambda t: subst(t, tm)) if tm else (lambda t: t)

        def sch(s):
            if isinstance(s, SVar):
                return smap.get(s.name, s)
            return subst_scheme(s, tm) if tm else s

        def without(*names):
            return {k: v for k, v in tm.items() if k not in names}

        if isinstance(c, CEq):
            return CEq(ty(c.left), ty(c.right))
        if isinstance(c, CMultiEq):
            return CMultiEq(tuple(ty(t) for t in c.types))
        if isinstance(c, CApp):
            return CApp(c.x, ty(c.type))
        if isinstance(c, CIncrInst):
            return CIncrInst(c.inst, c.source, ty(c.type))
        if isinstance(c, LabLeq):
            return LabLeq(c.label, rec(c.record), ty(c.left), ty(c.right))
        if isinstance(c, DomEq):
            return DomEq(rec(c.record), c.labels)
        if isinstance(c, SchemeLeq):
            return SchemeLeq(sch(c.scheme), ty(c.type))
        if isinstance(c, AbsLeq):
            return AbsLeq(c.x, sch(c.scheme))
        if isinstance(c, (CExists, CForall)):
            return replace(c, body=go(c.body, without(c.var)))
        if isinstance(c, CLet):
            return CLet(c.x, c.var, go(c.defn, without(c.var)), go(c.body, tm))
        if isinstance(c, CLetR):
            inner = without(c.root, *c.region_vars)
            return CLetR(c.x, c.root, c.region_vars, go(c.defn, inner), go(c.body, tm))
        if isinstance(c, CMatch):
            brs = []
            for b in c.branches:
                p = b.pattern
                inner = without(p.var) if isinstance(p, PTuple) else tm
                brs.append(Branch(p, go(b.body, inner)))
            return CMatch(ty(c.scrutinee), tuple(brs), c.origin)
        kids = children(c)
        if not kids:
            return c
        return with_children(c, [go(k, tm) for k in kids])

    return go(c, tmap)


# ---------------------------------------------------------------------------
# patterns and discharge


def match_pattern(p: Pattern, sh: Shape, fresh: list) -> Optional[tuple]:
    """Return (type map, record map, scheme map) when p matches the shape, else None."""
    if len(fresh) != sh.arity:
        raise ValueError("need one fresh variable per hole")
    body = sh.body
    if isinstance(p, PWild):
        return {}, {}, {}
    if isinstance(p, PTuple):
        if isinstance(body, TTuple) and len(body.items) >= p.index:
            return {p.var: TVar(fresh[p.index - 1])}, {}, {}
        return None
    if isinstance(p, PRecord):
        if isinstance(body, TRecord):
            return {}, {p.var: body.name}, {}
        return None
    if isinstance(p, PPoly):
        if isinstance(body, TPoly):
            sigma = subst_scheme(body.scheme, {h: TVar(f) for h, f in zip(sh.holes, fresh)})
            return {}, {}, {p.var: sigma}
        return None
    raise TypeError(f"not a pattern: {p!r}")


def desugar(c: Constraint, labels: LabelEnv, fresh: Callable[[], str]) -> Constraint:
    """Rewrite a substituted meta-constraint into core constraints."""
    if isinstance(c, LabLeq):
        if isinstance(c.record, RVar):
            raise ValueError(f"unsubstituted record variable {c.record.name}")
        sch = labels.lookup(c.label, c.record)
        if sch is None:
            return CFalse(f"label:{c.label}@{c.record}")
        names = [fresh() for _ in sch.quantified]
        ren = {q: TVar(n) for q, n in zip(sch.quantified, names)}
        rec_t = subst(sch.body.dom, ren)
        field_t = subst(sch.body.cod, ren)
        return exists(names, conj(CEq(c.left, rec_t), CEq(c.right, field_t)))
    if isinstance(c, DomEq):
        if isinstance(c.record, RVar):
            raise ValueError(f"unsubstituted record variable {c.record.name}")
        if c.record in labels.records and labels.domain(c.record) == c.labels:
            return TRUE
        return CFalse(f"domain:{c.record}")
    if isinstance(c, SchemeLeq):
        if isinstance(c.scheme, SVar):
            raise ValueError(f"unsubstituted scheme variable {c.scheme.name}")
        names = [fresh() for _ in c.scheme.quantified]
        body = subst(c.scheme.body, {q: TVar(n) for q, n in zip(c.scheme.quantified, names)})
        return exists(names, CEq(body, c.type))
    if isinstance(c, AbsLeq):
        if isinstance(c.scheme, SVar):
            raise ValueError(f"unsubstituted scheme variable {c.scheme.name}")
        names = [fresh() for _ in c.scheme.quantified]
        body = subst(c.scheme.body, {q: TVar(n) for q, n in zip(c.scheme.quantified, names)})
        return forall(names, CApp(c.x, body))
    return c


def desugar_all(c: Constraint, labels: LabelEnv, fresh: Callable[[], str]) -> Constraint:
    """Desugar every substituted meta-constraint outside of match branches."""
    if isinstance(c, (LabLeq, DomEq, SchemeLeq, AbsLeq)):
        if isinstance(getattr(c, "record", None), RVar) or isinstance(getattr(c, "scheme", None), SVar):
            return c
        return desugar(c, labels, fresh)
    if isinstance(c, CMatch):
        return c
    kids = children(c)
    if not kids:
        return c
    return with_children(c, [desugar_all(k, labels, fresh) for k in kids])


def discharge(m: CMatch, sh: Shape, fresh: Callable[[], str], labels: Optional[LabelEnv] = None) -> Constraint:
    """∃γ̄. τ = sh⟨γ̄⟩ ∧ θ(C_i) for the branch that matches, else false."""
    if sh.is_trivial():
        raise ValueError("cannot discharge a match at the trivial shape")
    names = [fresh() for _ in range(sh.arity)]
    for b in m.branches:
        theta = match_pattern(b.pattern, sh, names)
        if theta is None:
            continue
        tm, rm, sm = theta
        body = subst_constraint(b.body, tm, rm, sm)
        if labels is not None:
            body = desugar_all(body, labels, fresh)
        eq = CEq(m.scrutinee, shape_apply(sh, [TVar(n) for n in names]))
        return exists(names, conj(eq, body))
    what = m.origin.describe() if m.origin else "match"
    return CFalse(f"nomatch:{what}")


# ---------------------------------------------------------------------------
# printing


def _t(t: Type) -> str:
    return show_type(t, keep_names=True)


def _sch(s) -> str:
    if isinstance(s, SVar):
        return s.name
    if s.quantified:
        return f"∀{' '.join(s.quantified)}. {_t(s.body)}"
    return _t(s.body)


def _rec(r) -> str:
    return r.name if isinstance(r, RVar) else r


def _pat(p: Pattern) -> str:
    if isinstance(p, PWild):
        return "_"
    if isinstance(p, PTuple):
        return f"Π({p.var}/{p.index})"
    if isinstance(p, PRecord):
        return p.var
    return f"[{p.var}]"


def show_constraint(c: Constraint) -> str:
    if isinstance(c, CTrue):
        return "true"
    if isinstance(c, CFalse):
        return "false"
    if isinstance(c, CAnd):
        return f"{_paren(c.left)} ∧ {_paren(c.right)}"
    if isinstance(c, CExists):
        vs = [c.var]
        body = c.body
        while isinstance(body, CExists):
            vs.append(body.var)
            body = body.body
        return f"∃{' '.join(vs)}. {show_constraint(body)}"
    if isinstance(c, CForall):
        return f"∀{c.var}. {show_constraint(c.body)}"
    if isinstance(c, CEq):
        return f"{_t(c.left)} = {_t(c.right)}"
    if isinstance(c, CMultiEq):
        return " = ".join(_t(t) for t in c.types)
    if isinstance(c, CLet):
        return f"let {c.x} = λ{c.var}. {show_constraint(c.defn)} in {show_constraint(c.body)}"
    if isinstance(c, CLetR):
        rv = " ".join(c.region_vars)
        return f"let {c.x} = λ{c.root}[{rv}]. {show_constraint(c.defn)} in {show_constraint(c.body)}"
    if isinstance(c, CApp):
        return f"{c.x} ⩽ {_t(c.type)}"
    if isinstance(c, CExistsInst):
        return f"∃{c.inst}^{c.x}. {show_constraint(c.body)}"
    if isinstance(c, CIncrInst):
        return f"{c.inst}({c.source}) ⩽ {_t(c.type)}"
    if isinstance(c, CMatch):
        brs = " | ".join(f"{_pat(b.pattern)} ⇒ {show_constraint(b.body)}" for b in c.branches)
        return f"match {_t(c.scrutinee)} with ({brs})"
    if isinstance(c, LabLeq):
        return f"{c.label}@{_rec(c.record)} ⩽ {_t(c.left)} → {_t(c.right)}"
    if isinstance(c, DomEq):
        return f"dom {_rec(c.record)} = {{{', '.join(sorted(c.labels))}}}"
    if isinstance(c, SchemeLeq):
        return f"{_sch(c.scheme)} ⩽ {_t(c.type)}"
    if isinstance(c, AbsLeq):
        return f"{c.x} ⩽ {_sch(c.scheme)}"
    raise TypeError(f"not a constraint: {c!r}")


def _paren(c: Constraint) -> str:
    s = show_constraint(c)
    if isinstance(c, (CExists, CForall, CLet, CLetR, CExistsInst)):
        return f"({s})"
    return s
