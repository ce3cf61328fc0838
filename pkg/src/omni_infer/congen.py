"""Constraint generation: translate OML terms into constraints."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .constraint_lang import (
    AbsLeq, Branch, CApp, CEq, CFalse, CForall, CLet, CMatch, Constraint, DomEq,
    FreshSupply, LabLeq, MatchOrigin, PPoly, PRecord, PTuple, RVar, SVar,
    SchemeLeq, TRUE, conj, desugar, exists, forall,
)
from .core_types import (
    BOOL, FLOAT, INT, UNIT, LabelEnv, Scheme, TArrow, TPoly, TRecord, TTuple,
    TVar, Type, arrows, subst, subst_scheme,
)
from . import surface as S


class GenError(Exception):
    def __init__(self, msg: str, span=None):
        where = f" (at {span})" if span is not None else ""
        super().__init__(msg + where)
        self.msg = msg
        self.span = span


def builtin_env() -> dict:
    a, b = TVar("a"), TVar("b")
    return {
        "+": Scheme((), arrows(INT, INT, INT)),
        "app": Scheme(("a", "b"), arrows(TArrow(a, b), a, b)),
        "rev_app": Scheme(("a", "b"), arrows(a, TArrow(a, b), b)),
        "ite": Scheme(("a",), arrows(BOOL, a, a, a)),
    }


@dataclass
class UserLet:
    name: str
    var: str
    depth: int
    span: object = None


@dataclass
class GenState:
    labels: LabelEnv
    env: dict = field(default_factory=builtin_env)
    fresh: FreshSupply = field(default_factory=lambda: FreshSupply("α"))
    lets: list = field(default_factory=list)
    _box: int = 0

    def var(self) -> str:
        return self.fresh()

    def box_name(self) -> str:
        self._box += 1
        return f"%box{self._box}"


def generate(e: S.Term, expected: Type, state: GenState) -> Constraint:
    """⟦e⟧τ."""
    return _gen(e, expected, state, frozenset(state.env), {}, 0)


def generate_scheme(e: S.Term, expected: Scheme, state: GenState) -> Constraint:
    """⟦e⟧(∀ᾱ.τ) = ∀ᾱ.⟦e⟧τ, with the binders renamed apart."""
    names = [state.var() for _ in expected.quantified]
    body = subst(expected.body, {q: TVar(n) for q, n in zip(expected.quantified, names)})
    return forall(names, generate(e, body, state))


def _flex(flex, tyscope: dict, st: GenState) -> tuple:
    fresh = [st.var() for _ in (flex or ())]
    inner = dict(tyscope)
    inner.update({v: TVar(n) for v, n in zip(flex or (), fresh)})
    return fresh, inner


def _origin(kind, detail, e) -> MatchOrigin:
    return MatchOrigin(kind, detail, getattr(e, "span", None))


def _gen(e, tau: Type, st: GenState, terms: frozenset, tys: dict, depth: int) -> Constraint:
    g = lambda u, t, ts=tys, tm=terms: _gen(u, t, st, tm, ts, depth)

    if isinstance(e, S.Var):
        if e.name not in terms:
            raise GenError(f"unbound variable {e.name}", e.span)
        return CApp(e.name, tau)
    if isinstance(e, S.UnitLit):
        return CEq(tau, UNIT)
    if isinstance(e, S.IntLit):
        return CEq(tau, INT)
    if isinstance(e, S.BoolLit):
        return CEq(tau, BOOL)
    if isinstance(e, S.FloatLit):
        return CEq(tau, FLOAT)

    if isinstance(e, S.Fun):
        a, b, ap = st.var(), st.var(), st.var()
        body = _gen(e.body, TVar(b), st, terms | {e.param}, tys, depth)
        param = CLet(e.param, ap, CEq(TVar(ap), TVar(a)), body)
        return exists([a, b], conj(param, CEq(tau, TArrow(TVar(a), TVar(b)))))

    if isinstance(e, S.App):
        a, b = st.var(), st.var()
        return exists([a, b], conj(g(e.fn, TVar(b)), g(e.arg, TVar(a)),
                                   CEq(TVar(b), TArrow(TVar(a), tau))))

    if isinstance(e, S.Let):
        a = st.var()
        st.lets.append(UserLet(e.name, a, depth + 1, e.span))
        defn = _gen(e.defn, TVar(a), st, terms, tys, depth + 1)
        body = _gen(e.body, tau, st, terms | {e.name}, tys, depth)
        return CLet(e.name, a, defn, body)

    if isinstance(e, S.Annot):
        names, inner = _flex(e.flex, tys, st)
        t = subst(e.texpr, inner)
        return exists(names, conj(g(e.term, t, inner), CEq(tau, t)))

    if isinstance(e, S.TupleLit):
        names = [st.var() for _ in e.items]
        parts = [g(item, TVar(n)) for item, n in zip(e.items, names)]
        return exists(names, conj(*parts, CEq(tau, TTuple(tuple(TVar(n) for n in names)))))

    if isinstance(e, S.ProjExplicit):
        names = [st.var() for _ in range(e.arity)]
        tup = TTuple(tuple(TVar(n) for n in names))
        return exists(names, conj(g(e.term, tup), CEq(tau, TVar(names[e.index - 1]))))

    if isinstance(e, S.ProjImplicit):
        a, b = st.var(), st.var()
        m = CMatch(TVar(a), (Branch(PTuple(b, e.index), CEq(tau, TVar(b))),),
                   _origin("tuple projection", f".{e.index}", e))
        return exists([a], conj(g(e.term, TVar(a)), m))

    if isinstance(e, S.PolyBoxExplicit):
        names, inner = _flex(e.flex, tys, st)
        sigma = subst_scheme(e.scheme, inner)
        qs = [st.var() for _ in sigma.quantified]
        body = subst(sigma.body, {q: TVar(n) for q, n in zip(sigma.quantified, qs)})
        check = forall(qs, g(e.term, body, inner))
        return exists(names, conj(check, CEq(tau, TPoly(sigma))))

    if isinstance(e, S.UnboxExplicit):
        names, inner = _flex(e.flex, tys, st)
        sigma = subst_scheme(e.scheme, inner)
        inst = desugar(SchemeLeq(sigma, tau), st.labels, st.var)
        return exists(names, conj(g(e.term, TPoly(sigma), inner), inst))

    if isinstance(e, S.UnboxImplicit):
        a = st.var()
        m = CMatch(TVar(a), (Branch(PPoly("ς"), SchemeLeq(SVar("ς"), tau)),),
                   _origin("polytype unboxing", "<_>", e))
        return exists([a], conj(g(e.term, TVar(a)), m))

    if isinstance(e, S.PolyBoxImplicit):
        a, x = st.var(), st.box_name()
        defn = _gen(e.term, TVar(a), st, terms, tys, depth + 1)
        m = CMatch(tau, (Branch(PPoly("ς"), AbsLeq(x, SVar("ς"))),),
                   _origin("polytype boxing", "[_]", e))
        return CLet(x, a, defn, m)

    if isinstance(e, S.FieldExplicit):
        if e.record not in st.labels.records:
            raise GenError(f"unbound record type {e.record}", e.span)
        a = st.var()
        return exists([a], conj(g(e.term, TVar(a)),
                                desugar(LabLeq(e.label, e.record, TVar(a), tau), st.labels, st.var)))

    if isinstance(e, S.FieldImplicit):
        a = st.var()
        owner = st.labels.label_unique(e.label)
        if owner is not None:
            proj = desugar(LabLeq(e.label, owner, TVar(a), tau), st.labels, st.var)
        elif not st.labels.records_with(e.label):
            proj = CFalse(f"label:{e.label}")
        else:
            proj = CMatch(TVar(a), (Branch(PRecord("ρ"), LabLeq(e.label, RVar("ρ"), TVar(a), tau)),),
                          _origin("record projection", f".{e.label}", e))
        return exists([a], conj(g(e.term, TVar(a)), proj))

    if isinstance(e, (S.RecordLit, S.RecordLitExplicit)):
        labels = [l for l, _ in e.fields]
        names = [st.var() for _ in labels]
        parts = [g(fe, TVar(n)) for (_, fe), n in zip(e.fields, names)]
        rec = e.record if isinstance(e, S.RecordLitExplicit) else st.labels.labels_unique(labels)
        if rec is not None:
            body = [desugar(DomEq(rec, frozenset(labels)), st.labels, st.var)]
            body += [desugar(LabLeq(l, rec, tau, TVar(n)), st.labels, st.var)
                     for l, n in zip(labels, names)]
            return exists(names, conj(*parts, *body))
        branch = conj(DomEq(RVar("ρ"), frozenset(labels)),
                      *[LabLeq(l, RVar("ρ"), tau, TVar(n)) for l, n in zip(labels, names)])
        detail = "{" + "; ".join(labels) + "}"
        m = CMatch(tau, (Branch(PRecord("ρ"), branch),), _origin("record literal", detail, e))
        return exists(names, conj(*parts, m))

    if isinstance(e, S.Hole):
        names = [st.var() for _ in e.items]
        return exists(names, conj(*[g(item, TVar(n)) for item, n in zip(e.items, names)]))

    raise TypeError(f"not a term: {e!r}")


def generate_binding(e: S.Term, state: GenState, root: str = "α0") -> Constraint:
    """Constraint for a top-level binding; `root` stays free and names its type."""
    return generate(e, TVar(root), state)
