"""Types, schemes, shapes and the global label environment."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

BASE_NAMES = ("int", "bool", "float")


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True)
class TUnit(Type):
    pass


@dataclass(frozen=True)
class TBase(Type):
    name: str

    def __post_init__(self):
        if self.name not in BASE_NAMES:
            raise ValueError(f"unknown base type {self.name}")


@dataclass(frozen=True)
class TArrow(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TTuple(Type):
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuple arity must be at least 2")


@dataclass(frozen=True)
class TRecord(Type):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Scheme:
    quantified: tuple
    body: Type

    def __str__(self) -> str:
        return show_scheme(self)


@dataclass(frozen=True)
class TPoly(Type):
    scheme: Scheme


INT = TBase("int")
BOOL = TBase("bool")
FLOAT = TBase("float")
UNIT = TUnit()


def arrows(*ts: Type) -> Type:
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = TArrow(t, out)
    return out


# ---------------------------------------------------------------------------
# traversal helpers


def type_children(t: Type) -> tuple:
    if isinstance(t, TArrow):
        return (t.dom, t.cod)
    if isinstance(t, TTuple):
        return t.items
    if isinstance(t, TRecord):
        return t.args
    return ()


def rebuild(t: Type, kids: Sequence[Type]) -> Type:
    if isinstance(t, TArrow):
        return TArrow(kids[0], kids[1])
    if isinstance(t, TTuple):
        return TTuple(tuple(kids))
    if isinstance(t, TRecord):
        return TRecord(t.name, tuple(kids))
    return t


def _fv(t: Type, bound: frozenset, out: dict) -> None:
    if isinstance(t, TVar):
        if t.name not in bound:
            out.setdefault(t.name, None)
    elif isinstance(t, TPoly):
        _fv(t.scheme.body, bound | frozenset(t.scheme.quantified), out)
    else:
        for c in type_children(t):
            _fv(c, bound, out)


def free_vars(t: Type) -> list:
    """Free type variables in first-occurrence order."""
    out: dict = {}
    _fv(t, frozenset(), out)
    return list(out)


def scheme_free_vars(s: Scheme) -> list:
    return [v for v in free_vars(s.body) if v not in s.quantified]


def is_ground(t: Type) -> bool:
    return not free_vars(t)


_rename_counter = itertools.count()


def subst(t: Type, mapping: dict) -> Type:
    """Capture-avoiding substitution of free variables."""
    if not mapping:
        return t
    if isinstance(t, TVar):
        return mapping.get(t.name, t)
    if isinstance(t, TPoly):
        return TPoly(subst_scheme(t.scheme, mapping))
    kids = type_children(t)
    if not kids:
        return t
    return rebuild(t, [subst(k, mapping) for k in kids])


def subst_scheme(s: Scheme, mapping: dict) -> Scheme:
    inner = {k: v for k, v in mapping.items() if k not in s.quantified}
    if not inner:
        return s
    incoming: set = set()
    for v in inner.values():
        incoming.update(free_vars(v))
    qs = list(s.quantified)
    ren: dict = {}
    for i, q in enumerate(qs):
        if q in incoming:
            fresh = f"{q}'{next(_rename_counter)}"
            ren[q] = TVar(fresh)
            qs[i] = fresh
    body = subst(s.body, ren) if ren else s.body
    return Scheme(tuple(qs), subst(body, inner))


def normalize_scheme(s: Scheme) -> Scheme:
    """Drop unused binders; order the rest by first occurrence in the body."""
    fv = free_vars(s.body)
    qs = tuple(v for v in fv if v in s.quantified)
    return Scheme(qs, s.body)


def alpha_normal(t: Type, depth: int = 0) -> Type:
    """Rename every polytype binder canonically so alpha-equivalent types compare equal."""
    if isinstance(t, TPoly):
        s = normalize_scheme(t.scheme)
        names = tuple(f"%{depth}.{i}" for i in range(len(s.quantified)))
        body = subst(s.body, {q: TVar(n) for q, n in zip(s.quantified, names)})
        return TPoly(Scheme(names, alpha_normal(body, depth + 1)))
    kids = type_children(t)
    if not kids:
        return t
    return rebuild(t, [alpha_normal(k, depth) for k in kids])


def canonical_vars(t: Type, prefix: str = "v") -> Type:
    """Rename free variables to prefix0, prefix1, ... in first-occurrence order."""
    fv = free_vars(t)
    return subst(t, {v: TVar(f"{prefix}{i}") for i, v in enumerate(fv)})


def types_equivalent(a: Type, b: Type) -> bool:
    """Equality up to renaming of free variables and polytype binders."""
    return canonical_vars(alpha_normal(a)) == canonical_vars(alpha_normal(b))


def type_size(t: Type) -> int:
    if isinstance(t, TPoly):
        return 1 + type_size(t.scheme.body)
    return 1 + sum(type_size(c) for c in type_children(t))


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class Shape:
    holes: tuple
    body: Type

    @property
    def arity(self) -> int:
        return len(self.holes)

    def is_trivial(self) -> bool:
        return isinstance(self.body, TVar)

    def __str__(self) -> str:
        hs = " ".join(self.holes)
        return f"∀{hs}.{show_type(self.body, keep_names=True)}" if hs else show_type(self.body)


BOTTOM = Shape(("?0",), TVar("?0"))


def _holes(n: int) -> tuple:
    return tuple(f"?{i}" for i in range(n))


def decompose(t: Type) -> tuple:
    """Return (canonical shape, arguments) with shape_apply(shape, args) == t up to alpha."""
    if isinstance(t, TVar):
        raise ValueError("a type variable has no non-trivial shape")
    if isinstance(t, (TUnit, TBase)):
        return Shape((), t), []
    if isinstance(t, TArrow):
        hs = _holes(2)
        return Shape(hs, TArrow(TVar(hs[0]), TVar(hs[1]))), [t.dom, t.cod]
    if isinstance(t, TTuple):
        hs = _holes(len(t.items))
        return Shape(hs, TTuple(tuple(TVar(h) for h in hs))), list(t.items)
    if isinstance(t, TRecord):
        hs = _holes(len(t.args))
        return Shape(hs, TRecord(t.name, tuple(TVar(h) for h in hs))), list(t.args)
    if isinstance(t, TPoly):
        return _poly_decompose(t)
    raise TypeError(f"not a type: {t!r}")


def _poly_decompose(t: TPoly) -> tuple:
    norm = alpha_normal(t)
    args: list = []

    def walk(u: Type, bound: frozenset) -> Type:
        if not (set(free_vars(u)) & bound):
            name = f"?{len(args)}"
            args.append(u)
            return TVar(name)
        if isinstance(u, TVar):
            return u
        if isinstance(u, TPoly):
            inner = bound | frozenset(u.scheme.quantified)
            return TPoly(Scheme(u.scheme.quantified, walk(u.scheme.body, inner)))
        return rebuild(u, [walk(k, bound) for k in type_children(u)])

    s = norm.scheme
    body = walk(s.body, frozenset(s.quantified))
    shape = Shape(_holes(len(args)), TPoly(Scheme(s.quantified, body)))
    return shape, args


def canonical_shape(t: Type) -> Shape:
    return decompose(t)[0]


def shape_apply(sh: Shape, args: Sequence[Type]) -> Type:
    if len(args) != sh.arity:
        raise ValueError(f"shape expects {sh.arity} arguments, got {len(args)}")
    return subst(sh.body, dict(zip(sh.holes, args)))


def _match(pat: Type, t: Type, holes: set, sub: dict, bound: frozenset) -> bool:
    if isinstance(pat, TVar) and pat.name in holes:
        if set(free_vars(t)) & bound:
            return False
        if pat.name in sub:
            return sub[pat.name] == t
        sub[pat.name] = t
        return True
    if isinstance(pat, TVar):
        return pat == t
    if type(pat) is not type(t):
        return False
    if isinstance(pat, TPoly):
        if pat.scheme.quantified != t.scheme.quantified:
            return False
        inner = bound | frozenset(pat.scheme.quantified)
        return _match(pat.scheme.body, t.scheme.body, holes, sub, inner)
    if isinstance(pat, TBase):
        return pat.name == t.name
    if isinstance(pat, TRecord) and pat.name != t.name:
        return False
    pk, tk = type_children(pat), type_children(t)
    if len(pk) != len(tk):
        return False
    return all(_match(a, b, holes, sub, bound) for a, b in zip(pk, tk))


def shape_more_general(a: Shape, b: Shape) -> bool:
    """True iff b is an instance of a (one-way matching of bodies)."""
    sub: dict = {}
    return _match(alpha_normal(a.body), alpha_normal(b.body), set(a.holes), sub, frozenset())


def match_type(pat: Type, t: Type) -> Optional[dict]:
    """One-way matching: substitution s over free vars of pat with s(pat) == t."""
    sub: dict = {}
    ok = _match(alpha_normal(pat), alpha_normal(t), set(free_vars(pat)), sub, frozenset())
    return sub if ok else None


# ---------------------------------------------------------------------------
# records and labels


class LabelError(Exception):
    pass


@dataclass(frozen=True)
class RecordDecl:
    name: str
    params: tuple
    fields: tuple  # of (label, Type)

    @property
    def labels(self) -> frozenset:
        return frozenset(l for l, _ in self.fields)

    def field_type(self, label: str) -> Optional[Type]:
        for l, t in self.fields:
            if l == label:
                return t
        return None


@dataclass
class LabelEnv:
    records: dict = field(default_factory=dict)

    def declare(self, decl: RecordDecl) -> None:
        if decl.name in self.records:
            raise LabelError(f"record {decl.name} declared twice")
        if decl.name in BASE_NAMES or decl.name == "unit":
            raise LabelError(f"record name {decl.name} is reserved")
        if len(set(decl.params)) != len(decl.params):
            raise LabelError(f"duplicate parameter in {decl.name}")
        seen = set()
        for l, t in decl.fields:
            if l in seen:
                raise LabelError(f"duplicate label {l} in {decl.name}")
            seen.add(l)
            for v in free_vars(t):
                if v not in decl.params:
                    raise LabelError(f"undeclared type variable '{v} in {decl.name}")
            self._check_arity(t, decl)
        self.records[decl.name] = decl

    def _check_arity(self, t: Type, decl: RecordDecl) -> None:
        if isinstance(t, TRecord):
            if t.name == decl.name:
                n = len(decl.params)
            elif t.name in self.records:
                n = len(self.records[t.name].params)
            else:
                raise LabelError(f"unknown record type {t.name}")
            if len(t.args) != n:
                raise LabelError(f"record {t.name} expects {n} arguments")
        if isinstance(t, TPoly):
            self._check_arity(t.scheme.body, decl)
            return
        for c in type_children(t):
            self._check_arity(c, decl)

    def arity(self, name: str) -> int:
        return len(self.records[name].params)

    def domain(self, name: str) -> frozenset:
        return self.records[name].labels

    def lookup(self, label: str, name: str) -> Optional[Scheme]:
        """Projection scheme ∀ā. T[ā] -> τ for label l of record T."""
        decl = self.records.get(name)
        if decl is None:
            return None
        ft = decl.field_type(label)
        if ft is None:
            return None
        rec = TRecord(name, tuple(TVar(p) for p in decl.params))
        return Scheme(decl.params, TArrow(rec, ft))

    def records_with(self, label: str) -> list:
        return [n for n, d in self.records.items() if label in d.labels]

    def label_unique(self, label: str) -> Optional[str]:
        hits = self.records_with(label)
        return hits[0] if len(hits) == 1 else None

    def labels_unique(self, labels: Iterable[str]) -> Optional[str]:
        ls = frozenset(labels)
        hits = [n for n, d in self.records.items() if d.labels == ls]
        return hits[0] if len(hits) == 1 else None

    def copy(self) -> "LabelEnv":
        return LabelEnv(dict(self.records))


# ---------------------------------------------------------------------------
# printing


def _letters() -> Iterator[str]:
    for n in itertools.count(1):
        for combo in itertools.product("abcdefghijklmnopqrstuvwxyz", repeat=n):
            yield "".join(combo)


class _Namer:
    def __init__(self, keep: bool):
        self.keep = keep
        self.names: dict = {}
        self.gen = _letters()

    def fresh(self) -> str:
        return next(self.gen)

    def name(self, v: str) -> str:
        if self.keep:
            return v
        if v not in self.names:
            self.names[v] = self.fresh()
        return self.names[v]


def show_type(t: Type, keep_names: bool = False) -> str:
    """Print a type; free variables become 'a, 'b, ... by first occurrence."""
    return _show(t, _Namer(keep_names), {}, 0)


def show_scheme(s: Scheme) -> str:
    return show_type(s.body)


# precedence: 0 arrow, 1 tuple, 2 application, 3 atom
def _show(t: Type, nm: _Namer, bound: dict, prec: int) -> str:
    if isinstance(t, TVar):
        if t.name in bound:
            return "'" + bound[t.name]
        return ("'" + nm.name(t.name)) if not nm.keep else t.name
    if isinstance(t, TUnit):
        return "unit"
    if isinstance(t, TBase):
        return t.name
    if isinstance(t, TArrow):
        s = f"{_show(t.dom, nm, bound, 1)} -> {_show(t.cod, nm, bound, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, TTuple):
        s = " * ".join(_show(c, nm, bound, 2) for c in t.items)
        return f"({s})" if prec > 1 else s
    if isinstance(t, TRecord):
        if not t.args:
            return t.name
        if len(t.args) == 1:
            return f"{_show(t.args[0], nm, bound, 2)} {t.name}"
        inner = ", ".join(_show(c, nm, bound, 0) for c in t.args)
        return f"({inner}) {t.name}"
    if isinstance(t, TPoly):
        s = t.scheme
        inner = dict(bound)
        qs = []
        for q in s.quantified:
            n = nm.fresh() if not nm.keep else q
            inner[q] = n
            qs.append("'" + n)
        body = _show(s.body, nm, inner, 0)
        return f"[{' '.join(qs)}. {body}]" if qs else f"[{body}]"
    raise TypeError(f"not a type: {t!r}")
