"""Surface syntax of OML: terms, programs, parser and pretty-printer."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Optional

from .core_types import (
    BASE_NAMES, LabelEnv, LabelError, RecordDecl, Scheme, TArrow, TBase, TPoly,
    TRecord, TTuple, TUnit, TVar, Type, free_vars, show_type,
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _span():
    return field(default=None, compare=False, repr=False)


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class UnitLit(Term):
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class IntLit(Term):
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit(Term):
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FloatLit(Term):
    value: float
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Fun(Term):
    param: str
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Let(Term):
    name: str
    defn: Term
    body: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Annot(Term):
    term: Term
    flex: tuple
    texpr: Type
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class TupleLit(Term):
    items: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ProjImplicit(Term):
    term: Term
    index: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ProjExplicit(Term):
    term: Term
    index: int
    arity: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PolyBoxImplicit(Term):
    term: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PolyBoxExplicit(Term):
    term: Term
    flex: tuple
    scheme: Scheme
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class UnboxImplicit(Term):
    term: Term
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class UnboxExplicit(Term):
    term: Term
    flex: tuple
    scheme: Scheme
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordLit(Term):
    fields: tuple  # of (label, Term)
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RecordLitExplicit(Term):
    record: str
    fields: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FieldImplicit(Term):
    term: Term
    label: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FieldExplicit(Term):
    term: Term
    record: str
    label: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Hole(Term):
    items: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Expectation:
    kind: str  # accept | ambiguous | error
    scheme: Optional[Type] = None
    text: str = ""


@dataclass(frozen=True)
class Binding:
    name: str
    term: Term
    expect: Optional[Expectation] = None
    span: Optional[Span] = _span()


@dataclass
class Program:
    decls: list
    bindings: list
    labels: LabelEnv


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {"let", "in", "fun", "type", "true", "false", "if", "then", "else"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col)


_SYMBOLS = ["->", "(", ")", "[", "]", "{", "}", "<", ">", ",", ";", ":", ".",
            "=", "+", "*", "|", "#", "/"]
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"[0-9]+")


def tokenize(src: str) -> list:
    toks: list = []
    i, line, col = 0, 1, 1
    n = len(src)

    def adv(k: int):
        nonlocal i, line, col
        for ch in src[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = src[i]
        if ch in " \t\r\n":
            adv(1)
            continue
        if src.startswith("(*", i):
            sl, sc = line, col
            special = src.startswith("(*!", i)
            depth, j = 0, i
            while j < n:
                if src.startswith("(*", j):
                    depth += 1
                    j += 2
                elif src.startswith("*)", j):
                    depth -= 1
                    j += 2
                    if depth == 0:
                        break
                else:
                    j += 1
            if depth != 0:
                raise ParseError("unterminated comment", sl, sc)
            text = src[i:j]
            adv(j - i)
            if special:
                toks.append(Tok("EXPECT", text[3:-2].strip(), sl, sc))
            continue
        sl, sc = line, col
        if ch == "'":
            m = _IDENT.match(src, i + 1)
            if not m:
                raise ParseError("bad type variable", sl, sc)
            toks.append(Tok("TYVAR", m.group(0), sl, sc))
            adv(1 + len(m.group(0)))
            continue
        if ch.isdigit():
            m = _NUM.match(src, i)
            text = m.group(0)
            prev_dot = toks and toks[-1].kind == "."
            j = i + len(text)
            if not prev_dot and j + 1 < n and src[j] == "." and src[j + 1].isdigit():
                m2 = _NUM.match(src, j + 1)
                text = text + "." + m2.group(0)
                toks.append(Tok("FLOAT", text, sl, sc))
            else:
                toks.append(Tok("INT", text, sl, sc))
            adv(len(text))
            continue
        m = _IDENT.match(src, i)
        if m:
            word = m.group(0)
            toks.append(Tok(word if word in KEYWORDS else "IDENT", word, sl, sc))
            adv(len(word))
            continue
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Tok(sym, sym, sl, sc))
                adv(len(sym))
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", sl, sc)
    toks.append(Tok("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser


class Parser:
    def __init__(self, src: str, labels: Optional[LabelEnv] = None):
        self.toks = tokenize(src)
        self.pos = 0
        self.labels = labels.copy() if labels is not None else LabelEnv()
        self._fresh = itertools.count(1)

    # token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, kind: str) -> bool:
        return self.tok.kind == kind

    def eat(self, kind: str) -> Tok:
        t = self.tok
        if t.kind != kind:
            want = kind if kind != "IDENT" else "identifier"
            got = t.text or t.kind
            raise ParseError(f"expected {want}, found {got!r}", t.line, t.col)
        self.pos += 1
        return t

    def accept(self, kind: str) -> Optional[Tok]:
        if self.tok.kind == kind:
            return self.eat(kind)
        return None

    def error(self, msg: str, tok: Optional[Tok] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def fresh_tyvar(self) -> str:
        return f"_{next(self._fresh)}"

    # program
    def program(self) -> Program:
        decls, binds = [], []
        while not self.at("EOF"):
            if self.at("type"):
                decls.append(self.typedecl())
            elif self.at("let"):
                binds.append(self.toplet())
            elif self.at("EXPECT"):
                self.error("expectation comment must follow a let binding")
            else:
                self.error(f"unexpected {self.tok.text!r} at top level")
        return Program(decls, binds, self.labels)

    def typedecl(self) -> RecordDecl:
        start = self.eat("type")
        params: list = []
        if self.at("TYVAR"):
            params.append(self.eat("TYVAR").text)
        elif self.at("(") and self.peek().kind == "TYVAR":
            self.eat("(")
            params.append(self.eat("TYVAR").text)
            while self.accept(","):
                params.append(self.eat("TYVAR").text)
            self.eat(")")
        name_tok = self.eat("IDENT")
        name = name_tok.text
        self.eat("=")
        self.eat("{")
        # allow self reference while parsing the fields
        self._pending = (name, len(params))
        fields = []
        while True:
            lab = self.eat("IDENT").text
            self.eat(":")
            fields.append((lab, self.type_expr()))
            if not self.accept(";") or self.at("}"):
                break
        self.eat("}")
        self._pending = None
        decl = RecordDecl(name, tuple(params), tuple(fields))
        try:
            self.labels.declare(decl)
        except LabelError as e:
            raise ParseError(str(e), start.line, start.col) from None
        return decl

    def toplet(self) -> Binding:
        start = self.eat("let")
        name = self.eat("IDENT").text
        defn = self.let_rhs(start)
        defn = resolve_annotations(defn, frozenset(), self)
        expect = None
        while self.at("EXPECT"):
            tok = self.eat("EXPECT")
            if expect is not None:
                self.error("more than one expectation for a binding", tok)
            expect = self.expectation(tok)
        return Binding(name, defn, expect, start.span)

    def expectation(self, tok: Tok) -> Expectation:
        text = tok.text
        head, _, rest = text.partition(":")
        kind = head.strip()
        if kind not in ("accept", "ambiguous", "error"):
            self.error(f"unknown expectation {kind!r}", tok)
        scheme = None
        if kind == "accept" and rest.strip():
            sub = Parser(rest, self.labels)
            try:
                scheme = sub.type_expr()
                sub.eat("EOF")
            except ParseError as e:
                raise ParseError(f"in expectation: {e.msg}", tok.line, tok.col) from None
        return Expectation(kind, scheme, rest.strip())

    def let_rhs(self, start: Tok) -> Term:
        """Parameters, optional return annotation, '=' and the definition."""
        params = []
        while not self.at("=") and not self.at(":"):
            params.append(self.param())
        ret = None
        if self.accept(":"):
            ret = self.type_expr()
        self.eat("=")
        body = self.expr()
        return self.build_fun(params, ret, body, start.span)

    def param(self):
        t = self.tok
        if self.accept("IDENT"):
            return (t.text, None, t.span)
        if self.at("(") and self.peek().kind == ")":
            self.eat("(")
            self.eat(")")
            return ("_", TUnit(), t.span)
        if self.accept("("):
            name = self.eat("IDENT").text
            self.eat(":")
            ty = self.type_expr()
            self.eat(")")
            return (name, ty, t.span)
        self.error(f"expected a parameter, found {t.text!r}")

    def build_fun(self, params, ret, body, span) -> Term:
        out = body
        for name, _, sp in reversed(params):
            out = Fun(name, out, span=sp)
        if ret is None and all(ty is None for _, ty, _ in params):
            return out
        parts = []
        for _, ty, _ in params:
            parts.append(ty if ty is not None else TVar(self.fresh_tyvar()))
        full = ret if ret is not None else TVar(self.fresh_tyvar())
        for p in reversed(parts):
            full = TArrow(p, full)
        return Annot(out, None, full, span=span)

    # expressions
    def expr(self) -> Term:
        t = self.tok
        if self.at("let"):
            self.eat("let")
            name = self.eat("IDENT").text
            defn = self.let_rhs(t)
            self.eat("in")
            body = self.expr()
            return Let(name, defn, body, span=t.span)
        if self.at("fun"):
            self.eat("fun")
            params = [self.param()]
            while not self.at("->"):
                params.append(self.param())
            self.eat("->")
            body = self.expr()
            return self.build_fun(params, None, body, t.span)
        if self.at("if"):
            self.eat("if")
            c = self.expr()
            self.eat("then")
            a = self.expr()
            self.eat("else")
            b = self.expr()
            ite = Var("ite", span=t.span)
            return App(App(App(ite, c, span=t.span), a, span=t.span), b, span=t.span)
        first = self.plus_expr()
        if self.at(","):
            items = [first]
            while self.accept(","):
                items.append(self.tuple_item())
            return TupleLit(tuple(items), span=t.span)
        return first

    def tuple_item(self) -> Term:
        if self.at("let") or self.at("fun") or self.at("if"):
            return self.expr()
        return self.plus_expr()

    def plus_expr(self) -> Term:
        left = self.app_expr()
        while self.at("+"):
            op = self.eat("+")
            right = self.app_expr()
            left = App(App(Var("+", span=op.span), left, span=op.span), right, span=op.span)
        return left

    _ATOM_START = {"IDENT", "INT", "FLOAT", "true", "false", "(", "[", "<", "{", "#"}

    def app_expr(self) -> Term:
        fn = self.postfix_expr()
        while self.tok.kind in self._ATOM_START:
            arg = self.postfix_expr()
            fn = App(fn, arg, span=getattr(arg, "span", None))
        return fn

    def postfix_expr(self) -> Term:
        e = self.atom()
        while self.at("."):
            dot = self.eat(".")
            if self.at("INT"):
                j = int(self.eat("INT").text)
                if j < 1:
                    self.error("tuple index must be at least 1", dot)
                e = ProjImplicit(e, j, span=dot.span)
            elif self.at("("):
                self.eat("(")
                j = int(self.eat("INT").text)
                self.eat("/")
                n = int(self.eat("INT").text)
                self.eat(")")
                if not (1 <= j <= n and n >= 2):
                    self.error(f"bad explicit projection {j}/{n}", dot)
                e = ProjExplicit(e, j, n, span=dot.span)
            else:
                lab = self.eat("IDENT")
                if lab.text in self.labels.records and self.at(".") and self.peek().kind == "IDENT":
                    self.eat(".")
                    real = self.eat("IDENT")
                    e = FieldExplicit(e, lab.text, real.text, span=dot.span)
                else:
                    e = FieldImplicit(e, lab.text, span=dot.span)
        return e

    def atom(self) -> Term:
        t = self.tok
        k = t.kind
        if k == "IDENT":
            self.eat("IDENT")
            return Var(t.text, span=t.span)
        if k == "INT":
            self.eat("INT")
            return IntLit(int(t.text), span=t.span)
        if k == "FLOAT":
            self.eat("FLOAT")
            return FloatLit(float(t.text), span=t.span)
        if k in ("true", "false"):
            self.eat(k)
            return BoolLit(k == "true", span=t.span)
        if k == "(":
            self.eat("(")
            if self.accept(")"):
                return UnitLit(span=t.span)
            if self.at("+") and self.peek().kind == ")":
                self.eat("+")
                self.eat(")")
                return Var("+", span=t.span)
            e = self.expr()
            if self.accept(":"):
                flex, ty = self.annot_type()
                self.eat(")")
                return Annot(e, flex, ty, span=t.span)
            self.eat(")")
            return e
        if k == "[":
            self.eat("[")
            e = self.expr()
            if self.accept(":"):
                sch = self.scheme_expr()
                self.eat("]")
                return PolyBoxExplicit(e, None, sch, span=t.span)
            self.eat("]")
            return PolyBoxImplicit(e, span=t.span)
        if k == "<":
            self.eat("<")
            e = self.expr()
            if self.accept(":"):
                sch = self.scheme_expr()
                self.eat(">")
                return UnboxExplicit(e, None, sch, span=t.span)
            self.eat(">")
            return UnboxImplicit(e, span=t.span)
        if k == "{":
            return self.record(t)
        if k == "#":
            self.eat("#")
            self.eat("(")
            items = []
            if not self.at(")"):
                items.append(self.tuple_item())
                while self.accept(","):
                    items.append(self.tuple_item())
            self.eat(")")
            return Hole(tuple(items), span=t.span)
        self.error(f"unexpected {t.text or t.kind!r}")

    def record(self, start: Tok) -> Term:
        self.eat("{")
        rec = None
        if self.at("IDENT") and self.peek().kind == "|":
            rt = self.eat("IDENT")
            if rt.text not in self.labels.records:
                self.error(f"unbound record type {rt.text}", rt)
            rec = rt.text
            self.eat("|")
        fields = []
        seen = set()
        while True:
            lt = self.eat("IDENT")
            if lt.text in seen:
                self.error(f"duplicate label {lt.text}", lt)
            seen.add(lt.text)
            self.eat("=")
            fields.append((lt.text, self.tuple_item_nocomma()))
            if not self.accept(";") or self.at("}"):
                break
        self.eat("}")
        if rec is not None:
            return RecordLitExplicit(rec, tuple(fields), span=start.span)
        return RecordLit(tuple(fields), span=start.span)

    def tuple_item_nocomma(self) -> Term:
        return self.expr()

    # types
    def annot_type(self):
        """`'a 'b. t` declares flexible variables explicitly; plain `t` leaves them implicit."""
        save = self.pos
        if self.at("TYVAR"):
            names = []
            while self.at("TYVAR"):
                names.append(self.eat("TYVAR").text)
            if self.accept("."):
                return tuple(names), self.type_expr()
            self.pos = save
        return None, self.type_expr()

    def scheme_expr(self) -> Scheme:
        save = self.pos
        if self.at("TYVAR"):
            names = []
            while self.at("TYVAR"):
                names.append(self.eat("TYVAR").text)
            if self.accept("."):
                if len(set(names)) != len(names):
                    self.error("duplicate quantified variable")
                return Scheme(tuple(names), self.type_expr())
            self.pos = save
        return Scheme((), self.type_expr())

    def type_expr(self) -> Type:
        left = self.tuple_type()
        if self.accept("->"):
            return TArrow(left, self.type_expr())
        return left

    def tuple_type(self) -> Type:
        items = [self.app_type()]
        while self.accept("*"):
            items.append(self.app_type())
        return items[0] if len(items) == 1 else TTuple(tuple(items))

    def app_type(self) -> Type:
        t = self.tok
        if self.at("(") :
            self.eat("(")
            first = self.type_expr()
            if self.at(","):
                args = [first]
                while self.accept(","):
                    args.append(self.type_expr())
                self.eat(")")
                nt = self.eat("IDENT")
                ty = self.record_type(nt, tuple(args))
            else:
                self.eat(")")
                ty = first
        else:
            ty = self.atom_type()
        while self.at("IDENT") and self.tok.text not in ("unit",) + BASE_NAMES:
            nt = self.eat("IDENT")
            ty = self.record_type(nt, (ty,))
        return ty

    def atom_type(self) -> Type:
        t = self.tok
        if self.accept("TYVAR"):
            return TVar(t.text)
        if self.at("IDENT"):
            self.eat("IDENT")
            if t.text == "unit":
                return TUnit()
            if t.text in BASE_NAMES:
                return TBase(t.text)
            return self.record_type(t, ())
        if self.accept("["):
            sch = self.scheme_expr()
            self.eat("]")
            return TPoly(sch)
        self.error(f"expected a type, found {t.text or t.kind!r}")

    def record_type(self, tok: Tok, args: tuple) -> Type:
        pending = getattr(self, "_pending", None)
        if pending and pending[0] == tok.text:
            n = pending[1]
        elif tok.text in self.labels.records:
            n = self.labels.arity(tok.text)
        else:
            self.error(f"unbound type constructor {tok.text}", tok)
        if len(args) != n:
            self.error(f"type {tok.text} expects {n} argument(s), got {len(args)}", tok)
        return TRecord(tok.text, args)


# ---------------------------------------------------------------------------
# annotation variable scoping


def resolve_annotations(t: Term, scope: frozenset, p: Optional[Parser] = None) -> Term:
    """Fill in the flexible variables of annotations.

    A type variable already bound by an enclosing annotation is shared;
    otherwise it is bound (existentially) by the innermost annotation that
    mentions it. Explicitly declared binders must cover all new variables.
    """
    r = lambda u, s=scope: resolve_annotations(u, s, p)
    span = getattr(t, "span", None)

    def new_vars(fv, declared):
        fresh = [v for v in fv if v not in scope]
        if declared is None:
            return tuple(fresh)
        for v in fresh:
            if v not in declared:
                line, col = (span.line, span.col) if span else (0, 0)
                raise ParseError(f"annotation mentions undeclared type variable '{v}", line, col)
        return tuple(declared)

    if isinstance(t, Annot):
        flex = new_vars(free_vars(t.texpr), t.flex)
        return Annot(r(t.term, scope | set(flex)), flex, t.texpr, span=span)
    if isinstance(t, (PolyBoxExplicit, UnboxExplicit)):
        fv = [v for v in free_vars(TPoly(t.scheme))]
        flex = new_vars(fv, t.flex)
        cls = type(t)
        return cls(r(t.term, scope | set(flex)), flex, t.scheme, span=span)
    if isinstance(t, Fun):
        return Fun(t.param, r(t.body), span=span)
    if isinstance(t, App):
        return App(r(t.fn), r(t.arg), span=span)
    if isinstance(t, Let):
        return Let(t.name, r(t.defn), r(t.body), span=span)
    if isinstance(t, TupleLit):
        return TupleLit(tuple(r(i) for i in t.items), span=span)
    if isinstance(t, Hole):
        return Hole(tuple(r(i) for i in t.items), span=span)
    if isinstance(t, ProjImplicit):
        return ProjImplicit(r(t.term), t.index, span=span)
    if isinstance(t, ProjExplicit):
        return ProjExplicit(r(t.term), t.index, t.arity, span=span)
    if isinstance(t, PolyBoxImplicit):
        return PolyBoxImplicit(r(t.term), span=span)
    if isinstance(t, UnboxImplicit):
        return UnboxImplicit(r(t.term), span=span)
    if isinstance(t, RecordLit):
        return RecordLit(tuple((l, r(e)) for l, e in t.fields), span=span)
    if isinstance(t, RecordLitExplicit):
        return RecordLitExplicit(t.record, tuple((l, r(e)) for l, e in t.fields), span=span)
    if isinstance(t, FieldImplicit):
        return FieldImplicit(r(t.term), t.label, span=span)
    if isinstance(t, FieldExplicit):
        return FieldExplicit(r(t.term), t.record, t.label, span=span)
    return t


def parse(source: str, labels: Optional[LabelEnv] = None) -> Program:
    return Parser(source, labels).program()


def parse_term(source: str, labels: Optional[LabelEnv] = None) -> Term:
    p = Parser(source, labels)
    e = p.expr()
    p.eat("EOF")
    return resolve_annotations(e, frozenset(), p)


def parse_type(source: str, labels: Optional[LabelEnv] = None) -> Type:
    p = Parser(source, labels)
    t = p.type_expr()
    p.eat("EOF")
    return t


# ---------------------------------------------------------------------------
# pretty-printing (round-trips through the parser)


def _show_src(t: Type) -> str:
    """Print a type keeping variable names, in concrete syntax."""
    return _src(t, 0)


def _src(t: Type, prec: int) -> str:
    if isinstance(t, TVar):
        return "'" + t.name
    if isinstance(t, TUnit):
        return "unit"
    if isinstance(t, TBase):
        return t.name
    if isinstance(t, TArrow):
        s = f"{_src(t.dom, 1)} -> {_src(t.cod, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, TTuple):
        s = " * ".join(_src(c, 2) for c in t.items)
        return f"({s})" if prec > 1 else s
    if isinstance(t, TRecord):
        if not t.args:
            return t.name
        if len(t.args) == 1:
            return f"{_src(t.args[0], 2)} {t.name}"
        return "(" + ", ".join(_src(a, 0) for a in t.args) + f") {t.name}"
    if isinstance(t, TPoly):
        return "[" + _scheme_src(t.scheme) + "]"
    raise TypeError(t)


def _scheme_src(s: Scheme) -> str:
    if s.quantified:
        return " ".join("'" + q for q in s.quantified) + ". " + _src(s.body, 0)
    return _src(s.body, 0)


def pretty_term(t: Term, prec: int = 0) -> str:
    def paren(s: str, level: int) -> str:
        return f"({s})" if prec > level else s

    if isinstance(t, Var):
        return "(+)" if t.name == "+" else t.name
    if isinstance(t, UnitLit):
        return "()"
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, BoolLit):
        return "true" if t.value else "false"
    if isinstance(t, FloatLit):
        return repr(t.value)
    if isinstance(t, Fun):
        return paren(f"fun {t.param} -> {pretty_term(t.body, 0)}", 0)
    if isinstance(t, Let):
        return paren(f"let {t.name} = {pretty_term(t.defn, 0)} in {pretty_term(t.body, 0)}", 0)
    if isinstance(t, TupleLit):
        return paren(", ".join(pretty_term(i, 1) for i in t.items), 0)
    if isinstance(t, App):
        if isinstance(t.fn, App) and isinstance(t.fn.fn, Var) and t.fn.fn.name == "+":
            return paren(f"{pretty_term(t.fn.arg, 1)} + {pretty_term(t.arg, 2)}", 1)
        return paren(f"{pretty_term(t.fn, 2)} {pretty_term(t.arg, 3)}", 2)
    if isinstance(t, Annot):
        flex = "".join("'" + v + " " for v in t.flex)
        head = f"{flex.strip()}. " if t.flex else ""
        return f"({pretty_term(t.term, 0)} : {head}{_src(t.texpr, 0)})"
    if isinstance(t, ProjImplicit):
        return f"{pretty_term(t.term, 3)}.{t.index}"
    if isinstance(t, ProjExplicit):
        return f"{pretty_term(t.term, 3)}.({t.index}/{t.arity})"
    if isinstance(t, PolyBoxImplicit):
        return f"[{pretty_term(t.term, 0)}]"
    if isinstance(t, PolyBoxExplicit):
        return f"[{pretty_term(t.term, 0)} : {_scheme_src(t.scheme)}]"
    if isinstance(t, UnboxImplicit):
        return f"<{pretty_term(t.term, 0)}>"
    if isinstance(t, UnboxExplicit):
        return f"<{pretty_term(t.term, 0)} : {_scheme_src(t.scheme)}>"
    if isinstance(t, RecordLit):
        return "{ " + "; ".join(f"{l} = {pretty_term(e, 0)}" for l, e in t.fields) + " }"
    if isinstance(t, RecordLitExplicit):
        inner = "; ".join(f"{l} = {pretty_term(e, 0)}" for l, e in t.fields)
        return "{ " + t.record + " | " + inner + " }"
    if isinstance(t, FieldImplicit):
        return f"{pretty_term(t.term, 3)}.{t.label}"
    if isinstance(t, FieldExplicit):
        return f"{pretty_term(t.term, 3)}.{t.record}.{t.label}"
    if isinstance(t, Hole):
        return "#(" + ", ".join(pretty_term(i, 1) for i in t.items) + ")"
    raise TypeError(f"not a term: {t!r}")


def pretty_program(p: Program) -> str:
    out = []
    for d in p.decls:
        if not d.params:
            ps = ""
        elif len(d.params) == 1:
            ps = "'" + d.params[0] + " "
        else:
            ps = "(" + ", ".join("'" + q for q in d.params) + ") "
        fs = "; ".join(f"{l} : {_src(t, 0)}" for l, t in d.fields)
        out.append(f"type {ps}{d.name} = {{ {fs} }}")
    for b in p.bindings:
        line = f"let {b.name} = {pretty_term(b.term)}"
        if b.expect is not None:
            e = b.expect
            if e.kind == "accept" and e.scheme is not None:
                line += f" (*! accept : {_src(e.scheme, 0)} *)"
            else:
                line += f" (*! {e.kind} *)"
        out.append(line)
    return "\n".join(out) + "\n"
