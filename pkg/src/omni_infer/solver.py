"""The omnidirectional constraint solver.

Regions carry levels; let-bound abstractions are instantiated lazily through
forward links, so that refinements of a partial scheme reach every instance.
Suspended matches sit on the wait list of their scrutinee until its shape is
known, either directly or by backpropagation from an instance.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .constraint_lang import (
    AbsLeq, CAnd, CApp, CEq, CExists, CExistsInst, CFalse, CForall, CIncrInst,
    CLet, CLetR, CMatch, CMultiEq, CTrue, Constraint, DomEq, FreshSupply,
    LabLeq, RVar, SVar, SchemeLeq, count_matches, desugar, discharge,
    free_type_vars, size,
)
from .core_types import LabelEnv, Scheme, Shape, TVar, Type, decompose, free_vars, show_type
from .unifier import Clash, Cycle, Engine, EscapeError, Node

# frozen from corpus and fuzz measurements (max observed steps/size² is 2)
STEP_CONSTANT = 4


class InferenceError(Exception):
    kind = "type error"

    def __init__(self, msg: str, origin=None):
        super().__init__(msg)
        self.msg = msg
        self.origin = origin

    @property
    def span(self):
        return getattr(self.origin, "span", None)


class TypeMismatch(InferenceError):
    kind = "type error"


class LabelError(InferenceError):
    kind = "label error"


class DomainError(InferenceError):
    kind = "domain error"


class ScopeEscape(InferenceError):
    kind = "escape error"


class Ambiguous(InferenceError):
    kind = "ambiguous"


class UnboundVariable(InferenceError):
    kind = "unbound variable"


class InternalError(InferenceError):
    kind = "internal error"


@dataclass(eq=False)
class Region:
    id: int
    parent: Optional["Region"]
    level: int
    kind: str  # root | let | forall
    name: Optional[str] = None
    var: Optional[str] = None
    root: Optional[Node] = None
    vars: list = field(default_factory=list)
    tasks: int = 0
    handles: int = 0
    status: str = "open"  # open | partial | generalized | stale

    def ancestors(self):
        r = self
        while r is not None:
            yield r
            r = r.parent

    def __repr__(self) -> str:
        return f"<region {self.id} {self.kind} {self.name or ''}@{self.level}>"


class Link:
    """Forward link from a region variable to its copy in one instance."""

    __slots__ = ("inst", "copy", "propagated")

    def __init__(self, inst, copy, propagated=False):
        self.inst = inst
        self.copy = copy
        self.propagated = propagated


@dataclass(eq=False)
class Instance:
    id: int
    region: Region
    site: Region


@dataclass(eq=False)
class Handle:
    id: int
    match: CMatch
    node: Node
    ctx: "Ctx"
    done: bool = False


@dataclass(frozen=True)
class Ctx:
    region: Region
    env: dict

    def bind(self, x: str, b) -> "Ctx":
        env = dict(self.env)
        env[x] = b
        return Ctx(self.region, env)


@dataclass
class SolveResult:
    ok: bool
    error: Optional[InferenceError] = None
    assignment: dict = field(default_factory=dict)
    let_schemes: dict = field(default_factory=dict)
    steps: int = 0
    size: int = 0
    match_history: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    solved_form: bool = True

    @property
    def step_bound(self) -> int:
        return STEP_CONSTANT * self.size * self.size


class Solver:
    def __init__(self, labels: Optional[LabelEnv] = None, env: Optional[dict] = None,
                 order: str = "left", trace: bool = False, instrument: bool = False):
        if order not in ("left", "right"):
            raise ValueError("order must be 'left' or 'right'")
        self.labels = labels or LabelEnv()
        self.env = dict(env or {})
        self.order = order
        self.tracing = trace
        self.instrument = instrument
        self.engine = Engine()
        self.fresh = FreshSupply("β")
        self.tv: dict = {}
        self.queue: deque = deque()
        self.ready: deque = deque()
        self.pending: list = []
        self.regions: list = []
        self.steps = 0
        self.trace: list = []
        self.match_history: list = []
        self._ids = itertools.count()
        self.root = self._region(None, "root")
        if trace:
            self.engine.trace = lambda rule, detail: self.trace.append(f"{rule}: {detail}")

    # bookkeeping --------------------------------------------------------
    def _log(self, rule: str, detail: str = "") -> None:
        self.steps += 1
        if self.tracing:
            self.trace.append(f"{rule}: {detail}" if detail else rule)

    def _region(self, parent: Optional[Region], kind: str, name=None) -> Region:
        level = parent.level + 1 if parent is not None else 0
        r = Region(next(self._ids), parent, level, kind, name)
        self.regions.append(r)
        return r

    def _fresh(self, region: Region, name=None) -> Node:
        n = self.engine.fresh(region.level, region, name)
        region.vars.append(n)
        return n

    def _push(self, c: Constraint, ctx: Ctx) -> None:
        for r in ctx.region.ancestors():
            r.tasks += 1
        self.queue.append((c, ctx))

    def _task_done(self, region: Region) -> None:
        for r in region.ancestors():
            r.tasks -= 1
            if r.tasks == 0 and r.kind == "let":
                self._generalize(r)

    def _handle_done(self, h: Handle) -> None:
        for r in h.ctx.region.ancestors():
            r.handles -= 1
            if r.handles == 0 and r.tasks == 0 and r.kind == "let":
                self._generalize(r)

    # entry point --------------------------------------------------------
    def solve(self, c: Constraint) -> SolveResult:
        res = SolveResult(ok=False, size=size(c))
        ctx = Ctx(self.root, {x: ("scheme", s) for x, s in self.env.items()})
        free = sorted(free_type_vars(c))
        for v in free:
            self.tv[v] = self._fresh(self.root, v)
        try:
            self._push(c, ctx)
            self._run()
            if self.pending:
                stuck = sorted(self.pending, key=_source_order)
                o = stuck[0].match.origin
                what = o.describe() if o else "match"
                err = Ambiguous(f"ambiguous {what}", o)
                err.stuck = [h.match for h in stuck]
                raise err
            res.ok = True
        except InferenceError as e:
            res.error = e
        except Clash as e:
            res.error = TypeMismatch(str(e))
        except Cycle as e:
            res.error = TypeMismatch(str(e))
        except EscapeError as e:
            res.error = ScopeEscape(str(e))
        res.steps = self.steps + self.engine.steps
        res.match_history = self.match_history
        res.trace = self.trace
        if res.ok:
            names: dict = {}
            for v in free:
                res.assignment[v] = self.read(self.tv[v], names)
            for r in self.regions:
                if r.kind == "let" and r.root is not None:
                    res.let_schemes[r.var] = self.scheme_of(r.root, r.level)
            res.solved_form = self.engine.solved_form()
        return res

    def _run(self) -> None:
        while True:
            if self.instrument:
                self.match_history.append(self.live_matches())
            if self.ready:
                h, sh, rule = self.ready.popleft()
                if not h.done:
                    self._discharge(h, sh, rule)
                continue
            if self.queue:
                c, ctx = self.queue.popleft()
                self._visit(c, ctx)
                self._task_done(ctx.region)
                continue
            if self._backprop():
                continue
            return

    def live_matches(self) -> int:
        n = sum(count_matches(c) for c, _ in self.queue)
        return n + sum(count_matches(h.match) for h in self.pending)

    # constraint traversal -----------------------------------------------
    def _visit(self, c: Constraint, ctx: Ctx) -> None:
        if isinstance(c, CTrue):
            self._log("S-True")
        elif isinstance(c, CFalse):
            self._log("S-False", c.reason)
            raise _false_error(c.reason)
        elif isinstance(c, CAnd):
            self._log("S-Conj")
            first, second = (c.left, c.right) if self.order == "left" else (c.right, c.left)
            self._push(first, ctx)
            self._push(second, ctx)
        elif isinstance(c, CExists):
            self._log("U-Exists", c.var)
            self.tv[c.var] = self._fresh(ctx.region, c.var)
            self._visit(c.body, ctx)
        elif isinstance(c, CForall):
            self._log("S-Exists-All", c.var)
            inner = self._region(ctx.region, "forall", c.var)
            self.tv[c.var] = self.engine.rigid(inner.level, inner, c.var)
            inner.vars.append(self.tv[c.var])
            self._visit(c.body, Ctx(inner, ctx.env))
        elif isinstance(c, CEq):
            self._log("S-Unif", f"{_t(c.left)} = {_t(c.right)}")
            self.unify(self.node_of(c.left, ctx), self.node_of(c.right, ctx))
        elif isinstance(c, CMultiEq):
            self._log("S-Unif", " = ".join(_t(t) for t in c.types))
            nodes = [self.node_of(t, ctx) for t in c.types]
            for a, b in zip(nodes, nodes[1:]):
                self.unify(a, b)
        elif isinstance(c, CLet):
            self._log("S-Let", c.x)
            r = self._region(ctx.region, "let", c.x)
            r.var = c.var
            r.root = self._fresh(r, c.var)
            self.tv[c.var] = r.root
            defn = (c.defn, Ctx(r, ctx.env))
            body = (c.body, ctx.bind(c.x, ("let", r)))
            for part in ((defn, body) if self.order == "left" else (body, defn)):
                self._push(*part)
        elif isinstance(c, CApp):
            self._app(c, ctx)
        elif isinstance(c, CMatch):
            node = self.node_of(c.scrutinee, ctx)
            h = Handle(next(self._ids), c, node, ctx)
            self.pending.append(h)
            for r in ctx.region.ancestors():
                r.handles += 1
            root = self.engine.find(node)
            if root.structure is not None:
                self.ready.append((h, root.structure[0], "Uni-Type"))
            else:
                self._log("S-Match-Suspend", _t(c.scrutinee))
                root.waiters.append(h)
        elif isinstance(c, (LabLeq, DomEq, SchemeLeq, AbsLeq)):
            if isinstance(getattr(c, "record", None), RVar) or isinstance(getattr(c, "scheme", None), SVar):
                raise InternalError("unsubstituted pattern variable outside a match branch")
            self._visit(desugar(c, self.labels, self.fresh), ctx)
        elif isinstance(c, (CLetR, CExistsInst, CIncrInst)):
            raise InternalError("administrative constraints are only built inside the solver")
        else:
            raise InternalError(f"unknown constraint {c!r}")

    def node_of(self, t: Type, ctx: Ctx, scope: Optional[dict] = None) -> Node:
        if isinstance(t, TVar):
            if scope and t.name in scope:
                return scope[t.name]
            if t.name not in self.tv:
                raise InternalError(f"unbound type variable {t.name}")
            return self.tv[t.name]
        sh, args = decompose(t)
        kids = [self.node_of(a, ctx, scope) for a in args]
        n = self.engine.make(sh, kids, ctx.region.level, ctx.region)
        ctx.region.vars.append(n)
        return n

    def _app(self, c: CApp, ctx: Ctx) -> None:
        b = ctx.env.get(c.x)
        if b is None:
            raise UnboundVariable(f"unbound variable {c.x}")
        target = self.node_of(c.type, ctx)
        if b[0] == "scheme":
            sch: Scheme = b[1]
            self._log("S-Let-App", c.x)
            scope = {q: self._fresh(ctx.region) for q in sch.quantified}
            self.unify(self.node_of(sch.body, ctx, scope), target)
            return
        region: Region = b[1]
        if region.status == "stale":
            self._classify(region)
        inst = Instance(next(self._ids), region, ctx.region)
        self._log("S-Let-AppR", c.x)
        self.unify(self.copy(inst, region.root), target)

    # instances ----------------------------------------------------------
    def copy(self, inst: Instance, k: Node) -> Node:
        r = self.engine.find(k)
        if r.level < inst.region.level:
            self._log("S-Inst-Mono", repr(r))
            return r
        for L in r.links:
            if L.inst is inst:
                return L.copy
        if r.rigid:
            raise InternalError("a rigid variable is reachable from a let-bound root")
        c = self._fresh(inst.site)
        c.cls = "PI" if r.cls == "PG" else "I"
        L = Link(inst, c)
        r.links.append(L)
        if r.structure is not None:
            sh, kids = r.structure
            self._log("S-Inst-Copy", str(sh))
            L.propagated = True
            c.structure = (sh, [self.copy(inst, x) for x in kids])
        return c

    def unify(self, a: Node, b: Node) -> None:
        pairs = [(a, b)]
        while pairs:
            x, y = pairs.pop()
            out = self.engine.unify(x, y)
            for h in out.runnable:
                if not h.done:
                    self.ready.append((h, self.engine.find(h.node).structure[0], "Uni-Type"))
            pairs.extend(self._links(out.touched))

    def _links(self, touched) -> list:
        find = self.engine.find
        out = []
        seen = set()
        for r in touched:
            r = find(r)
            if r.id in seen:
                continue
            seen.add(r.id)
            if r.region is not None and r.region.status in ("partial", "generalized"):
                r.region.status = "stale"
            if not r.links:
                continue
            keep, by_inst = [], {}
            for L in r.links:
                if r.level < L.inst.region.level:
                    self._log("S-Inst-Mono", repr(r))
                    out.append((L.copy, r))
                    continue
                prev = by_inst.get(L.inst.id)
                if prev is not None:
                    self._log("S-Inst-Unify", repr(r))
                    out.append((prev.copy, L.copy))
                    prev.propagated = prev.propagated or L.propagated
                    continue
                by_inst[L.inst.id] = L
                keep.append(L)
            r.links = keep
            if r.structure is None:
                continue
            sh, kids = r.structure
            for L in keep:
                if L.propagated:
                    continue
                L.propagated = True
                self._log("S-Inst-Copy", str(sh))
                site = L.inst.site
                copies = [self.copy(L.inst, k) for k in kids]
                n = self.engine.make(sh, copies, site.level, site)
                out.append((L.copy, n))
        return out

    # matches ------------------------------------------------------------
    def _discharge(self, h: Handle, sh: Shape, rule: str) -> None:
        h.done = True
        self.pending.remove(h)
        o = h.match.origin
        what = f" {o.describe()}" if o else ""
        self._log("S-Match-Ctx", f"{rule}{what} at {sh}")
        body = discharge(h.match, sh, self.fresh, self.labels)
        self._push(body, h.ctx)
        self._handle_done(h)

    def unicity(self, node: Node, seen: Optional[set] = None) -> Optional[Shape]:
        """Uni-Type on the class, else Uni-BackProp through instance copies."""
        seen = set() if seen is None else seen
        r = self.engine.find(node)
        if r.structure is not None:
            return r.structure[0]
        if r.id in seen:
            return None
        seen.add(r.id)
        for L in r.links:
            s = self.unicity(L.copy, seen)
            if s is not None:
                return s
        return None

    def _backprop(self) -> bool:
        for h in sorted(self.pending, key=lambda h: h.id):
            sh = self.unicity(h.node)
            if sh is not None:
                self.ready.append((h, sh, "Uni-BackProp"))
                return True
        return False

    # generalisation -----------------------------------------------------
    def _generalize(self, r: Region) -> None:
        find = self.engine.find
        changed = True
        while changed:
            changed = False
            for v in r.vars:
                n = find(v)
                if n.region is not r or n.level != r.level or n.structure is None or n.rigid:
                    continue
                if all(find(k).level < r.level for k in n.structure[1]):
                    # Det-Esc: fully determined by outer variables
                    self._log("S-Exists-Lower", repr(n))
                    lvl = max([find(k).level for k in n.structure[1]] + [r.level - 1])
                    out = self.engine.lower(n, lvl)
                    for a, b in self._links(out.touched + [n]):
                        self.unify(a, b)
                    changed = True
        self._classify(r)
        if r.handles == 0:
            self._log("S-Let-Solve", r.name or "")

    def _classify(self, r: Region) -> None:
        find = self.engine.find
        guarded = set()
        for h in self.pending:
            if any(x is r for x in h.ctx.region.ancestors()):
                guarded.add(find(h.node).id)
        for v in r.vars:
            n = find(v)
            if n.region is not r:
                continue
            n.cls = "PG" if n.id in guarded or self._reaches(n, guarded, r) else "G"
        r.status = "partial" if r.handles else "generalized"

    def _reaches(self, n: Node, guarded: set, r: Region) -> bool:
        find = self.engine.find
        todo, seen = [n], set()
        while todo:
            x = find(todo.pop())
            if x.id in seen or x.level < r.level:
                continue
            seen.add(x.id)
            if x.id in guarded:
                return True
            if x.structure is not None:
                todo.extend(x.structure[1])
        return False

    # reading results ----------------------------------------------------
    def read(self, n: Node, names: Optional[dict] = None) -> Type:
        return self.engine.read(n, names)

    def scheme_of(self, n: Node, level: int) -> Scheme:
        names: dict = {}
        t = self.engine.read(n, names)
        gen = set()
        for node in self.engine.nodes:
            root = self.engine.find(node)
            if root.id in names and root.level >= level:
                gen.add(names[root.id])
        qs = tuple(v for v in free_vars(t) if v in gen)
        return Scheme(qs, t)


def _source_order(h: Handle):
    span = getattr(h.match.origin, "span", None)
    if span is None:
        return (1, 0, 0, h.id)
    return (0, span.line, span.col, h.id)


def _false_error(reason: str) -> InferenceError:
    if reason.startswith("label:"):
        lab, _, rec = reason[6:].partition("@")
        if rec:
            return LabelError(f"record {rec} has no field {lab}")
        return LabelError(f"no record type has a field {lab}")
    if reason.startswith("domain:"):
        return DomainError(f"record literal does not match the fields of {reason[7:]}")
    if reason.startswith("nomatch:"):
        return TypeMismatch(f"shape mismatch in {reason[8:]}")
    return TypeMismatch(reason or "unsatisfiable constraint")


def _t(t: Type) -> str:
    return show_type(t, keep_names=True)


def solve(c: Constraint, labels: Optional[LabelEnv] = None, env: Optional[dict] = None,
          order: str = "left", trace: bool = False, instrument: bool = False) -> SolveResult:
    return Solver(labels, env, order, trace, instrument).solve(c)
