"""Destructive union-find unification over canonical shapes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .core_types import Shape, TVar, Type, decompose, shape_apply


class UnifyError(Exception):
    kind = "type error"


class Clash(UnifyError):
    kind = "clash"

    def __init__(self, left, right):
        super().__init__(f"cannot unify {left} with {right}")
        self.left = left
        self.right = right


class Cycle(UnifyError):
    kind = "cycle"

    def __init__(self, what: str = ""):
        super().__init__(f"occurs check failed {what}".strip())


class EscapeError(UnifyError):
    kind = "escape"


class Node:
    """A union-find cell; the representative carries the class descriptor."""

    __slots__ = ("id", "parent", "structure", "level", "region", "rigid",
                 "rigid_level", "name", "waiters", "links", "cls", "hint")

    def __init__(self, id: int, level: int, region=None):
        self.id = id
        self.parent: Optional[Node] = None
        self.structure = None  # (Shape, [Node]) or None
        self.level = level
        self.region = region
        self.rigid = False
        self.rigid_level = 0
        self.name = None
        self.waiters: list = []
        self.links: list = []
        self.cls = None
        self.hint = None

    def __repr__(self) -> str:
        return f"<n{self.id}@{self.level}>"


@dataclass
class UnifyOutcome:
    runnable: list = field(default_factory=list)
    touched: list = field(default_factory=list)


def _region_at(region, level: int):
    while region is not None and region.level > level:
        region = region.parent
    return region


class Engine:
    def __init__(self, check_weight: bool = False):
        self.nodes: list = []
        self._ids = itertools.count()
        self.steps = 0
        self.check_weight = check_weight
        self.weights: list = []
        self.trace = None  # optional callable(rule, detail)

    # construction -------------------------------------------------------
    def fresh(self, level: int = 0, region=None, name: Optional[str] = None) -> Node:
        n = Node(next(self._ids), level, region)
        n.name = name
        self.nodes.append(n)
        return n

    def rigid(self, level: int, region=None, name: Optional[str] = None) -> Node:
        n = self.fresh(level, region, name)
        n.rigid = True
        n.rigid_level = level
        return n

    def make(self, shape: Shape, children, level: int = 0, region=None) -> Node:
        """U-Name: a fresh node standing for shape⟨children⟩."""
        kids = [self.find(c) for c in children]
        if len(kids) != shape.arity:
            raise ValueError("arity mismatch in make")
        n = self.fresh(level, region)
        n.structure = (shape, kids)
        for k in kids:
            if k.level > level:
                raise ValueError("child level above its parent")
        return n

    def from_type(self, t: Type, scope: dict, level: int = 0, region=None) -> Node:
        if isinstance(t, TVar):
            if t.name not in scope:
                scope[t.name] = self.fresh(level, region, t.name)
            return scope[t.name]
        sh, args = decompose(t)
        kids = [self.from_type(a, scope, level, region) for a in args]
        return self.make(sh, kids, level, region)

    # union-find ---------------------------------------------------------
    def find(self, n: Node) -> Node:
        root = n
        while root.parent is not None:
            root = root.parent
        while n.parent is not None:
            nxt = n.parent
            n.parent = root
            n = nxt
        return root

    def same(self, a: Node, b: Node) -> bool:
        return self.find(a) is self.find(b)

    # unification --------------------------------------------------------
    def weight(self, pending: int) -> int:
        w = 2 * pending
        for r in self.classes():
            if r.structure is not None:
                w += 4 + 2 * r.structure[0].arity
        return w

    def unify(self, a: Node, b: Node) -> UnifyOutcome:
        out = UnifyOutcome()
        stack = [(a, b)]
        while stack:
            if self.check_weight:
                before = self.weight(len(stack))
            x, y = stack.pop()
            self._step(x, y, stack, out)
            if self.check_weight:
                after = self.weight(len(stack))
                self.weights.append((before, after))
                if after >= before:
                    raise AssertionError(f"unification weight did not decrease: {before} -> {after}")
        return out

    def _step(self, x: Node, y: Node, stack: list, out: UnifyOutcome) -> None:
        x, y = self.find(x), self.find(y)
        self.steps += 1
        if x is y:
            return
        if x.rigid and y.rigid:
            raise Clash(self.show(x), self.show(y))
        if (x.rigid and y.structure is not None) or (y.rigid and x.structure is not None):
            raise EscapeError("a rigid variable would be given structure")
        # the lower level wins so level minimisation is free
        if y.level < x.level or (y.level == x.level and y.structure is not None and x.structure is None):
            x, y = y, x
        level = min(x.level, y.level)
        newly_structured = False
        if x.structure is not None and y.structure is not None:
            sx, kx = x.structure
            sy, ky = y.structure
            if sx != sy:
                raise Clash(self.show(x), self.show(y))
            if self.trace:
                self.trace("U-Decomp", f"{sx}")
            stack.extend(zip(kx, ky))
        elif x.structure is None and y.structure is not None:
            x.structure = y.structure
            newly_structured = True
        elif x.structure is not None:
            newly_structured = True
        elif self.trace:
            self.trace("U-Merge", f"{x!r} = {y!r}")
        if newly_structured:
            waiting = y.waiters if y.structure is None else x.waiters
            out.runnable.extend(waiting)
            x.waiters = []
            y.waiters = []
        else:
            x.waiters = x.waiters + y.waiters
        if y.rigid:
            x.rigid = True
            x.rigid_level = y.rigid_level
            x.name = y.name
        elif x.name is None:
            x.name = y.name
        x.links = x.links + y.links
        y.links = []
        y.parent = x
        y.structure = None
        out.touched.append(x)
        self._lower(x, level, out)
        if x.structure is not None:
            self._lower_children(x, out)
            self._occurs(x)

    def lower(self, n: Node, level: int) -> UnifyOutcome:
        """Move a class (and its structure) down to `level`."""
        out = UnifyOutcome()
        self._lower(n, level, out)
        self._lower_children(n, out)
        return out

    def _lower(self, n: Node, level: int, out: UnifyOutcome) -> None:
        n = self.find(n)
        if n.level > level:
            n.level = level
            n.region = _region_at(n.region, level)
            out.touched.append(n)
        if n.rigid and n.level < n.rigid_level:
            raise EscapeError(f"rigid variable {n.name or n.id} escapes its scope")

    def _lower_children(self, n: Node, out: UnifyOutcome) -> None:
        todo = [n]
        while todo:
            p = self.find(todo.pop())
            if p.structure is None:
                continue
            for k in p.structure[1]:
                k = self.find(k)
                if k.level > p.level:
                    self._lower(k, p.level, out)
                    todo.append(k)

    def _occurs(self, n: Node) -> None:
        """Eager occurs check from a freshly structured class (U-Cycle)."""
        target = self.find(n)
        seen = set()
        todo = [self.find(k) for k in target.structure[1]]
        while todo:
            k = self.find(todo.pop())
            if k is target:
                raise Cycle(f"in {self.show(target, depth=2)}")
            if k.id in seen or k.structure is None:
                continue
            seen.add(k.id)
            todo.extend(k.structure[1])

    # inspection ---------------------------------------------------------
    def classes(self) -> list:
        return [n for n in self.nodes if n.parent is None]

    def is_cyclic(self) -> bool:
        colour: dict = {}
        for start in self.classes():
            if colour.get(start.id):
                continue
            stack = [(start, iter(start.structure[1] if start.structure else ()))]
            colour[start.id] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    colour[node.id] = 2
                    stack.pop()
                    continue
                k = self.find(nxt)
                c = colour.get(k.id, 0)
                if c == 1:
                    return True
                if c == 0:
                    colour[k.id] = 1
                    stack.append((k, iter(k.structure[1] if k.structure else ())))
        return False

    def solved_form(self) -> bool:
        """Every class has at most one well-formed structure and the graph is acyclic."""
        for r in self.classes():
            if r.structure is not None:
                sh, kids = r.structure
                if len(kids) != sh.arity:
                    return False
                if any(self.find(k).level > r.level for k in kids):
                    return False
                if r.rigid:
                    return False
        return not self.is_cyclic()

    def multi_equations(self) -> list:
        """Read the state back as multi-equations: (variable members, optional type)."""
        members: dict = {}
        for n in self.nodes:
            members.setdefault(self.find(n).id, []).append(n)
        out = []
        for r in self.classes():
            ty = None
            if r.structure is not None:
                sh, kids = r.structure
                ty = shape_apply(sh, [TVar(f"n{self.find(k).id}") for k in kids])
            out.append(([f"n{m.id}" for m in members[r.id]], ty))
        return out

    def read(self, n: Node, names: Optional[dict] = None, depth: int = 1000) -> Type:
        names = {} if names is None else names
        r = self.find(n)
        if r.structure is None or depth <= 0:
            if r.rigid:
                return TVar(r.name or f"!{r.id}")
            return TVar(names.setdefault(r.id, f"t{r.id}"))
        sh, kids = r.structure
        return shape_apply(sh, [self.read(k, names, depth - 1) for k in kids])

    def show(self, n: Node, depth: int = 3) -> str:
        from .core_types import show_type
        return show_type(self.read(n, depth=depth))
