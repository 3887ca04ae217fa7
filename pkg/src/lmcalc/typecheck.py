"""Simple types with stack types: principal inference, derivation trees and a
derivation checker.

Inference is syntax directed.  An optional hypothesis on a binder is present
exactly when the bound identifier is free in the premise, so every inferred
judgment satisfies dom(vars) = fv(subject) and dom(names) = fn(subject).
"""

from __future__ import annotations

import itertools
import re
import string
from dataclasses import dataclass, field

from .syntax import (
    Abs, App, ERen, ERepl, ESub, Mu, Named, Stack, Var, render,
)


class TypeFailure(ValueError):
    def __init__(self, msg: str, path: tuple = ()):
        self.path = tuple(path)
        super().__init__(f"{msg} at {list(self.path)}")


# ----------------------------------------------------------------------- types

@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{d} -> {self.cod}"


@dataclass(frozen=True)
class MetaVar:
    id: int

    def __str__(self):
        return f"?{self.id}"


Type = Base | Arrow | MetaVar
StackType = tuple  # of Type, non-empty


def arrows(doms, cod: Type) -> Type:
    for d in reversed(doms):
        cod = Arrow(d, cod)
    return cod


def type_str(t) -> str:
    if isinstance(t, tuple):
        return " . ".join(type_str(a) for a in t)
    return "" if t is None else str(t)


_TY = re.compile(r"\s*(->|\(|\)|[^\W\d_]\w*)")


def parse_type(text: str) -> Type:
    toks = []
    i = 0
    while i < len(text.rstrip()):
        m = _TY.match(text, i)
        if not m:
            raise ValueError(f"bad type syntax at {i}")
        toks.append(m.group(1))
        i = m.end()
    pos = 0

    def arrow():
        nonlocal pos
        left = atom()
        if pos < len(toks) and toks[pos] == "->":
            pos += 1
            return Arrow(left, arrow())
        return left

    def atom():
        nonlocal pos
        tok = toks[pos] if pos < len(toks) else None
        if tok == "(":
            pos += 1
            t = arrow()
            if pos >= len(toks) or toks[pos] != ")":
                raise ValueError("expected )")
            pos += 1
            return t
        if tok is None or tok in ("->", ")"):
            raise ValueError(f"expected a type, found {tok}")
        pos += 1
        return Base(tok)

    t = arrow()
    if pos != len(toks):
        raise ValueError(f"trailing input in type: {toks[pos:]}")
    return t


# ------------------------------------------------------------------ derivations

@dataclass
class Derivation:
    rule: str
    subject: object
    gamma: dict
    delta: dict
    type: object  # Type, StackType or None for commands
    premises: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "conclusion": {
                "subject": render(self.subject),
                "gamma": {x: str(t) for x, t in sorted(self.gamma.items())},
                "delta": {a: str(t) for a, t in sorted(self.delta.items())},
                "type": type_str(self.type) if self.type is not None else None,
            },
            "premises": [p.to_json() for p in self.premises],
        }

    def judgment(self) -> str:
        g = ", ".join(f"{x}:{t}" for x, t in sorted(self.gamma.items()))
        d = ", ".join(f"'{a}:{t}" for a, t in sorted(self.delta.items()))
        ty = f" : {type_str(self.type)}" if self.type is not None else ""
        return f"{g} |- {render(self.subject)}{ty} | {d}".rstrip()

    def nodes(self, path=()):
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.nodes(path + (i,))


@dataclass
class Typing:
    gamma: dict
    delta: dict
    type: object
    derivation: Derivation


# ------------------------------------------------------------------ unification

class _Unifier:
    def __init__(self):
        self.sub: dict[int, Type] = {}
        self.ids = itertools.count()

    def new(self) -> MetaVar:
        return MetaVar(next(self.ids))

    def walk(self, t):
        while isinstance(t, MetaVar) and t.id in self.sub:
            t = self.sub[t.id]
        return t

    def resolve(self, t):
        if isinstance(t, tuple):
            return tuple(self.resolve(a) for a in t)
        t = self.walk(t)
        if isinstance(t, Arrow):
            return Arrow(self.resolve(t.dom), self.resolve(t.cod))
        return t

    def occurs(self, v: MetaVar, t) -> bool:
        t = self.walk(t)
        if t == v:
            return True
        return isinstance(t, Arrow) and (self.occurs(v, t.dom) or self.occurs(v, t.cod))

    def unify(self, a, b, path):
        a, b = self.walk(a), self.walk(b)
        if a == b:
            return
        if isinstance(a, MetaVar):
            if self.occurs(a, b):
                raise TypeFailure(f"occurs check: {self.resolve(a)} in {self.resolve(b)}", path)
            self.sub[a.id] = b
        elif isinstance(b, MetaVar):
            self.unify(b, a, path)
        elif isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.dom, b.dom, path)
            self.unify(a.cod, b.cod, path)
        else:
            raise TypeFailure(f"type clash: {self.resolve(a)} vs {self.resolve(b)}", path)

    def merge(self, c1: dict, c2: dict, path) -> dict:
        out = dict(c1)
        for k, t in c2.items():
            if k in out:
                self.unify(out[k], t, path)
            else:
                out[k] = t
        return out


# -------------------------------------------------------------------- inference

def _infer(o, u: _Unifier, path) -> Derivation:
    match o:
        case Var(x):
            a = u.new()
            return Derivation("var", o, {x: a}, {}, a)
        case App(f, arg):
            d1 = _infer(f, u, path + (0,))
            d2 = _infer(arg, u, path + (1,))
            b = u.new()
            u.unify(d1.type, Arrow(d2.type, b), path)
            return Derivation("app", o, u.merge(d1.gamma, d2.gamma, path),
                              u.merge(d1.delta, d2.delta, path), b, [d1, d2])
        case Abs(x, t):
            d = _infer(t, u, path + (0,))
            g = dict(d.gamma)
            a = g.pop(x) if x in g else u.new()
            return Derivation("abs", o, g, dict(d.delta), Arrow(a, d.type), [d])
        case Mu(a, c):
            d = _infer(c, u, path + (0,))
            dl = dict(d.delta)
            t = dl.pop(a) if a in dl else u.new()
            return Derivation("cont", o, dict(d.gamma), dl, t, [d])
        case Named(a, t):
            d = _infer(t, u, path + (0,))
            return Derivation("name", o, dict(d.gamma), u.merge(d.delta, {a: d.type}, path),
                              None, [d])
        case ESub(t, x, arg):
            d1 = _infer(t, u, path + (0,))
            d2 = _infer(arg, u, path + (1,))
            g = dict(d1.gamma)
            if x in g:
                u.unify(g.pop(x), d2.type, path)
            return Derivation("subs", o, u.merge(g, d2.gamma, path),
                              u.merge(d1.delta, d2.delta, path), d1.type, [d1, d2])
        case ERepl(c, a, s, out):
            d1 = _infer(c, u, path + (0,))
            d2 = _infer(s, u, path + (1,))
            b = u.new()
            dl = dict(d1.delta)
            if a in dl:
                u.unify(dl.pop(a), arrows(_as_stack(d2.type), b), path)
            if out in dl:
                u.unify(dl[out], b, path)
            if out in d2.delta:
                u.unify(d2.delta[out], b, path)
            delta = u.merge(u.merge(dl, d2.delta, path), {out: b}, path)
            return Derivation("repl", o, u.merge(d1.gamma, d2.gamma, path), delta, None, [d1, d2])
        case ERen(c, a, b):
            d = _infer(c, u, path + (0,))
            dl = dict(d.delta)
            t = dl.pop(a) if a in dl else u.new()
            return Derivation("ren", o, dict(d.gamma), u.merge(dl, {b: t}, path), None, [d])
        case Stack(items):
            return _infer_stack(o, list(items), u, path)
    raise TypeError(f"not an object: {o!r}")


def _as_stack(t) -> tuple:
    return t if isinstance(t, tuple) else (t,)


def _infer_stack(o: Stack, items: list, u: _Unifier, path, offset=0) -> Derivation:
    """Stacks t0, ..., tn are typed as nested stk nodes; a one-item stack is
    typed by its term."""
    head = _infer(items[0], u, path + (offset,))
    if len(items) == 1:
        return head
    rest_obj = Stack(tuple(items[1:]))
    rest = _infer_stack(rest_obj, items[1:], u, path, offset + 1)
    stype = (head.type,) + _as_stack(rest.type)
    return Derivation("stk", Stack(tuple(items)), u.merge(head.gamma, rest.gamma, path),
                      u.merge(head.delta, rest.delta, path), stype, [head, rest])


def _letters():
    for n in itertools.count():
        for ch in string.ascii_uppercase:
            yield ch if n == 0 else f"{ch}{n}"


def _metavars(t, out: list):
    if isinstance(t, tuple):
        for a in t:
            _metavars(a, out)
    elif isinstance(t, MetaVar):
        if t not in out:
            out.append(t)
    elif isinstance(t, Arrow):
        _metavars(t.dom, out)
        _metavars(t.cod, out)


def _freeze(d: Derivation, u: _Unifier, taken: set) -> Derivation:
    """Resolve and replace remaining metavariables by fresh base types, in
    order of first appearance (type, then variables, then names, then the
    rest of the tree)."""
    order: list = []
    _metavars(u.resolve(d.type) if d.type is not None else (), order)
    for _, t in sorted(d.gamma.items()):
        _metavars(u.resolve(t), order)
    for _, t in sorted(d.delta.items()):
        _metavars(u.resolve(t), order)
    for _, n in d.nodes():
        if n.type is not None:
            _metavars(u.resolve(n.type), order)
        for ctx in (n.gamma, n.delta):
            for _, t in sorted(ctx.items()):
                _metavars(u.resolve(t), order)
    names = (n for n in _letters() if n not in taken)
    table = {v: Base(next(names)) for v in order}

    def fz(t):
        if t is None:
            return None
        if isinstance(t, tuple):
            return tuple(fz(a) for a in t)
        t = u.walk(t)
        if isinstance(t, MetaVar):
            return table[t]
        if isinstance(t, Arrow):
            return Arrow(fz(t.dom), fz(t.cod))
        return t

    def go(n: Derivation) -> Derivation:
        return Derivation(n.rule, n.subject, {k: fz(v) for k, v in n.gamma.items()},
                          {k: fz(v) for k, v in n.delta.items()}, fz(n.type),
                          [go(p) for p in n.premises])

    return go(d)


def _bases(t, out: set):
    if isinstance(t, tuple):
        for a in t:
            _bases(a, out)
    elif isinstance(t, Base):
        out.add(t.name)
    elif isinstance(t, Arrow):
        _bases(t.dom, out)
        _bases(t.cod, out)


def infer(o, against: "Typing | tuple | None" = None) -> Typing:
    """Principal typing of ``o``.

    ``against`` = (gamma, delta, type) with ground types asks for an instance
    of the principal typing that agrees with them on every shared entry (and
    on the type when it is not None)."""
    u = _Unifier()
    d = _infer(o, u, ())
    taken: set = set()
    if against is not None:
        if isinstance(against, Typing):
            against = (against.gamma, against.delta, against.type)
        g, dl, ty = against
        for x, t in d.gamma.items():
            if x in g:
                u.unify(t, g[x], ())
        for a, t in d.delta.items():
            if a in dl:
                u.unify(t, dl[a], ())
        if ty is not None and d.type is not None:
            if isinstance(ty, tuple) or isinstance(d.type, tuple):
                tt, dt = _as_stack(ty), _as_stack(d.type)
                if len(tt) != len(dt):
                    raise TypeFailure("stack length mismatch", ())
                for x, y in zip(tt, dt):
                    u.unify(y, x, ())
            else:
                u.unify(d.type, ty, ())
        for t in list(g.values()) + list(dl.values()) + [ty]:
            _bases(t, taken)
    d = _freeze(d, u, taken)
    return Typing(d.gamma, d.delta, d.type, d)


def typeof(o) -> Typing:
    return infer(o)


def typable(o) -> bool:
    try:
        infer(o)
    except TypeFailure:
        return False
    return True


# ---------------------------------------------------------------------- checker

def _compatible(*ctxs) -> dict | None:
    out: dict = {}
    for c in ctxs:
        for k, t in c.items():
            if k in out and out[k] != t:
                return None
            out[k] = t
    return out


def _without(ctx: dict, k) -> dict:
    return {a: t for a, t in ctx.items() if a != k}


def _has_meta(t) -> bool:
    found: list = []
    _metavars(t, found)
    return bool(found)


def check_report(d: Derivation, path=()) -> tuple | None:
    """None if ``d`` is a valid derivation, else (node path, reason)."""
    o, ps = d.subject, d.premises
    for t in list(d.gamma.values()) + list(d.delta.values()) + [d.type]:
        if t is not None and _has_meta(t):
            return path, "unresolved type variable"
    if set(d.gamma) != set(o.fv) or set(d.delta) != set(o.fn):
        return path, "relevance violated"
    for i, p in enumerate(ps):
        bad = check_report(p, path + (i,))
        if bad:
            return bad
    kids = [p.subject for p in ps]

    def fail(msg):
        return path, msg

    def same(a, b):
        return a == b

    match o:
        case Var(x):
            if d.rule != "var" or ps or d.gamma != {x: d.type} or d.delta:
                return fail("bad var node")
        case App(f, u) if d.rule == "app" and kids == [f, u]:
            p1, p2 = ps
            if p1.type != Arrow(p2.type, d.type):
                return fail("function type mismatch")
            if not (same(_compatible(p1.gamma, p2.gamma), d.gamma)
                    and same(_compatible(p1.delta, p2.delta), d.delta)):
                return fail("context union mismatch")
        case Abs(x, t) if d.rule == "abs" and kids == [t]:
            (p,) = ps
            if not isinstance(d.type, Arrow) or d.type.cod != p.type:
                return fail("abstraction type mismatch")
            if x in p.gamma and p.gamma[x] != d.type.dom:
                return fail("bound variable type mismatch")
            if d.gamma != _without(p.gamma, x) or d.delta != p.delta:
                return fail("context mismatch")
        case Mu(a, c) if d.rule == "cont" and kids == [c]:
            (p,) = ps
            if a in p.delta and p.delta[a] != d.type:
                return fail("continuation type mismatch")
            if d.gamma != p.gamma or d.delta != _without(p.delta, a) or d.type is None:
                return fail("context mismatch")
        case Named(a, t) if d.rule == "name" and kids == [t]:
            (p,) = ps
            if a in p.delta and p.delta[a] != p.type:
                return fail("name type mismatch")
            if d.type is not None or d.gamma != p.gamma or d.delta != {**p.delta, a: p.type}:
                return fail("context mismatch")
        case ESub(t, x, u) if d.rule == "subs" and kids == [t, u]:
            p1, p2 = ps
            if x in p1.gamma and p1.gamma[x] != p2.type:
                return fail("substituted variable type mismatch")
            if d.type != p1.type:
                return fail("type mismatch")
            if not (same(_compatible(_without(p1.gamma, x), p2.gamma), d.gamma)
                    and same(_compatible(p1.delta, p2.delta), d.delta)):
                return fail("context union mismatch")
        case ERepl(c, a, s, out) if (d.rule == "repl" and len(kids) == 2 and kids[0] == c
                                      and _stack_items(kids[1]) == s.items):
            p1, p2 = ps
            b = d.delta.get(out)
            if b is None or d.type is not None:
                return fail("missing output name")
            if a in p1.delta and p1.delta[a] != arrows(_as_stack(p2.type), b):
                return fail("replaced name type mismatch")
            if p1.delta.get(out, b) != b or p2.delta.get(out, b) != b:
                return fail("output name type mismatch")
            rest = _compatible(_without(p1.delta, a), p2.delta)
            if rest is None or {**rest, out: b} != d.delta:
                return fail("context union mismatch")
            if not same(_compatible(p1.gamma, p2.gamma), d.gamma):
                return fail("context union mismatch")
        case ERen(c, a, b) if d.rule == "ren" and kids == [c]:
            (p,) = ps
            t = d.delta.get(b)
            if t is None or d.type is not None:
                return fail("missing target name")
            if p.delta.get(a, t) != t or p.delta.get(b, t) != t:
                return fail("renamed name type mismatch")
            if d.delta != {**_without(p.delta, a), b: t} or d.gamma != p.gamma:
                return fail("context mismatch")
        case Stack(items) if d.rule == "stk" and len(ps) == 2:
            p1, p2 = ps
            if kids[0] != items[0] or _stack_items(kids[1]) != items[1:]:
                return fail("stack shape mismatch")
            if d.type != (p1.type,) + _as_stack(p2.type):
                return fail("stack type mismatch")
            if not (same(_compatible(p1.gamma, p2.gamma), d.gamma)
                    and same(_compatible(p1.delta, p2.delta), d.delta)):
                return fail("context union mismatch")
        case _:
            return fail(f"rule {d.rule} does not match the subject")
    return None


def _stack_items(o) -> tuple:
    return o.items if isinstance(o, Stack) else (o,)


def check(d: Derivation) -> bool:
    return check_report(d) is None


# ------------------------------------------------------------ subject reduction

def subject_step_check(o, step) -> bool:
    """The reduct is typable at the same type in sub-contexts of o's typing."""
    before = infer(o)
    after = step.after
    if not (set(after.fv) <= set(before.gamma) and set(after.fn) <= set(before.delta)):
        return False
    try:
        t = infer(after, against=before)
    except TypeFailure:
        return False
    return (t.type == before.type
            and all(before.gamma[x] == ty for x, ty in t.gamma.items())
            and all(before.delta[a] == ty for a, ty in t.delta.items())
            and check(t.derivation))


def subject_expansion_check(step) -> bool:
    """The redex side is typable at the reduct's typing (for plain steps the
    free identifiers coincide)."""
    try:
        after = infer(step.after)
    except TypeFailure:
        return True
    try:
        t = infer(step.before, against=after)
    except TypeFailure:
        return False
    return (t.type == after.type
            and all(after.gamma.get(x, ty) == ty for x, ty in t.gamma.items())
            and all(after.delta.get(a, ty) == ty for a, ty in t.delta.items())
            and check(t.derivation))
