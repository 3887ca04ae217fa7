"""Reference implementations used as independent oracles.  They are written
directly from the binding rules, sharing no code with the library beyond
the AST classes."""

from __future__ import annotations

import itertools

from lmcalc.syntax import Abs, App, ERen, ERepl, ESub, Mu, Named, Stack, Var


def free_vars(o) -> set:
    match o:
        case Var(x):
            return {x}
        case App(f, u):
            return free_vars(f) | free_vars(u)
        case Abs(x, t):
            return free_vars(t) - {x}
        case Mu(_, c):
            return free_vars(c)
        case ESub(t, x, u):
            return (free_vars(t) - {x}) | free_vars(u)
        case Named(_, t):
            return free_vars(t)
        case ERepl(c, _, s, _):
            return free_vars(c) | free_vars(s)
        case ERen(c, _, _):
            return free_vars(c)
        case Stack(items):
            return set().union(*(free_vars(t) for t in items))
    raise TypeError(o)


def free_names(o) -> set:
    match o:
        case Var():
            return set()
        case App(f, u):
            return free_names(f) | free_names(u)
        case Abs(_, t):
            return free_names(t)
        case Mu(a, c):
            return free_names(c) - {a}
        case ESub(t, _, u):
            return free_names(t) | free_names(u)
        case Named(a, t):
            return {a} | free_names(t)
        case ERepl(c, a, s, out):
            return (free_names(c) - {a}) | free_names(s) | {out}
        case ERen(c, a, b):
            return (free_names(c) - {a}) | {b}
        case Stack(items):
            return set().union(*(free_names(t) for t in items))
    raise TypeError(o)


def de_bruijn(o, vs=(), ns=()):
    """Nameless form: bound identifiers become indices, free ones stay."""
    def v(x):
        return ("bv", vs.index(x)) if x in vs else ("fv", x)

    def n(a):
        return ("bn", ns.index(a)) if a in ns else ("fn", a)

    match o:
        case Var(x):
            return v(x)
        case App(f, u):
            return ("app", de_bruijn(f, vs, ns), de_bruijn(u, vs, ns))
        case Abs(x, t):
            return ("abs", de_bruijn(t, (x,) + vs, ns))
        case Mu(a, c):
            return ("mu", de_bruijn(c, vs, (a,) + ns))
        case ESub(t, x, u):
            return ("esub", de_bruijn(t, (x,) + vs, ns), de_bruijn(u, vs, ns))
        case Named(a, t):
            return ("named", n(a), de_bruijn(t, vs, ns))
        case ERepl(c, a, s, out):
            return ("erepl", de_bruijn(c, vs, (a,) + ns), de_bruijn(s, vs, ns), n(out))
        case ERen(c, a, b):
            return ("eren", de_bruijn(c, vs, (a,) + ns), n(b))
        case Stack(items):
            return ("stack",) + tuple(de_bruijn(t, vs, ns) for t in items)
    raise TypeError(o)


class _Supply:
    def __init__(self):
        self.n = itertools.count()

    def __call__(self, base):
        return f"{base}_{next(self.n)}"


def refresh_all(o, supply=None, vs=None, ns=None):
    """Rename every binder to a globally fresh identifier."""
    supply = supply or _Supply()
    vs, ns = vs or {}, ns or {}
    r = lambda x: refresh_all(x, supply, vs, ns)  # noqa: E731
    match o:
        case Var(x):
            return Var(vs.get(x, x))
        case App(f, u):
            return App(r(f), r(u))
        case Abs(x, t):
            y = supply("v")
            return Abs(y, refresh_all(t, supply, {**vs, x: y}, ns))
        case Mu(a, c):
            b = supply("n")
            return Mu(b, refresh_all(c, supply, vs, {**ns, a: b}))
        case ESub(t, x, u):
            y = supply("v")
            return ESub(refresh_all(t, supply, {**vs, x: y}, ns), y, r(u))
        case Named(a, t):
            return Named(ns.get(a, a), r(t))
        case ERepl(c, a, s, out):
            b = supply("n")
            return ERepl(refresh_all(c, supply, vs, {**ns, a: b}), b, r(s), ns.get(out, out))
        case ERen(c, a, b):
            g = supply("n")
            return ERen(refresh_all(c, supply, vs, {**ns, a: g}), g, ns.get(b, b))
        case Stack(items):
            return Stack(tuple(r(t) for t in items))
    raise TypeError(o)


def naive_subst(o, x, u):
    """Substitution on an object whose binders are all fresh (no capture)."""
    s = lambda y: naive_subst(y, x, u)  # noqa: E731
    match o:
        case Var(y):
            return u if y == x else o
        case App(f, a):
            return App(s(f), s(a))
        case Abs(y, t):
            return Abs(y, s(t))
        case Mu(a, c):
            return Mu(a, s(c))
        case ESub(t, y, a):
            return ESub(s(t), y, s(a))
        case Named(a, t):
            return Named(a, s(t))
        case ERepl(c, a, st, out):
            return ERepl(s(c), a, s(st), out)
        case ERen(c, a, b):
            return ERen(s(c), a, b)
        case Stack(items):
            return Stack(tuple(s(t) for t in items))
    raise TypeError(o)


def naive_replace_pure(o, a, stack_items, out):
    """Replacement on an explicit-operator-free object with fresh binders:
    every ``['a] t`` becomes ``['out] t s0 ... sn``."""
    r = lambda y: naive_replace_pure(y, a, stack_items, out)  # noqa: E731
    match o:
        case Var():
            return o
        case App(f, u):
            return App(r(f), r(u))
        case Abs(y, t):
            return Abs(y, r(t))
        case Mu(b, c):
            return Mu(b, r(c))
        case Named(b, t):
            t = r(t)
            if b != a:
                return Named(b, t)
            for item in stack_items:
                t = App(t, item)
            return Named(out, t)
        case Stack(items):
            return Stack(tuple(r(t) for t in items))
    raise TypeError(o)


def naive_rename(o, a, b):
    """Free name ``a`` to ``b`` on an object with fresh binders."""
    r = lambda y: naive_rename(y, a, b)  # noqa: E731
    sw = lambda n: b if n == a else n  # noqa: E731
    match o:
        case Var():
            return o
        case App(f, u):
            return App(r(f), r(u))
        case Abs(y, t):
            return Abs(y, r(t))
        case Mu(g, c):
            return Mu(g, r(c))
        case ESub(t, y, u):
            return ESub(r(t), y, r(u))
        case Named(g, t):
            return Named(sw(g), r(t))
        case ERepl(c, g, s, out):
            return ERepl(r(c), g, r(s), sw(out))
        case ERen(c, g, h):
            return ERen(r(c), g, sw(h))
        case Stack(items):
            return Stack(tuple(r(t) for t in items))
    raise TypeError(o)
