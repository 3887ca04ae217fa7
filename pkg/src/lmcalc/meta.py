"""Implicit (meta-level) substitution, replacement and renaming."""

from __future__ import annotations

from functools import reduce

from .syntax import (
    Abs, App, ERen, ERepl, ESub, Mu, Named, Stack, Term, Var,
    children, fresh, swap_name, swap_var, with_children,
)


class PreconditionError(ValueError):
    pass


class Fresh:
    """Fresh-identifier supply for one rewrite; remembers what it handed out."""

    def __init__(self, avoid=()):
        self.avoid = set(avoid)

    def __call__(self, base: str) -> str:
        n = fresh(base, self.avoid)
        self.avoid.add(n)
        return n


def apply_stack(t: Term, s: Stack) -> Term:
    return reduce(App, s.items, t)


# Binder refreshing: each helper returns the node with its binder renamed to a
# fresh identifier; nodes without a binder are returned unchanged.

def _refresh_var(o, supply: Fresh):
    match o:
        case Abs(x, t):
            y = supply(x)
            return Abs(y, swap_var(t, x, y))
        case ESub(t, x, u):
            y = supply(x)
            return ESub(swap_var(t, x, y), y, u)
    return o


def _refresh_name(o, supply: Fresh):
    match o:
        case Mu(a, c):
            b = supply(a)
            return Mu(b, swap_name(c, a, b))
        case ERepl(c, a, s, out):
            b = supply(a)
            return ERepl(swap_name(c, a, b), b, s, out)
        case ERen(c, a, h):
            b = supply(a)
            return ERen(swap_name(c, a, b), b, h)
    return o


def _supply(o, *extra, avoid=None) -> Fresh:
    if isinstance(avoid, Fresh):
        return avoid
    base = set(o.idents)
    for e in extra:
        base |= e.idents if hasattr(e, "idents") else {e}
    return Fresh(base | set(avoid or ()))


# ----------------------------------------------------------------- substitution

def substitute(o, x: str, u: Term, avoid=None):
    """o{x := u}, capture-avoiding."""
    return _subst(o, x, u, _supply(o, u, x, avoid=avoid))


def _subst(o, x, u, supply):
    if x not in o.fv:
        return o
    match o:
        case Var():
            return u
        case Abs(y, _) if y in u.fv:
            o = _refresh_var(o, supply)
        case ESub(_, y, _) if y in u.fv:
            o = _refresh_var(o, supply)
        case Mu(g, _) | ERepl(_, g, _, _) | ERen(_, g, _) if g in u.fn:
            o = _refresh_name(o, supply)
    match o:
        case Abs(y, t):
            return Abs(y, _subst(t, x, u, supply))
        case ESub(t, y, v):
            body = t if y == x else _subst(t, x, u, supply)
            return ESub(body, y, _subst(v, x, u, supply))
    return with_children(o, [_subst(c, x, u, supply) for c in children(o)])


# ------------------------------------------------------------------ replacement

def replace(o, a: str, s: Stack, out: str, avoid=None, reuse: str | None = None):
    """o{a := s > out}: every free `[a] t` becomes `[out] t@s`.

    ``reuse`` names the identifier to use for the fresh name in the blocked
    renaming case when it is available (reduction rule W keeps the replaced
    name there)."""
    if a in s.fn or a == out:
        raise PreconditionError(f"cannot replace '{a} by a stack mentioning it or into itself")
    supply = _supply(o, s, a, out, avoid=avoid)
    return _repl(o, a, s, out, supply, reuse)


def _repl(o, a, s, out, supply, reuse):
    if a not in o.fn:
        return o
    names = s.fn | {out}
    match o:
        case Abs(y, _) | ESub(_, y, _) if y in s.fv:
            o = _refresh_var(o, supply)
        case Mu(g, _) | ERepl(_, g, _, _) | ERen(_, g, _) if g in names:
            o = _refresh_name(o, supply)
    rec = lambda p: _repl(p, a, s, out, supply, reuse)  # noqa: E731
    match o:
        case Named(b, t):
            t2 = rec(t)
            return Named(out, apply_stack(t2, s)) if b == a else Named(b, t2)
        case ERepl(c, g, s2, b):
            body = c if g == a else rec(c)
            s3 = rec(s2)
            if b == a:
                return ERepl(body, g, s3 + s, out)
            return ERepl(body, g, s3, b)
        case ERen(c, g, b):
            body = rec(c)  # g != a, otherwise a would not be free here
            if b == a:
                if reuse is not None and reuse not in body.fn | s.fn | {out, g}:
                    beta = reuse
                else:
                    beta = supply(out)
                return ERen(ERepl(body, g, s, beta), beta, out)
            return ERen(body, g, b)
        case ESub(t, y, u):
            return ESub(rec(t), y, rec(u))
    return with_children(o, [rec(c) for c in children(o)])


# --------------------------------------------------------------------- renaming

def rename_name(o, a: str, b: str, avoid=None):
    """o{a := b} on names."""
    if a == b:
        raise PreconditionError("renaming a name to itself")
    return _ren(o, a, b, _supply(o, a, b, avoid=avoid))


def _ren(o, a, b, supply):
    if a not in o.fn:
        return o
    match o:
        case Mu(g, _) | ERepl(_, g, _, _) | ERen(_, g, _) if g == b:
            o = _refresh_name(o, supply)
    rec = lambda p: _ren(p, a, b, supply)  # noqa: E731
    match o:
        case Named(g, t):
            return Named(b if g == a else g, rec(t))
        case ERepl(c, g, s, out):
            body = c if g == a else rec(c)
            return ERepl(body, g, rec(s), b if out == a else out)
        case ERen(c, g, h):
            return ERen(rec(c), g, b if h == a else h)
    return with_children(o, [rec(c) for c in children(o)])


__all__ = [
    "Fresh", "PreconditionError", "apply_stack", "rename_name", "replace", "substitute",
]
