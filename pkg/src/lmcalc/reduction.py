"""One-step rewriting: the eleven explicit rules, plain forms, the weight
measure and the reference lambda-mu rules."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from .meta import Fresh, replace, substitute
from .syntax import (
    Abs, App, Command, ERen, ERepl, ESub, Mu, Named, Stack, Var,
    is_pure, positions, render, replace_at, swap_name, swap_var,
)


class Rule(str, enum.Enum):
    dB = "dB"
    S = "S"
    dM = "dM"
    N = "N"
    C = "C"
    W = "W"
    Nnl = "Nnl"
    Cnl = "Cnl"
    Wnl = "Wnl"
    Rnl = "Rnl"
    Beta = "Beta"
    MuLM = "MuLM"

    def __str__(self):
        return self.value


PLAIN = frozenset({Rule.dB, Rule.dM, Rule.N, Rule.C, Rule.W})
MEANINGFUL = frozenset({Rule.S, Rule.Rnl, Rule.Nnl, Rule.Cnl, Rule.Wnl})
LAMBDA_MU = frozenset({Rule.Beta, Rule.MuLM})
EXPLICIT = PLAIN | MEANINGFUL
REPLACEMENT = frozenset({Rule.N, Rule.C, Rule.W, Rule.Nnl, Rule.Cnl, Rule.Wnl, Rule.Rnl})


class NotPlainForm(ValueError):
    pass


class NotLambdaMu(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    rule: Rule
    path: tuple
    before: object
    after: object
    fresh: tuple = ()

    def to_json(self) -> dict:
        return {"rule": self.rule.value, "path": list(self.path), "before": render(self.before),
                "after": render(self.after), "fresh": list(self.fresh)}


# ------------------------------------------------------------ classification

@dataclass(frozen=True)
class NonLinearCount:
    count: int


@dataclass(frozen=True)
class Linear:
    kind: str  # Name | Comp | Swap
    path: tuple


@dataclass(frozen=True)
class NonLinear:
    kind: str
    path: tuple


LinearityClass = NonLinearCount | Linear | NonLinear


def name_occurrences(o, a: str, path=(), linear=True) -> Iterator[tuple[tuple, str, bool]]:
    """Free occurrences of name ``a``: (path, kind, under a linear context)."""
    if a not in o.fn:
        return
    match o:
        case Named(b, t):
            if b == a:
                yield path, "Name", linear
            yield from name_occurrences(t, a, path + (0,), linear)
        case ERepl(c, g, s, out):
            if out == a:
                yield path, "Comp", linear
            if g != a:
                yield from name_occurrences(c, a, path + (0,), linear)
            yield from name_occurrences(s, a, path + (1,), False)
        case ERen(c, g, b):
            if b == a:
                yield path, "Swap", linear
            if g != a:
                yield from name_occurrences(c, a, path + (0,), linear)
        case Mu(g, c):
            if g != a:
                yield from name_occurrences(c, a, path + (0,), linear)
        case App(f, u):
            yield from name_occurrences(f, a, path + (0,), linear)
            yield from name_occurrences(u, a, path + (1,), False)
        case ESub(t, _, u):
            yield from name_occurrences(t, a, path + (0,), linear)
            yield from name_occurrences(u, a, path + (1,), False)
        case Abs(_, t):
            yield from name_occurrences(t, a, path + (0,), linear)
        case Stack(items):
            for i, t in enumerate(items):
                yield from name_occurrences(t, a, path + (i,), False)


def classify_replacement(c: Command, a: str) -> LinearityClass:
    occ = list(name_occurrences(c, a))
    if len(occ) != 1:
        return NonLinearCount(len(occ))
    path, kind, linear = occ[0]
    return (Linear if linear else NonLinear)(kind, path)


_TAG = {
    (Linear, "Name"): Rule.N, (Linear, "Comp"): Rule.C, (Linear, "Swap"): Rule.W,
    (NonLinear, "Name"): Rule.Nnl, (NonLinear, "Comp"): Rule.Cnl, (NonLinear, "Swap"): Rule.Wnl,
}


def replacement_rule(r: ERepl) -> Rule:
    cls = classify_replacement(r.body, r.a)
    if isinstance(cls, NonLinearCount):
        return Rule.Rnl
    return _TAG[type(cls), cls.kind]


# ------------------------------------------------------------------ contraction

def _refresh_spine(t, avoid: frozenset, supply: Fresh):
    """Rename ESub-spine binders that occur in ``avoid`` (free-for condition)."""
    if not isinstance(t, ESub):
        return t
    body, x, v = t.body, t.x, t.arg
    if x in avoid:
        y = supply(x)
        body, x = swap_var(body, x, y), y
    return ESub(_refresh_spine(body, avoid, supply), x, v)


def _plug(t, core):
    """Replace the core of the ESub spine of ``t``."""
    if isinstance(t, ESub):
        return ESub(_plug(t.body, core), t.x, t.arg)
    return core


def _core(t):
    while isinstance(t, ESub):
        t = t.body
    return t


def _distant(o, supply: Fresh):
    """dB / dM contraction at the root, or None."""
    if not isinstance(o, App) or not isinstance(_core(o.fun), (Abs, Mu)):
        return None
    u = o.arg
    spine = _refresh_spine(o.fun, u.fv, supply)
    core = _core(spine)
    if isinstance(core, Abs):
        body, x = core.body, core.x
        if x in u.fv:
            y = supply(x)
            body, x = swap_var(body, x, y), y
        return Rule.dB, _plug(spine, ESub(body, x, u))
    body, a = core.body, core.a
    if a in u.fn:
        na = supply(a)
        body, a = swap_name(body, a, na), na
    a2 = supply(core.a)
    return Rule.dM, _plug(spine, Mu(a2, ERepl(body, a, Stack((u,)), a2)))


def contract(o, supply: Fresh, rules=EXPLICIT) -> list[tuple[Rule, object]]:
    """Root contractions of ``o`` under the requested explicit rules."""
    res = []
    if Rule.dB in rules or Rule.dM in rules:
        d = _distant(o, supply)
        if d and d[0] in rules:
            res.append(d)
    match o:
        case ESub(t, x, u) if Rule.S in rules:
            res.append((Rule.S, substitute(t, x, u, avoid=supply)))
        case ERepl(c, a, s, out):
            rule = replacement_rule(o)
            if rule in rules:
                reuse = a if rule is Rule.W else None
                res.append((rule, replace(c, a, s, out, avoid=supply, reuse=reuse)))
    return res


def steps(o, rules: Iterable[Rule] = EXPLICIT) -> list[Step]:
    return list(iter_steps(o, rules))


def iter_steps(o, rules: Iterable[Rule] = EXPLICIT) -> Iterator[Step]:
    """Lazily enumerate redexes in leftmost-outermost order."""
    rules = frozenset(Rule(r) for r in rules)
    for path, sub in positions(o):
        if not isinstance(sub, (App, ESub, ERepl)):
            continue
        supply = Fresh(o.idents)
        for rule, red in contract(sub, supply, rules):
            after = replace_at(o, path, red)
            yield Step(rule, path, o, after, tuple(sorted(after.idents - o.idents)))


def is_plain_form(o) -> bool:
    return next(iter_steps(o, PLAIN), None) is None


def fcan(o, rng: random.Random | None = None, limit: int = 100_000):
    """Plain normal form.  With ``rng`` the redex is chosen at random each time."""
    for _ in range(limit):
        if rng is None:
            st = next(iter_steps(o, PLAIN), None)
        else:
            cands = steps(o, PLAIN)
            st = rng.choice(cands) if cands else None
        if st is None:
            return o
        o = st.after
    raise RuntimeError("plain reduction did not terminate within the step limit")


plain_normal_form = fcan


def plain_trace(o, rng: random.Random | None = None) -> list[Step]:
    trace = []
    while True:
        cands = steps(o, PLAIN)
        if not cands:
            return trace
        st = rng.choice(cands) if rng else cands[0]
        trace.append(st)
        o = st.after


def meaningful_steps(o) -> list[Step]:
    if not is_plain_form(o):
        raise NotPlainForm(render(o))
    out = []
    for st in iter_steps(o, MEANINGFUL):
        after = fcan(st.after)
        out.append(Step(st.rule, st.path, o, after, tuple(sorted(after.idents - o.idents))))
    return out


# ---------------------------------------------------------------- lambda-mu

def lmu_steps(o) -> list[Step]:
    if not is_pure(o):
        raise NotLambdaMu(render(o))
    out = []
    for path, sub in positions(o):
        if not isinstance(sub, App):
            continue
        supply = Fresh(o.idents)
        f, u = sub.fun, sub.arg
        if isinstance(f, Abs):
            rule, red = Rule.Beta, substitute(f.body, f.x, u, avoid=supply)
        elif isinstance(f, Mu):
            a, c = f.a, f.body
            if a in u.fn:
                na = supply(a)
                c, a = swap_name(c, a, na), na
            a2 = supply(f.a)
            rule, red = Rule.MuLM, Mu(a2, replace(c, a, Stack((u,)), a2, avoid=supply))
        else:
            continue
        after = replace_at(o, path, red)
        out.append(Step(rule, path, o, after, tuple(sorted(after.idents - o.idents))))
    return out


# -------------------------------------------------------------------- weight

def plain_weight(o) -> int:
    match o:
        case Var():
            return 3
        case App(f, u):
            return plain_weight(f) * plain_weight(u)
        case Abs(_, t):
            return plain_weight(t)
        case Mu(_, c):
            return plain_weight(c) + 1
        case ESub(t, _, u):
            return plain_weight(t) + plain_weight(u)
        case Named(_, t):
            return plain_weight(t)
        case ERepl(c, _, s, _):
            return plain_weight(c) * plain_weight(s) + 1
        case ERen(c, _, _):
            return plain_weight(c) + 1
        case Stack(items):
            w = 1
            for t in items:
                w *= plain_weight(t)
            return w
    raise TypeError(f"not an object: {o!r}")


def normalize(o, rules: Iterable[Rule] = EXPLICIT, limit: int = 10_000):
    """Leftmost-outermost normalization under ``rules``; None if the limit is hit."""
    rules = frozenset(rules)
    for _ in range(limit):
        st = next(iter_steps(o, rules), None)
        if st is None:
            return o
        o = st.after
    return None
