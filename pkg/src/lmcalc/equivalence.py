"""Structural equivalence on plain forms, its renaming extension, the
lambda-mu sigma-equivalence, the expansion function and bisimulation
diagrams.

Equivalence is decided by a bounded bidirectional search over single axiom
instances.  Size-preserving axioms are used in both orientations; the
shrinking orientation of theta, P, ren and their lambda-mu counterparts is
always available, while the growing orientation costs one unit of
expansion budget per use.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .meta import Fresh, apply_stack, rename_name
from .reduction import (
    is_plain_form, lmu_steps, meaningful_steps, name_occurrences, NotLambdaMu, NotPlainForm,
)
from .syntax import (
    Abs, App, Command, ERen, ERepl, ESub, Mu, Named, Stack, Term, Var,
    alpha_equal, alpha_key, at, binders_along, children, count, is_pure, positions, render,
    replace_at, swap_name, swap_var, var_count, with_children,
)


class SortMismatch(ValueError):
    pass


class PreconditionError(ValueError):
    pass


SIGMA_AXIOMS = ("exsubs", "exrepl", "exren", "ppop", "P", "theta")
ER_AXIOMS = SIGMA_AXIOMS + ("ren",)
LAURENT_AXIOMS = tuple(f"s{i}" for i in range(1, 9))


@dataclass(frozen=True)
class Move:
    axiom: str
    orientation: str  # "->" left to right, "<-" right to left
    path: tuple
    before: object
    after: object
    expanding: bool = False

    def reversed(self) -> "Move":
        flip = "<-" if self.orientation == "->" else "->"
        return Move(self.axiom, flip, self.path, self.after, self.before, False)

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "orientation": self.orientation, "path": list(self.path),
                "before": render(self.before), "after": render(self.after)}


@dataclass
class Equivalent:
    path: list

    def to_json(self):
        return {"verdict": "Equivalent", "path": [m.to_json() for m in self.path]}


@dataclass
class NotEquivalent:
    closed_set_size: int

    def to_json(self):
        return {"verdict": "NotEquivalent", "closed_set_size": self.closed_set_size}


@dataclass
class Unknown:
    explored: int

    def to_json(self):
        return {"verdict": "Unknown", "explored": self.explored}


Verdict = Equivalent | NotEquivalent | Unknown


# ------------------------------------------------------------ unique binders

def barendregt(o):
    """Alpha-variant of ``o`` in which every binder is distinct from every
    other binder and from every free identifier."""
    used = set(o.fv) | set(o.fn)
    supply = Fresh(o.idents)

    def var(x, body):
        if x in used:
            y = supply(x)
            body = swap_var(body, x, y)
            x = y
        used.add(x)
        return x, body

    def name(a, body):
        if a in used:
            b = supply(a)
            body = swap_name(body, a, b)
            a = b
        used.add(a)
        return a, body

    def go(o):
        match o:
            case Var():
                return o
            case Abs(x, t):
                x, t = var(x, t)
                return Abs(x, go(t))
            case ESub(t, x, u):
                u2 = go(u)
                x, t = var(x, t)
                return ESub(go(t), x, u2)
            case Mu(a, c):
                a, c = name(a, c)
                return Mu(a, go(c))
            case ERepl(c, a, s, out):
                s2 = go(s)
                a, c = name(a, c)
                return ERepl(go(c), a, s2, out)
            case ERen(c, a, b):
                a, c = name(a, c)
                return ERen(go(c), a, b)
        return with_children(o, [go(c) for c in children(o)])

    return go(o)


def _zero_paths(o, prefix=()) -> Iterator[tuple]:
    """Proper descendants reachable through first children only: exactly the
    hole positions of linear contexts."""
    kids = children(o)
    if kids and not isinstance(o, Stack):
        q = prefix + (0,)
        yield q, kids[0]
        yield from _zero_paths(kids[0], q)


def _rename_occurrence(o, path, kind, new):
    node = at(o, path)
    match kind:
        case "Name":
            node = Named(new, node.t)
        case "Comp":
            node = ERepl(node.body, node.a, node.s, new)
        case "Swap":
            node = ERen(node.body, node.a, new)
    return replace_at(o, path, node)


def _subsets(occ: list, cap: int = 4):
    n = len(occ)
    if n <= cap:
        for r in range(n + 1):
            yield from itertools.combinations(occ, r)
    else:
        yield ()
        for o in occ:
            yield (o,)
        yield tuple(occ)


def _split_name(c, b: str, new: str):
    """Commands c' with c'{new := b} = c: a subset of the free occurrences of
    ``b`` is redirected to the fresh name ``new``."""
    occ = [(p, k) for p, k, _ in name_occurrences(c, b)]
    for sub in _subsets(occ):
        d = c
        for p, k in sub:
            d = _rename_occurrence(d, p, k, new)
        yield d


# ---------------------------------------------------------- local rewrites

# Each generator receives the (unique-binder) subobject and yields
# (axiom, orientation, replacement, expanding).

def _exsubs(o):
    if isinstance(o, ESub):
        T, x, u = o.body, o.x, o.arg
        for q, t in _zero_paths(T):
            if not isinstance(t, Term):
                continue
            vs, ns = binders_along(T, q)
            if x in vs or vs & u.fv or ns & u.fn:
                continue
            if var_count(T, x) != var_count(t, x):
                continue
            yield "exsubs", "->", replace_at(T, q, ESub(t, x, u)), False
    if isinstance(o, Term):
        for q, e in _zero_paths(o):
            if not isinstance(e, ESub):
                continue
            vs, ns = binders_along(o, q)
            if vs & e.arg.fv or ns & e.arg.fn:
                continue
            t, x = e.body, e.x
            if x in vs or x in o.fv:
                continue
            yield "exsubs", "<-", ESub(replace_at(o, q, t), x, e.arg), False


def _exrepl(o):
    if isinstance(o, ERepl):
        C, a, s, out = o.body, o.a, o.s, o.out
        for q, c in _zero_paths(C):
            if not isinstance(c, Command):
                continue
            vs, ns = binders_along(C, q)
            if a in ns or out in ns or ns & s.fn or vs & s.fv:
                continue
            if count(C, a) != count(c, a):
                continue
            yield "exrepl", "->", replace_at(C, q, ERepl(c, a, s, out)), False
    if isinstance(o, Command):
        for q, e in _zero_paths(o):
            if not isinstance(e, ERepl):
                continue
            vs, ns = binders_along(o, q)
            if e.out in ns or ns & e.s.fn or vs & e.s.fv:
                continue
            if e.a in ns or e.a in o.fn:
                continue
            yield "exrepl", "<-", ERepl(replace_at(o, q, e.body), e.a, e.s, e.out), False


def _exren(o):
    if isinstance(o, ERen):
        C, a, b = o.body, o.a, o.b
        for q, c in _zero_paths(C):
            if not isinstance(c, Command):
                continue
            _, ns = binders_along(C, q)
            if a in ns or b in ns or count(C, a) != count(c, a):
                continue
            yield "exren", "->", replace_at(C, q, ERen(c, a, b)), False
    if isinstance(o, Command):
        for q, e in _zero_paths(o):
            if not isinstance(e, ERen):
                continue
            _, ns = binders_along(o, q)
            if e.b in ns or e.a in ns or e.a in o.fn:
                continue
            yield "exren", "<-", ERen(replace_at(o, q, e.body), e.a, e.b), False


def _ppop_match(o):
    match o:
        case Named(a1, Abs(x, Mu(a, Named(b1, Abs(y, Mu(b, c)))))):
            if b != a1 and a != b1 and x != y and a != b:
                return Named(b1, Abs(y, Mu(b, Named(a1, Abs(x, Mu(a, c))))))
    return None


def _ppop(o, label="ppop"):
    r = _ppop_match(o)
    if r is not None:
        yield label, "->", r, False


def _P(o, fresh: Callable, expand: bool):
    match o:
        case Named(b, Mu(a, c)) if a != b:
            yield "P", "->", ERen(c, a, b), False
    if expand and isinstance(o, ERen):
        yield "P", "<-", Named(o.b, Mu(o.a, o.body)), True


def _theta(o, fresh: Callable, expand: bool, label="theta"):
    match o:
        case Mu(a, Named(b, t)) if a == b and a not in t.fn:
            yield label, "->", t, False
    if expand and isinstance(o, Term):
        g = fresh("a")
        yield label, "<-", Mu(g, Named(g, o)), True


def _ren(o, fresh: Callable, expand: bool, names):
    if isinstance(o, ERen):
        yield "ren", "->", rename_name(o.body, o.a, o.b), False
    if expand and isinstance(o, Command):
        new = fresh("a")
        for b in sorted(names | o.fn):
            for d in _split_name(o, b, new):
                yield "ren", "<-", ERen(d, new, b), True


# Laurent's axioms on pure objects.

def _s1(o):
    match o:
        case App(Abs(y, Abs(x, t)), v) if x not in v.fv and x != y:
            yield "s1", "->", Abs(x, App(Abs(y, t), v)), False
        case Abs(x, App(Abs(y, t), v)) if x not in v.fv and x != y:
            yield "s1", "<-", App(Abs(y, Abs(x, t)), v), False


def _s2(o):
    match o:
        case App(Abs(x, App(t, v)), u) if x not in v.fv:
            yield "s2", "->", App(App(Abs(x, t), u), v), False
    match o:
        case App(App(Abs(x, t), u), v) if x not in v.fv:
            yield "s2", "<-", App(Abs(x, App(t, v)), u), False


def _s3(o):
    match o:
        case App(Abs(x, Mu(a, Named(b, u))), w) if a not in w.fn:
            yield "s3", "->", Mu(a, Named(b, App(Abs(x, u), w))), False
        case Mu(a, Named(b, App(Abs(x, u), w))) if a not in w.fn:
            yield "s3", "<-", App(Abs(x, Mu(a, Named(b, u))), w), False


def _s4(o):
    match o:
        case Named(a1, App(Mu(a, Named(b1, App(Mu(b, c), w))), v)):
            if a not in w.fn and b not in v.fn and b != a1 and a != b1 and a != b:
                yield "s4", "->", Named(b1, App(Mu(b, Named(a1, App(Mu(a, c), v))), w)), False


def _s5(o):
    match o:
        case Named(a1, App(Mu(a, Named(b1, Abs(x, Mu(b, c)))), v)):
            if x not in v.fv and b not in v.fn and b != a1 and a != b1 and a != b:
                yield "s5", "->", Named(b1, Abs(x, Mu(b, Named(a1, App(Mu(a, c), v))))), False
        case Named(b1, Abs(x, Mu(b, Named(a1, App(Mu(a, c), v))))):
            if x not in v.fv and b not in v.fn and b != a1 and a != b1 and a != b:
                yield "s5", "<-", Named(a1, App(Mu(a, Named(b1, Abs(x, Mu(b, c)))), v)), False


def _s7(o, fresh: Callable, expand: bool, names):
    match o:
        case Named(a, Mu(b, c)):
            yield "s7", "->", (c if a == b else rename_name(c, b, a)), False
    if expand and isinstance(o, Command):
        new = fresh("b")
        for a in sorted(names | o.fn):
            for d in _split_name(o, a, new):
                yield "s7", "<-", Named(a, Mu(new, d)), True


# ------------------------------------------------------------------ neighbors

def _scope_names(o, path) -> set:
    return binders_along(o, path)[1]


def moves(o, relation: str = "sigma", expand: bool = False, extra_names=frozenset(),
          plain_filter: bool = True) -> Iterator[Move]:
    """All single-axiom rewrites of ``o`` at any position.

    ``relation`` is "sigma", "er" (sigma plus ren) or "laurent"."""
    base = barendregt(o)
    supply = Fresh(base.idents | set(extra_names))
    # names bound in base may only be used inside their own scope
    outside = set(extra_names) - (base.name_idents - base.fn)
    for path, sub in positions(base):
        if isinstance(sub, Stack):
            continue
        names = outside | _scope_names(base, path) | set(base.fn)
        if relation == "laurent":
            gens = [_s1(sub), _s2(sub), _s3(sub), _s4(sub), _s5(sub), _ppop(sub, "s6"),
                    _s7(sub, supply, expand, names), _theta(sub, supply, expand, "s8")]
        else:
            gens = [_exsubs(sub), _exrepl(sub), _exren(sub), _ppop(sub),
                    _P(sub, supply, expand), _theta(sub, supply, expand)]
            if relation == "er":
                gens.append(_ren(sub, supply, expand, names))
        for axiom, orient, new, grows in itertools.chain(*gens):
            after = replace_at(base, path, new)
            if plain_filter and relation != "laurent" and not is_plain_form(after):
                continue
            yield Move(axiom, orient, path, base, after, grows)


def sigma_neighbors(o, expand_depth: int = 0, with_ren: bool = False) -> list:
    if not is_plain_form(o):
        raise NotPlainForm(render(o))
    rel = "er" if with_ren else "sigma"
    return [m.after for m in moves(o, rel, expand=expand_depth > 0)]


# --------------------------------------------------------------------- search

class _Side:
    def __init__(self, root):
        k = alpha_key(root)
        self.parent = {k: None}
        self.exp = {k: 0}
        self.obj = {k: root}
        self.queue = deque([k])

    def path_to(self, k) -> list:
        out = []
        while self.parent[k] is not None:
            pk, mv = self.parent[k]
            out.append(mv)
            k = pk
        return out[::-1]


def _search(o, p, relation, budget, expand_depth, extra_names) -> Verdict:
    if alpha_equal(o, p):
        return Equivalent([])
    explored = 2
    for depth in sorted({0, expand_depth}):
        sides = (_Side(o), _Side(p))
        while sides[0].queue or sides[1].queue:
            if sides[0].queue and sides[1].queue:
                i = 0 if len(sides[0].queue) <= len(sides[1].queue) else 1
            else:
                i = 0 if sides[0].queue else 1
            me, other = sides[i], sides[1 - i]
            k = me.queue.popleft()
            cur, used = me.obj[k], me.exp[k]
            for mv in moves(cur, relation, expand=used < depth, extra_names=extra_names):
                nk = alpha_key(mv.after)
                e = used + mv.expanding
                if nk in me.exp and me.exp[nk] <= e:
                    continue
                me.parent[nk] = (k, mv)
                me.exp[nk] = e
                me.obj[nk] = mv.after
                me.queue.append(nk)
                explored += 1
                if nk in other.parent:
                    left, right = (me, other) if i == 0 else (other, me)
                    path = left.path_to(nk) + [m.reversed() for m in reversed(right.path_to(nk))]
                    return Equivalent(path)
                if explored >= budget:
                    return Unknown(explored)
        closed = len(sides[0].parent) + len(sides[1].parent)
    return NotEquivalent(closed)


def _names(*objs) -> frozenset:
    out = set()
    for o in objs:
        out |= o.name_idents
    return frozenset(out)


def sigma_equiv(o, p, budget: int = 50_000, with_ren: bool = False,
                expand_depth: int = 1) -> Verdict:
    if o.sort != p.sort:
        raise SortMismatch(f"{o.sort.value} vs {p.sort.value}")
    for x in (o, p):
        if not is_plain_form(x):
            raise NotPlainForm(render(x))
    rel = "er" if with_ren else "sigma"
    return _search(o, p, rel, budget, expand_depth, _names(o, p))


def er_equiv(o, p, budget: int = 50_000, expand_depth: int = 1) -> Verdict:
    return sigma_equiv(o, p, budget, True, expand_depth)


def laurent_equiv(o, p, budget: int = 50_000, expand_depth: int = 1) -> Verdict:
    if o.sort != p.sort:
        raise SortMismatch(f"{o.sort.value} vs {p.sort.value}")
    for x in (o, p):
        if not is_pure(x):
            raise NotLambdaMu(render(x))
    return _search(o, p, "laurent", budget, expand_depth, _names(o, p))


def replay(path: list, o, p, relation: str = "sigma", extra_names=None) -> bool:
    """Check a witness: consecutive endpoints agree up to alpha and each move
    is a genuine axiom instance in one of its two directions."""
    names = frozenset(extra_names) if extra_names is not None else _names(o, p)
    cur = o
    for mv in path:
        if not alpha_equal(cur, mv.before):
            return False
        if not _is_instance(mv, relation, names):
            return False
        cur = mv.after
    return alpha_equal(cur, p)


def _is_instance(mv: Move, relation: str, names) -> bool:
    target = alpha_key(mv.after)
    for src, dst in ((mv.before, target), (mv.after, alpha_key(mv.before))):
        for m in moves(src, relation, expand=True, extra_names=names):
            if m.axiom == mv.axiom and alpha_key(m.after) == dst:
                return True
    return False


# ------------------------------------------------------------------ expansion

def fexp(o):
    """Expand every explicit operator into lambda-mu syntax."""
    match o:
        case Var():
            return o
        case ESub(t, x, u):
            return App(Abs(x, fexp(t)), fexp(u))
        case ERepl(c, a, s, out):
            return Named(out, apply_stack(Mu(a, fexp(c)), fexp(s)))
        case ERen(c, a, b):
            return Named(b, Mu(a, fexp(c)))
    return with_children(o, [fexp(c) for c in children(o)])


# ---------------------------------------------------------------- bisimulation

@dataclass
class Match:
    side: str
    step: object
    partner: object
    verdict: object


@dataclass
class Failure:
    side: str
    step: object
    reason: str  # "unmatched" or "unknown"


@dataclass
class Report:
    matched: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    unknown: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "matched": [{"side": m.side, "rule": m.step.rule.value, "after": render(m.step.after),
                         "partner_rule": m.partner.rule.value,
                         "partner_after": render(m.partner.after)} for m in self.matched],
            "failures": [{"side": f.side, "rule": f.step.rule.value, "after": render(f.step.after),
                          "reason": f.reason} for f in self.failures],
        }


def bisim_diagram(o, p, budget: int = 50_000, relation: str = "sigma",
                  expand_depth: int = 1, check_premise: bool = True) -> Report:
    """Check both simulation directions of the strong bisimulation square.

    ``relation`` = "sigma" uses meaningful steps and the structural
    equivalence; "laurent" uses lambda-mu steps and Laurent's relation."""
    if relation == "laurent":
        step_fn, equiv = lmu_steps, laurent_equiv
    else:
        step_fn, equiv = meaningful_steps, sigma_equiv
    if check_premise and not isinstance(equiv(o, p, budget, expand_depth=expand_depth), Equivalent):
        raise PreconditionError("the two objects are not shown equivalent")
    rep = Report()
    left, right = step_fn(o), step_fn(p)
    for side, mine, theirs in (("left", left, right), ("right", right, left)):
        for st in mine:
            found, unsure = None, False
            ranked = sorted(theirs, key=lambda t: (t.rule != st.rule,
                                                   abs(t.after.size - st.after.size)))
            for depth in sorted({0, expand_depth}):
                for cand in ranked:
                    v = equiv(st.after, cand.after, budget, expand_depth=depth)
                    if isinstance(v, Equivalent):
                        found = (cand, v)
                        break
                    unsure |= isinstance(v, Unknown)
                if found:
                    break
            if found:
                rep.matched.append(Match(side, st, found[0], found[1]))
            else:
                rep.failures.append(Failure(side, st, "unknown" if unsure else "unmatched"))
                rep.unknown += unsure
    return rep
