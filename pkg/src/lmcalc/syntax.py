"""Objects of the calculus: terms, commands and stacks.

Variables and names live in two disjoint namespaces and are stored as
plain strings (names without their leading quote).  Every node is an
immutable value; the constructors validate the binding discipline and the
``esub`` / ``erepl`` / ``eren`` helpers refresh a binder instead of failing.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterator, Union


class ParseError(ValueError):
    def __init__(self, position: int, expected: str, found: str = ""):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"at {position}: expected {expected}, found {found or 'end of input'}")


class SortError(ValueError):
    pass


class InvariantError(ValueError):
    pass


class Sort(enum.Enum):
    TERM = "term"
    COMMAND = "command"
    STACK = "stack"


def fresh(base: str, avoid) -> str:
    """Smallest numbered variant of ``base`` outside ``avoid``."""
    stem = base.rstrip("0123456789") or base
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


class _Node:
    """Shared cached analyses.  Subclasses implement the ``_fv``/``_fn``
    recursions directly from the binding structure."""

    @cached_property
    def fv(self) -> frozenset:
        return frozenset(self._fv())

    @cached_property
    def fn(self) -> frozenset:
        return frozenset(self._fn())

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in children(self))

    @cached_property
    def var_idents(self) -> frozenset:
        out = set(self._own_vars())
        for c in children(self):
            out |= c.var_idents
        return frozenset(out)

    @cached_property
    def name_idents(self) -> frozenset:
        out = set(self._own_names())
        for c in children(self):
            out |= c.name_idents
        return frozenset(out)

    @property
    def idents(self) -> frozenset:
        return self.var_idents | self.name_idents

    def _own_vars(self):
        return ()

    def _own_names(self):
        return ()

    def __str__(self) -> str:
        return render(self)


class Term(_Node):
    sort = Sort.TERM


class Command(_Node):
    sort = Sort.COMMAND


@dataclass(frozen=True)
class Var(Term):
    x: str

    def _fv(self):
        return {self.x}

    def _fn(self):
        return set()

    def _own_vars(self):
        return (self.x,)


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term

    def _fv(self):
        return self.fun.fv | self.arg.fv

    def _fn(self):
        return self.fun.fn | self.arg.fn


@dataclass(frozen=True)
class Abs(Term):
    x: str
    body: Term

    def _fv(self):
        return self.body.fv - {self.x}

    def _fn(self):
        return self.body.fn

    def _own_vars(self):
        return (self.x,)


@dataclass(frozen=True)
class Mu(Term):
    a: str
    body: Command

    def _fv(self):
        return self.body.fv

    def _fn(self):
        return self.body.fn - {self.a}

    def _own_names(self):
        return (self.a,)


@dataclass(frozen=True)
class ESub(Term):
    body: Term
    x: str
    arg: Term

    def __post_init__(self):
        if self.x in self.arg.fv:
            raise InvariantError(f"substituted variable {self.x} occurs in its argument")

    def _fv(self):
        return (self.body.fv - {self.x}) | self.arg.fv

    def _fn(self):
        return self.body.fn | self.arg.fn

    def _own_vars(self):
        return (self.x,)


@dataclass(frozen=True)
class Named(Command):
    a: str
    t: Term

    def _fv(self):
        return self.t.fv

    def _fn(self):
        return self.t.fn | {self.a}

    def _own_names(self):
        return (self.a,)


@dataclass(frozen=True)
class Stack(_Node):
    items: tuple

    sort = Sort.STACK

    def __post_init__(self):
        if not self.items:
            raise InvariantError("stacks are non-empty")
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))

    def _fv(self):
        return set().union(*(t.fv for t in self.items))

    def _fn(self):
        return set().union(*(t.fn for t in self.items))

    def __add__(self, other: "Stack") -> "Stack":
        return Stack(self.items + other.items)

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class ERepl(Command):
    body: Command
    a: str
    s: Stack
    out: str

    def __post_init__(self):
        if self.a in self.s.fn:
            raise InvariantError(f"replaced name '{self.a} occurs in its stack")
        if self.a == self.out:
            raise InvariantError(f"replaced name '{self.a} equals the output name")

    def _fv(self):
        return self.body.fv | self.s.fv

    def _fn(self):
        return (self.body.fn - {self.a}) | self.s.fn | {self.out}

    def _own_names(self):
        return (self.a, self.out)


@dataclass(frozen=True)
class ERen(Command):
    body: Command
    a: str
    b: str

    def __post_init__(self):
        if self.a == self.b:
            raise InvariantError(f"renaming '{self.a} to itself")

    def _fv(self):
        return self.body.fv

    def _fn(self):
        return (self.body.fn - {self.a}) | {self.b}

    def _own_names(self):
        return (self.a, self.b)


Object = Union[Term, Command, Stack]


def sort_of(o: Object) -> Sort:
    return o.sort


# ---------------------------------------------------------------- traversal

def children(o) -> tuple:
    match o:
        case Var():
            return ()
        case App(f, u):
            return (f, u)
        case Abs(_, t) | Mu(_, t):
            return (t,)
        case ESub(t, _, u):
            return (t, u)
        case Named(_, t):
            return (t,)
        case ERepl(c, _, s, _):
            return (c, s)
        case ERen(c, _, _):
            return (c,)
        case Stack(items):
            return items
    raise TypeError(f"not an object: {o!r}")


def with_children(o, kids) -> Object:
    match o:
        case Var():
            return o
        case App():
            return App(kids[0], kids[1])
        case Abs(x, _):
            return Abs(x, kids[0])
        case Mu(a, _):
            return Mu(a, kids[0])
        case ESub(_, x, _):
            return ESub(kids[0], x, kids[1])
        case Named(a, _):
            return Named(a, kids[0])
        case ERepl(_, a, _, out):
            return ERepl(kids[0], a, kids[1], out)
        case ERen(_, a, b):
            return ERen(kids[0], a, b)
        case Stack():
            return Stack(tuple(kids))
    raise TypeError(f"not an object: {o!r}")


def positions(o, prefix=()) -> Iterator[tuple]:
    """Pre-order (path, subobject) pairs; paths are tuples of child indices."""
    yield prefix, o
    for i, c in enumerate(children(o)):
        yield from positions(c, prefix + (i,))


def at(o, path):
    for i in path:
        o = children(o)[i]
    return o


def replace_at(o, path, new):
    if not path:
        return new
    kids = list(children(o))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(o, kids)


def binders_along(o, path) -> tuple[set, set]:
    """Variables and names bound by the nodes strictly above ``path``."""
    vs, ns = set(), set()
    for i in path:
        match o:
            case Abs(x, _):
                vs.add(x)
            case ESub(_, x, _) if i == 0:
                vs.add(x)
            case Mu(a, _):
                ns.add(a)
            case ERepl(_, a, _, _) if i == 0:
                ns.add(a)
            case ERen(_, a, _):
                ns.add(a)
        o = children(o)[i]
    return vs, ns


def is_pure(o) -> bool:
    """True when no explicit operator occurs (a lambda-mu object)."""
    return not any(isinstance(s, (ESub, ERepl, ERen)) for _, s in positions(o))


# ------------------------------------------------------- raw fresh renaming

def swap_var(o, x: str, y: str):
    """Rename free occurrences of variable x to y, where y is fresh for o."""
    if x not in o.fv:
        return o
    match o:
        case Var(z):
            return Var(y) if z == x else o
        case Abs(z, t):
            return o if z == x else Abs(z, swap_var(t, x, y))
        case ESub(t, z, u):
            return ESub(t if z == x else swap_var(t, x, y), z, swap_var(u, x, y))
    return with_children(o, [swap_var(c, x, y) for c in children(o)])


def swap_name(o, a: str, b: str):
    """Rename free occurrences of name a to b, where b is fresh for o."""
    if a not in o.fn:
        return o
    match o:
        case Mu(g, c):
            return o if g == a else Mu(g, swap_name(c, a, b))
        case Named(g, t):
            return Named(b if g == a else g, swap_name(t, a, b))
        case ERepl(c, g, s, out):
            body = c if g == a else swap_name(c, a, b)
            return ERepl(body, g, swap_name(s, a, b), b if out == a else out)
        case ERen(c, g, h):
            body = c if g == a else swap_name(c, a, b)
            return ERen(body, g, b if h == a else h)
    return with_children(o, [swap_name(c, a, b) for c in children(o)])


# --------------------------------------------------- refreshing constructors

def esub(t: Term, x: str, u: Term) -> ESub:
    if x in u.fv:
        y = fresh(x, t.idents | u.idents)
        t, x = swap_var(t, x, y), y
    return ESub(t, x, u)


def erepl(c: Command, a: str, s: Stack, out: str) -> ERepl:
    if a in s.fn or a == out:
        b = fresh(a, c.idents | s.idents | {out})
        c, a = swap_name(c, a, b), b
    return ERepl(c, a, s, out)


def eren(c: Command, a: str, b: str) -> ERen:
    if a == b:
        g = fresh(a, c.idents | {b})
        c, a = swap_name(c, a, g), g
    return ERen(c, a, b)


def stack(*items: Term) -> Stack:
    return Stack(tuple(items))


def app(t: Term, *args: Term) -> Term:
    return reduce(App, args, t)


# ------------------------------------------------------------------- analysis

def count(o, a: str) -> int:
    """Number of free occurrences of the name ``a``."""
    if a not in o.fn:
        return 0
    match o:
        case Named(g, t):
            return (g == a) + count(t, a)
        case ERepl(c, g, s, out):
            return (0 if g == a else count(c, a)) + count(s, a) + (out == a)
        case ERen(c, g, b):
            return (0 if g == a else count(c, a)) + (b == a)
        case Mu(g, c):
            return 0 if g == a else count(c, a)
    return sum(count(c, a) for c in children(o))


def var_count(o, x: str) -> int:
    if x not in o.fv:
        return 0
    match o:
        case Var(y):
            return int(y == x)
        case Abs(y, t):
            return 0 if y == x else var_count(t, x)
        case ESub(t, y, u):
            return (0 if y == x else var_count(t, x)) + var_count(u, x)
    return sum(var_count(c, x) for c in children(o))


@dataclass(frozen=True)
class Analysis:
    fv: frozenset
    fn: frozenset
    obj: object

    def count(self, a: str) -> int:
        return count(self.obj, a)


def analyze(o) -> Analysis:
    return Analysis(o.fv, o.fn, o)


# --------------------------------------------------------- alpha-equivalence

def canonical(o):
    """Representative of the alpha class: binders renumbered in traversal
    order with identifiers that cannot be written in source text."""
    counter = [0]

    def new():
        counter[0] += 1
        return f"#{counter[0]}"

    def go(o, vs, ns):
        match o:
            case Var(x):
                return Var(vs.get(x, x))
            case App(f, u):
                return App(go(f, vs, ns), go(u, vs, ns))
            case Abs(x, t):
                y = new()
                return Abs(y, go(t, {**vs, x: y}, ns))
            case Mu(a, c):
                b = new()
                return Mu(b, go(c, vs, {**ns, a: b}))
            case ESub(t, x, u):
                y = new()
                arg = go(u, vs, ns)
                return ESub(go(t, {**vs, x: y}, ns), y, arg)
            case Named(a, t):
                return Named(ns.get(a, a), go(t, vs, ns))
            case ERepl(c, a, s, out):
                b = new()
                st = go(s, vs, ns)
                return ERepl(go(c, vs, {**ns, a: b}), b, st, ns.get(out, out))
            case ERen(c, a, b):
                g = new()
                return ERen(go(c, vs, {**ns, a: g}), g, ns.get(b, b))
            case Stack(items):
                return Stack(tuple(go(t, vs, ns) for t in items))
        raise TypeError(f"not an object: {o!r}")

    return go(o, {}, {})


def alpha_key(o) -> str:
    return render(canonical(o))


def alpha_equal(o, p) -> bool:
    return o.sort == p.sort and canonical(o) == canonical(p)


# -------------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<name>'[A-Za-z][A-Za-z0-9_]*)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
                    r"|(?P<sym>:=|~>|[\\.()\[\],>]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i = 0
    while True:
        while i < len(text) and text[i].isspace():
            i += 1
        if i >= len(text):
            break
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ParseError(i, "a token", text[i])
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "ident" and val == "mu":
            kind = "sym"
        toks.append((kind, val, m.start(kind)))
        i = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind=None, val=None, what=None):
        tk = self.peek()
        if (kind and tk[0] != kind) or (val is not None and tk[1] != val):
            raise ParseError(tk[2], what or val or kind, tk[1])
        self.i += 1
        return tk

    def at_sym(self, val, k=0):
        tk = self.peek(k)
        return tk[0] == "sym" and tk[1] == val

    def starts_atom(self):
        kind, val, _ = self.peek()
        return kind == "ident" or (kind == "sym" and val in ("\\", "mu", "("))

    def term(self) -> Term:
        t = self.atom()
        while self.starts_atom():
            t = App(t, self.atom())
        return t

    def atom(self) -> Term:
        kind, val, pos = self.peek()
        if kind == "ident":
            self.i += 1
            t = Var(val)
        elif self.at_sym("\\"):
            self.i += 1
            x = self.take("ident", what="a variable")[1]
            self.take("sym", ".")
            return Abs(x, self.term())
        elif self.at_sym("mu"):
            self.i += 1
            a = self.take("name", what="a name")[1][1:]
            self.take("sym", ".")
            return Mu(a, self.command())
        elif self.at_sym("("):
            self.i += 1
            t = self.term()
            self.take("sym", ")")
        else:
            raise ParseError(pos, "a term", val)
        while self.at_sym("[") and self.peek(1)[0] == "ident" and self.at_sym(":=", 2):
            self.i += 1
            x = self.take("ident")[1]
            self.take("sym", ":=")
            u = self.term()
            self.take("sym", "]")
            t = ESub(t, x, u)
        return t

    def command(self) -> Command:
        kind, val, pos = self.peek()
        if self.at_sym("["):
            self.i += 1
            a = self.take("name", what="a name")[1][1:]
            self.take("sym", "]")
            return Named(a, self.term())
        if self.at_sym("("):
            self.i += 1
            c = self.command()
            self.take("sym", ")")
            while self.at_sym("[") and self.peek(1)[0] == "name":
                self.i += 1
                a = self.take("name")[1][1:]
                if self.at_sym(":="):
                    self.i += 1
                    s = self.stack()
                    self.take("sym", ">")
                    out = self.take("name", what="a name")[1][1:]
                    c = ERepl(c, a, s, out)
                else:
                    self.take("sym", "~>", what="':=' or '~>'")
                    b = self.take("name", what="a name")[1][1:]
                    c = ERen(c, a, b)
                self.take("sym", "]")
            return c
        raise ParseError(pos, "a command", val)

    def stack(self) -> Stack:
        items = [self.term()]
        while self.at_sym(","):
            self.i += 1
            items.append(self.term())
        return Stack(tuple(items))

    def parse(self, sort: Sort):
        o = {Sort.TERM: self.term, Sort.COMMAND: self.command, Sort.STACK: self.stack}[sort]()
        self.take("eof", what="end of input")
        return o


def parse(text: str, sort: Sort | str = Sort.TERM) -> Object:
    sort = Sort(sort)
    try:
        return _Parser(text).parse(sort)
    except ParseError as err:
        for other in Sort:
            if other is sort:
                continue
            try:
                _Parser(text).parse(other)
            except (ParseError, InvariantError):
                continue
            raise SortError(f"input is a {other.value}, not a {sort.value}") from err
        raise


def parse_any(text: str) -> Object:
    """Parse as a term, then a command, then a stack of two or more items."""
    last = None
    for sort in Sort:
        try:
            return _Parser(text).parse(sort)
        except ParseError as err:
            last = err
    raise last


# ------------------------------------------------------------------ printing

def _term(t: Term, ctx: str) -> str:
    match t:
        case Var(x):
            return x
        case App(f, u):
            s = f"{_term(f, 'fun')} {_term(u, 'arg')}"
            return f"({s})" if ctx == "arg" else s
        case Abs(x, body):
            s = f"\\{x}. {_term(body, 'top')}"
            return s if ctx == "top" else f"({s})"
        case Mu(a, c):
            s = f"mu '{a}. {_command(c)}"
            return s if ctx == "top" else f"({s})"
        case ESub(body, x, u):
            inner = _term(body, "atom")
            if not isinstance(body, (Var, ESub)):
                inner = f"({_term(body, 'top')})"
            return f"{inner}[{x} := {_term(u, 'top')}]"
    raise TypeError(f"not a term: {t!r}")


def _command(c: Command) -> str:
    match c:
        case Named(a, t):
            return f"['{a}] {_term(t, 'top')}"
        case ERepl(body, a, s, out):
            return f"{_operand(body)}['{a} := {_stack(s)} > '{out}]"
        case ERen(body, a, b):
            return f"{_operand(body)}['{a} ~> '{b}]"
    raise TypeError(f"not a command: {c!r}")


def _operand(c: Command) -> str:
    return f"({_command(c)})" if isinstance(c, Named) else _command(c)


def _stack(s: Stack) -> str:
    return ", ".join(_term(t, "top") for t in s.items)


def render(o: Object) -> str:
    if isinstance(o, Term):
        return _term(o, "top")
    if isinstance(o, Command):
        return _command(o)
    return _stack(o)


# ----------------------------------------------------------------------- JSON

def to_json(o) -> dict:
    match o:
        case Var(x):
            return {"k": "Var", "x": {"var": x}}
        case App(f, u):
            return {"k": "App", "fun": to_json(f), "arg": to_json(u)}
        case Abs(x, t):
            return {"k": "Abs", "x": {"var": x}, "body": to_json(t)}
        case Mu(a, c):
            return {"k": "Mu", "a": {"name": a}, "body": to_json(c)}
        case ESub(t, x, u):
            return {"k": "ESub", "body": to_json(t), "x": {"var": x}, "arg": to_json(u)}
        case Named(a, t):
            return {"k": "Named", "a": {"name": a}, "t": to_json(t)}
        case ERepl(c, a, s, out):
            return {"k": "ERepl", "body": to_json(c), "a": {"name": a}, "s": to_json(s),
                    "out": {"name": out}}
        case ERen(c, a, b):
            return {"k": "ERen", "body": to_json(c), "a": {"name": a}, "b": {"name": b}}
        case Stack(items):
            return {"k": "Stack", "items": [to_json(t) for t in items]}
    raise TypeError(f"not an object: {o!r}")


def from_json(d: dict):
    k = d["k"]
    if k == "Var":
        return Var(d["x"]["var"])
    if k == "App":
        return App(from_json(d["fun"]), from_json(d["arg"]))
    if k == "Abs":
        return Abs(d["x"]["var"], from_json(d["body"]))
    if k == "Mu":
        return Mu(d["a"]["name"], from_json(d["body"]))
    if k == "ESub":
        return ESub(from_json(d["body"]), d["x"]["var"], from_json(d["arg"]))
    if k == "Named":
        return Named(d["a"]["name"], from_json(d["t"]))
    if k == "ERepl":
        return ERepl(from_json(d["body"]), d["a"]["name"], from_json(d["s"]), d["out"]["name"])
    if k == "ERen":
        return ERen(from_json(d["body"]), d["a"]["name"], d["b"]["name"])
    if k == "Stack":
        return Stack(tuple(from_json(t) for t in d["items"]))
    raise ValueError(f"unknown constructor {k}")
