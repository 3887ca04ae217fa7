"""Polarized proof-nets.

Formulas follow the output/anti-output grammar.  A net is stored flat: every
node records the box (identified by its bang node) that directly contains
it, and every wire records its source port and its target port, or ``None``
when the wire is a conclusion of the whole net.  Rewrites never mutate their
input; each one returns a fresh ``Net``.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field, replace as _dc_replace

import networkx as nx

from .reduction import Rule, Step
from .syntax import Stack, render
from .typecheck import Arrow, Base, Derivation, MetaVar, TypeFailure, arrows, check_report, infer


class InvalidDerivation(ValueError):
    pass


class InvalidNet(ValueError):
    pass


class Untypable(ValueError):
    pass


# --------------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class NegAtom:
    name: str

    def __str__(self):
        return f"{self.name}⊥"


@dataclass(frozen=True)
class Why:
    body: "Formula"

    def __post_init__(self):
        if not is_anti_output(self.body):
            raise ValueError(f"? applies to anti-output formulas, not {self.body}")

    def __str__(self):
        return f"?{self.body}"


@dataclass(frozen=True)
class Bang:
    body: "Formula"

    def __post_init__(self):
        if not is_output(self.body):
            raise ValueError(f"! applies to output formulas, not {self.body}")

    def __str__(self):
        return f"!{self.body}"


@dataclass(frozen=True)
class Par:
    left: Why
    right: "Formula"

    def __post_init__(self):
        if not isinstance(self.left, Why) or not is_output(self.right):
            raise ValueError("par expects ?Q and O")

    def __str__(self):
        return f"({self.left} ⅋ {self.right})"


@dataclass(frozen=True)
class Tensor:
    left: Bang
    right: "Formula"

    def __post_init__(self):
        if not isinstance(self.left, Bang) or not is_anti_output(self.right):
            raise ValueError("tensor expects !O and Q")

    def __str__(self):
        return f"({self.left} ⊗ {self.right})"


Formula = Atom | NegAtom | Why | Bang | Par | Tensor


def is_output(f) -> bool:
    return isinstance(f, (Atom, Par))


def is_anti_output(f) -> bool:
    return isinstance(f, (NegAtom, Tensor))


def is_negative(f) -> bool:
    return is_output(f) or isinstance(f, Why)


def neg(f: Formula) -> Formula:
    match f:
        case Atom(n):
            return NegAtom(n)
        case NegAtom(n):
            return Atom(n)
        case Why(q):
            return Bang(neg(q))
        case Bang(o):
            return Why(neg(o))
        case Par(Why(q), o):
            return Tensor(Bang(neg(q)), neg(o))
        case Tensor(Bang(o), q):
            return Par(Why(neg(o)), neg(q))
    raise TypeError(f"not a formula: {f!r}")


def atoms(f: Formula) -> set:
    match f:
        case Atom(n) | NegAtom(n):
            return {n}
        case Why(g) | Bang(g):
            return atoms(g)
        case Par(l, r) | Tensor(l, r):
            return atoms(l) | atoms(r)
    raise TypeError(f"not a formula: {f!r}")


def rename_atoms(f: Formula, m: dict) -> Formula:
    match f:
        case Atom(n):
            return Atom(m.get(n, n))
        case NegAtom(n):
            return NegAtom(m.get(n, n))
        case Why(g):
            return Why(rename_atoms(g, m))
        case Bang(g):
            return Bang(rename_atoms(g, m))
        case Par(l, r):
            return Par(rename_atoms(l, m), rename_atoms(r, m))
        case Tensor(l, r):
            return Tensor(rename_atoms(l, m), rename_atoms(r, m))
    raise TypeError(f"not a formula: {f!r}")


def skeleton(f: Formula) -> str:
    return str(rename_atoms(f, {a: "ι" for a in atoms(f)}))


def formula_of_type(t) -> Formula:
    match t:
        case Base(n):
            return Atom(n)
        case Arrow(a, b):
            return Par(Why(neg(formula_of_type(a))), formula_of_type(b))
        case MetaVar():
            raise ValueError("cannot translate a type with metavariables")
    raise TypeError(f"not a type: {t!r}")


def formula_of_stacktype(s, b) -> Formula:
    """The stack type ``s`` read as the argument list of a function into ``b``."""
    doms = s if isinstance(s, tuple) else (s,)
    return formula_of_type(arrows(doms, b))


# -------------------------------------------------------------------------- nets

KINDS = ("ax", "cut", "weak", "contr", "tensor", "par", "der", "bang")

C_AX = "C(ax)"
C_TP = "C(⊗,⅋)"
C_BW = "C(!,w)"
C_BD = "C(!,d)"
C_BC = "C(!,c)"
C_BB = "C(!,!)"
C_TW = "C(⊗,w)"
C_TC = "C(⊗,c)"
C_TB = "C(⊗,!)"
MULTIPLICATIVE = frozenset({C_AX, C_TP})
BANG_RULES = frozenset({C_BW, C_BD, C_BC, C_BB})
TENSOR_RULES = frozenset({C_TW, C_TC, C_TB})
CUT_RULES = MULTIPLICATIVE | BANG_RULES | TENSOR_RULES

RULE_ALIASES = {
    "ax": C_AX, "tensor-par": C_TP, "bang-w": C_BW, "bang-d": C_BD, "bang-c": C_BC,
    "bang-bang": C_BB, "tensor-w": C_TW, "tensor-c": C_TC, "tensor-bang": C_TB,
}


@dataclass
class Node:
    kind: str
    box: int | None = None        # bang node of the innermost enclosing box
    origin: tuple | None = None   # (object path, constructor) for translated cuts
    marked: bool = False          # residual tracking during simulation


@dataclass
class Wire:
    formula: Formula
    src: tuple                    # (node, port)
    dst: tuple | None = None      # (node, port); None for a net conclusion
    label: str | None = None      # variable, 'name, or None when erased
    distinguished: bool = False


@dataclass
class Net:
    nodes: dict = field(default_factory=dict)
    wires: dict = field(default_factory=dict)
    next_id: int = 0

    # -- construction
    def add_node(self, kind: str, box=None, origin=None, marked=False) -> int:
        i = self.next_id
        self.next_id += 1
        self.nodes[i] = Node(kind, box, origin, marked)
        return i

    def add_wire(self, formula, src, dst=None, label=None, distinguished=False) -> int:
        i = self.next_id
        self.next_id += 1
        self.wires[i] = Wire(formula, src, dst, label, distinguished)
        return i

    def copy(self) -> "Net":
        return Net({k: _dc_replace(v) for k, v in self.nodes.items()},
                   {k: _dc_replace(v) for k, v in self.wires.items()}, self.next_id)

    # -- queries
    def outs(self, n: int) -> list:
        return sorted((w for w, x in self.wires.items() if x.src[0] == n),
                      key=lambda w: (self.wires[w].src[1], w))

    def ins(self, n: int) -> list:
        return sorted((w for w, x in self.wires.items() if x.dst and x.dst[0] == n),
                      key=lambda w: (self.wires[w].dst[1], w))

    def out(self, n: int) -> int:
        return self.outs(n)[0]

    def src(self, w: int) -> int:
        return self.wires[w].src[0]

    def level(self, n: int):
        return self.nodes[n].box

    def within(self, n: int, b: int) -> bool:
        """Node ``n`` lies (at any depth) inside the box of bang ``b``."""
        x = self.nodes[n].box
        while x is not None:
            if x == b:
                return True
            x = self.nodes[x].box
        return False

    def box_members(self, b: int) -> set:
        return {n for n in self.nodes if self.within(n, b)}

    def conclusions(self) -> list:
        return sorted(w for w, x in self.wires.items() if x.dst is None)

    def distinguished(self):
        return next((w for w, x in self.wires.items() if x.distinguished), None)

    def cuts(self) -> list:
        return sorted(n for n, x in self.nodes.items() if x.kind == "cut")

    def labels(self) -> dict:
        return {x.label: w for w, x in self.wires.items() if x.dst is None and x.label}

    def size(self) -> int:
        return len(self.nodes)

    def remove_nodes(self, ns) -> None:
        for n in ns:
            del self.nodes[n]

    # -- export
    def to_json(self) -> dict:
        return {
            "nodes": [{"id": n, "kind": x.kind, "box": x.box} for n, x in sorted(self.nodes.items())],
            "wires": [{"id": w, "formula": str(x.formula), "from": list(x.src),
                       "to": list(x.dst) if x.dst else None, "label": x.label}
                      for w, x in sorted(self.wires.items())],
            "boxes": {str(b): sorted(n for n, x in self.nodes.items() if x.box == b)
                      for b, y in sorted(self.nodes.items()) if y.kind == "bang"},
            "distinguished": self.distinguished(),
        }

    def to_dot(self) -> str:
        shapes = {"ax": "invtriangle", "cut": "triangle", "weak": "box", "contr": "diamond",
                  "tensor": "circle", "par": "circle", "der": "circle", "bang": "house"}
        glyph = {"tensor": "⊗", "par": "⅋", "der": "?", "bang": "!", "contr": "c",
                 "weak": "w", "ax": "ax", "cut": "cut"}
        lines = ["digraph net {", "  rankdir=TB;"]

        def emit(box, indent):
            pad = "  " * indent
            for n, x in sorted(self.nodes.items()):
                if x.box == box:
                    lines.append(f'{pad}n{n} [label="{glyph[x.kind]}", shape={shapes[x.kind]}];')
            for n, x in sorted(self.nodes.items()):
                if x.box == box and x.kind == "bang":
                    lines.append(f"{pad}subgraph cluster_{n} {{")
                    lines.append(f'{pad}  label="box {n}"; style=rounded;')
                    emit(n, indent + 1)
                    lines.append(f"{pad}}}")

        emit(None, 1)
        for w, x in sorted(self.wires.items()):
            if x.dst is None:
                shape = "doublecircle" if x.distinguished else "plaintext"
                lines.append(f'  c{w} [label="{x.label or ""}", shape={shape}];')
                lines.append(f'  n{x.src[0]} -> c{w} [label="{x.formula}"];')
            else:
                lines.append(f'  n{x.src[0]} -> n{x.dst[0]} [label="{x.formula}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __str__(self):
        return json.dumps(self.to_json(), ensure_ascii=False)


def renumber(net: Net) -> Net:
    """Compact identifiers in their current order (bit-stable exports)."""
    ids = {}
    for k in sorted(net.nodes):
        ids[k] = len(ids)
    wids = {}
    for k in sorted(net.wires):
        wids[k] = len(ids) + len(wids)
    out = Net(next_id=len(ids) + len(wids))
    for k, x in net.nodes.items():
        out.nodes[ids[k]] = Node(x.kind, ids.get(x.box), x.origin, x.marked)
    for k, x in net.wires.items():
        dst = (ids[x.dst[0]], x.dst[1]) if x.dst else None
        out.wires[wids[k]] = Wire(x.formula, (ids[x.src[0]], x.src[1]), dst, x.label,
                                  x.distinguished)
    return out


# ------------------------------------------------------------- well-formedness

def check_net(net: Net) -> None:
    """Raise InvalidNet unless arities, formulas and box borders are consistent."""
    def bad(msg):
        raise InvalidNet(msg)

    for w, x in net.wires.items():
        if x.src[0] not in net.nodes or (x.dst and x.dst[0] not in net.nodes):
            bad(f"wire {w} dangles")
        s = x.src[0]
        if x.dst is not None:
            d = x.dst[0]
            ls, ld = net.level(s), net.level(d)
            if ls != ld:
                # a wire may only leave boxes, never enter one
                if ld is not None and not net.within(s, ld):
                    bad(f"wire {w} enters a box")
                if not is_negative(x.formula):
                    bad(f"positive wire {w} crosses a box border")
        elif net.level(s) is not None and not is_negative(x.formula):
            bad(f"positive conclusion {w} inside a box")
    for n, x in net.nodes.items():
        if x.kind not in KINDS:
            bad(f"unknown node kind {x.kind}")
        if x.box is not None and (x.box not in net.nodes or net.nodes[x.box].kind != "bang"):
            bad(f"node {n} sits in a box without a bang")
        ins = [net.wires[w] for w in net.ins(n)]
        outs = [net.wires[w] for w in net.outs(n)]
        f = [w.formula for w in ins]
        g = [w.formula for w in outs]
        match x.kind:
            case "ax":
                ok = (not f and len(g) == 2 and outs[0].src[1] == 0 and outs[1].src[1] == 1
                      and is_negative(g[0]) and g[1] == neg(g[0]))
            case "cut":
                ok = (not g and len(f) == 2 and ins[0].dst[1] == 0 and ins[1].dst[1] == 1
                      and is_negative(f[0]) and f[1] == neg(f[0]))
            case "weak":
                ok = not f and len(g) == 1 and is_negative(g[0])
            case "contr":
                ok = (len(f) >= 2 and len(g) == 1 and is_negative(g[0])
                      and all(h == g[0] for h in f))
            case "par":
                ok = (len(f) == 2 and len(g) == 1 and [w.dst[1] for w in ins] == [0, 1]
                      and isinstance(f[0], Why) and is_output(f[1]) and g[0] == Par(f[0], f[1]))
            case "tensor":
                ok = (len(f) == 2 and len(g) == 1 and [w.dst[1] for w in ins] == [0, 1]
                      and isinstance(f[0], Bang) and is_anti_output(f[1])
                      and g[0] == Tensor(f[0], f[1]))
                if ok and any(net.level(w.src[0]) != x.box for w in ins):
                    ok = False
            case "der":
                ok = len(f) == 1 and len(g) == 1 and is_anti_output(f[0]) and g[0] == Why(f[0])
            case "bang":
                ok = (len(f) == 1 and len(g) == 1 and is_output(f[0]) and g[0] == Bang(f[0])
                      and net.level(ins[0].src[0]) == n)
            case _:
                ok = False
        if not ok:
            bad(f"node {n} ({x.kind}) is ill-formed")
    if sum(1 for x in net.wires.values() if x.distinguished) > 1:
        bad("more than one distinguished conclusion")


def well_formed(net: Net) -> bool:
    try:
        check_net(net)
    except InvalidNet:
        return False
    return True


# ------------------------------------------------------------------ translation

@dataclass
class _Frag:
    nodes: set
    vars: dict
    names: dict
    out: int | None = None      # distinguished wire
    end: int | None = None      # stacks: the conclusion of the codomain


class _Builder:
    def __init__(self):
        self.net = Net()

    def node(self, frag_nodes: set, kind: str, origin=None) -> int:
        n = self.net.add_node(kind, origin=origin)
        frag_nodes.add(n)
        return n

    def plug(self, w: int, n: int, port: int) -> None:
        self.net.wires[w].dst = (n, port)

    def ax(self, nodes: set, f: Formula) -> tuple[int, int]:
        n = self.node(nodes, "ax")
        return self.net.add_wire(f, (n, 0)), self.net.add_wire(neg(f), (n, 1))

    def unary(self, nodes: set, kind: str, w: int, f: Formula) -> int:
        n = self.node(nodes, kind)
        self.plug(w, n, 0)
        return self.net.add_wire(f, (n, 0))

    def binary(self, nodes: set, kind: str, w0: int, w1: int, f: Formula) -> int:
        n = self.node(nodes, kind)
        self.plug(w0, n, 0)
        self.plug(w1, n, 1)
        return self.net.add_wire(f, (n, 0))

    def weak(self, nodes: set, f: Formula) -> int:
        n = self.node(nodes, "weak")
        return self.net.add_wire(f, (n, 0))

    def cut(self, nodes: set, w_neg: int, w_pos: int, origin) -> None:
        n = self.node(nodes, "cut", origin)
        self.plug(w_neg, n, 0)
        self.plug(w_pos, n, 1)

    def contract(self, nodes: set, w0: int, w1: int) -> int:
        f = self.net.wires[w0].formula
        if self.net.wires[w1].formula != f:
            raise InvalidDerivation(f"shared identifier with formulas {f} and "
                                    f"{self.net.wires[w1].formula}")
        n = self.node(nodes, "contr")
        self.plug(w0, n, 0)
        self.plug(w1, n, 0)
        return self.net.add_wire(f, (n, 0))

    def share(self, nodes: set, a: dict, b: dict) -> dict:
        out = dict(a)
        for k, w in b.items():
            out[k] = self.contract(nodes, out[k], w) if k in out else w
        return out

    def join(self, f1: _Frag, f2: _Frag) -> _Frag:
        nodes = f1.nodes | f2.nodes
        return _Frag(nodes, self.share(nodes, f1.vars, f2.vars),
                     self.share(nodes, f1.names, f2.names))

    def box(self, frag: _Frag) -> _Frag:
        """Put ``frag`` in a box; its distinguished output becomes the ! door."""
        f = self.net.wires[frag.out].formula
        bang = self.net.add_node("bang")
        for n in frag.nodes:
            if self.net.nodes[n].box is None:
                self.net.nodes[n].box = bang
        self.plug(frag.out, bang, 0)
        w = self.net.add_wire(Bang(f), (bang, 0))
        return _Frag({bang}, dict(frag.vars), dict(frag.names), w)


def _ftype(t) -> Formula:
    return formula_of_type(t)


def _is_stack_derivation(d: Derivation) -> bool:
    return d.rule == "stk"


def _tr(b: _Builder, d: Derivation, path: tuple) -> _Frag:
    o = d.subject
    match d.rule:
        case "var":
            nodes = set()
            f = _ftype(d.type)
            wo, wq = b.ax(nodes, f)
            wx = b.unary(nodes, "der", wq, Why(neg(f)))
            return _Frag(nodes, {o.x: wx}, {}, wo)
        case "app":
            ft = _tr(b, d.premises[0], path + (0,))
            fu = b.box(_tr(b, d.premises[1], path + (1,)))
            frag = b.join(ft, fu)
            wo, wq = b.ax(frag.nodes, _ftype(d.type))
            ten = b.binary(frag.nodes, "tensor", fu.out, wq, neg(b.net.wires[ft.out].formula))
            b.cut(frag.nodes, ft.out, ten, (path, "app"))
            frag.out = wo
            return frag
        case "abs":
            ft = _tr(b, d.premises[0], path + (0,))
            fx = Why(neg(_ftype(d.type.dom)))
            vars_ = dict(ft.vars)
            wx = vars_.pop(o.x) if o.x in vars_ else b.weak(ft.nodes, fx)
            wo = b.binary(ft.nodes, "par", wx, ft.out, _ftype(d.type))
            return _Frag(ft.nodes, vars_, ft.names, wo)
        case "cont":
            fc = _tr(b, d.premises[0], path + (0,))
            names = dict(fc.names)
            wo = names.pop(o.a) if o.a in names else b.weak(fc.nodes, _ftype(d.type))
            return _Frag(fc.nodes, fc.vars, names, wo)
        case "name":
            ft = _tr(b, d.premises[0], path + (0,))
            names = dict(ft.names)
            names[o.a] = b.contract(ft.nodes, names[o.a], ft.out) if o.a in names else ft.out
            return _Frag(ft.nodes, ft.vars, names)
        case "subs":
            ft = _tr(b, d.premises[0], path + (0,))
            fu = b.box(_tr(b, d.premises[1], path + (1,)))
            vars_ = dict(ft.vars)
            fx = Why(neg(b.net.wires[fu.out].formula.body))
            wx = vars_.pop(o.x) if o.x in vars_ else b.weak(ft.nodes, fx)
            b.cut(ft.nodes, wx, fu.out, (path, "subs"))
            frag = b.join(_Frag(ft.nodes, vars_, ft.names), fu)
            frag.out = ft.out
            return frag
        case "repl":
            cod = d.delta[o.out]
            fc = _tr(b, d.premises[0], path + (0,))
            fs = _tr_stack(b, d.premises[1], path + (1,), 0, cod)
            names = dict(fc.names)
            fa = formula_of_stacktype(d.premises[1].type, cod)
            wa = names.pop(o.a) if o.a in names else b.weak(fc.nodes, fa)
            b.cut(fc.nodes, wa, fs.out, (path, "repl"))
            frag = b.join(_Frag(fc.nodes, fc.vars, names), fs)
            end = fs.end
            if o.out in frag.names:
                end = b.contract(frag.nodes, frag.names[o.out], end)
            frag.names[o.out] = end
            return frag
        case "ren":
            fc = _tr(b, d.premises[0], path + (0,))
            names = dict(fc.names)
            wa = names.pop(o.a) if o.a in names else b.weak(fc.nodes, _ftype(d.delta[o.b]))
            names[o.b] = b.contract(fc.nodes, names[o.b], wa) if o.b in names else wa
            return _Frag(fc.nodes, fc.vars, names)
    raise InvalidDerivation(f"unexpected rule {d.rule} for a term or command")


def _tr_stack(b: _Builder, d: Derivation, spath: tuple, i: int, cod) -> _Frag:
    """Translation of a stack derivation relative to the codomain ``cod``.

    A single item t yields box(t) ⊗ ax⊥ with the axiom's other end as the
    codomain conclusion.  A push t·s translates t relative to the type of
    the rest and cuts that axiom end against the translation of s."""
    if _is_stack_derivation(d):
        head, rest = d.premises
        rest_type = rest.type
        fs = _tr_stack(b, rest, spath, i + 1, cod)
        ft = _tr_item(b, head, spath + (i,), arrows(_as_tuple(rest_type), cod))
        frag = b.join(ft, fs)
        b.cut(frag.nodes, ft.end, fs.out, (spath + (i,), "stk"))
        frag.out, frag.end = ft.out, fs.end
        return frag
    return _tr_item(b, d, spath + (i,), cod)


def _as_tuple(t) -> tuple:
    return t if isinstance(t, tuple) else (t,)


def _tr_item(b: _Builder, d: Derivation, path: tuple, cod) -> _Frag:
    fu = b.box(_tr(b, d, path))
    wo, wq = b.ax(fu.nodes, _ftype(cod))
    ten = b.binary(fu.nodes, "tensor", fu.out, wq,
                   Tensor(b.net.wires[fu.out].formula, neg(_ftype(cod))))
    return _Frag(fu.nodes, fu.vars, fu.names, ten, wo)


def translate(d: Derivation, codomain=None) -> Net:
    """Proof-net of a checked typing derivation.

    Conclusions: one ?-formula per variable, one output formula per name, and
    the distinguished conclusion (output for terms, anti-output relative to
    ``codomain`` for stacks, none for commands)."""
    report = check_report(d)
    if report is not None:
        raise InvalidDerivation(f"{report[1]} at {list(report[0])}")
    b = _Builder()
    if isinstance(d.subject, Stack):
        cod = codomain if codomain is not None else _fresh_base(d)
        frag = _tr_stack(b, d, (), 0, cod)
    else:
        frag = _tr(b, d, ())
    for x, w in frag.vars.items():
        b.net.wires[w].label = x
    for a, w in frag.names.items():
        b.net.wires[w].label = f"'{a}"
    if frag.out is not None:
        b.net.wires[frag.out].distinguished = True
    return b.net


def _fresh_base(d: Derivation):
    used = set()
    for _, n in d.nodes():
        for t in list(n.gamma.values()) + list(n.delta.values()) + list(_as_tuple(n.type or ())):
            used |= _type_atoms(t)
    for c in "BCDEFGHIJKLMNOPQRSTUVWXYZ":
        if c not in used:
            return Base(c)
    return Base("Cod")


def _type_atoms(t) -> set:
    match t:
        case Base(n):
            return {n}
        case Arrow(a, b):
            return _type_atoms(a) | _type_atoms(b)
    return set()


def translate_object(o, against=None) -> Net:
    """Translate the (principal, or constrained) typing derivation of ``o``."""
    try:
        ty = infer(o, against=against)
    except TypeFailure as e:
        raise Untypable(str(e)) from e
    return translate(ty.derivation)


# -------------------------------------------------------------- cut elimination

def _tree(net: Net, w: int, lvl) -> set | None:
    """Members of the ⊗-tree whose root emits the positive wire ``w``."""
    n = net.src(w)
    x = net.nodes[n]
    if x.box != lvl:
        return None
    if x.kind == "ax" and net.wires[w].src[1] == 1:
        return {n}
    if x.kind != "tensor":
        return None
    p0, p1 = net.ins(n)
    bang = net.src(p0)
    if net.nodes[bang].kind != "bang" or net.nodes[bang].box != lvl:
        return None
    rest = _tree(net, p1, lvl)
    if rest is None:
        return None
    return {n, bang} | net.box_members(bang) | rest


def _child_box(net: Net, n: int, lvl):
    """The box directly inside level ``lvl`` that contains node ``n``."""
    b = net.nodes[n].box
    while b is not None and net.nodes[b].box != lvl:
        b = net.nodes[b].box
    return b


def _redexes(net: Net, c: int) -> list:
    """(rule, data) pairs for cut node ``c``."""
    w0, w1 = net.ins(c)
    s0, s1 = net.src(w0), net.src(w1)
    lvl = net.level(c)
    k0, k1 = net.nodes[s0].kind, net.nodes[s1].kind
    out = []
    same0 = net.level(s0) == lvl
    if k1 == "ax" and net.level(s1) == lvl:
        out.append((C_AX, s1))
    elif k0 == "ax" and same0:
        out.append((C_AX, s0))
    if net.level(s1) != lvl:
        return out
    if k1 == "bang":
        unit = {s1} | net.box_members(s1)
        if not same0:
            out.append((C_BB, unit))
        elif k0 == "weak":
            out.append((C_BW, unit))
        elif k0 == "der":
            out.append((C_BD, unit))
        elif k0 == "contr":
            out.append((C_BC, unit))
    elif k1 == "tensor":
        if k0 == "par" and same0:
            out.append((C_TP, None))
        unit = _tree(net, w1, lvl)
        if unit is not None:
            if not same0:
                out.append((C_TB, unit))
            elif k0 == "weak":
                out.append((C_TW, unit))
            elif k0 == "contr":
                out.append((C_TC, unit))
    return out


def _new_cut(net: Net, lvl, w_neg: int, w_pos: int, like: Node) -> int:
    n = net.add_node("cut", lvl, like.origin, like.marked)
    net.wires[w_neg].dst = (n, 0)
    net.wires[w_pos].dst = (n, 1)
    return n


def _doors(net: Net, unit: set, principal: int) -> list:
    return sorted(w for w, x in net.wires.items()
                  if x.src[0] in unit and w != principal
                  and (x.dst is None or x.dst[0] not in unit))


def _drop(net: Net, nodes, keep_wires=()) -> None:
    nodes = set(nodes)
    keep = set(keep_wires)
    for w in [w for w, x in net.wires.items()
              if w not in keep and (x.src[0] in nodes)]:
        del net.wires[w]
    net.remove_nodes(nodes)


def _rule_ax(net: Net, c: int, a: int) -> None:
    w0, w1 = net.ins(c)
    inside = w0 if net.src(w0) == a else w1
    other = w1 if inside == w0 else w0
    far = next(w for w in net.outs(a) if w != inside)
    fw = net.wires[far]
    ow = net.wires[other]
    ow.dst, ow.label, ow.distinguished = fw.dst, fw.label, fw.distinguished
    del net.wires[inside], net.wires[far]
    net.remove_nodes([a, c])


def _rule_tp(net: Net, c: int) -> None:
    w0, w1 = net.ins(c)
    par, ten = net.src(w0), net.src(w1)
    q0, o0 = net.ins(par)
    b1, q1 = net.ins(ten)
    lvl, like = net.level(c), net.nodes[c]
    _new_cut(net, lvl, q0, b1, like)
    _new_cut(net, lvl, o0, q1, like)
    del net.wires[w0], net.wires[w1]
    net.remove_nodes([par, ten, c])


def _rule_erase(net: Net, c: int, unit: set) -> None:
    w0, w1 = net.ins(c)
    lvl = net.level(c)
    weak = net.src(w0)
    for d in _doors(net, unit, w1):
        n = net.add_node("weak", lvl)
        net.wires[d].src = (n, 0)
    del net.wires[w0]
    _drop(net, unit | {weak, c})


def _rule_der(net: Net, c: int) -> None:
    w0, w1 = net.ins(c)
    der, bang = net.src(w0), net.src(w1)
    (q,) = net.ins(der)
    (o,) = net.ins(bang)
    lvl, like = net.level(c), net.nodes[c]
    for n, x in net.nodes.items():
        if x.box == bang:
            x.box = lvl
    _new_cut(net, lvl, o, q, like)
    del net.wires[w0], net.wires[w1]
    net.remove_nodes([der, bang, c])


def _copy_unit(net: Net, unit: set) -> dict:
    m = {n: net.add_node("cut") for n in sorted(unit)}
    for n in sorted(unit):
        x = net.nodes[n]
        net.nodes[m[n]] = Node(x.kind, m.get(x.box, x.box), x.origin, x.marked)
    for w, x in sorted(net.wires.items()):
        if x.src[0] in unit and x.dst is not None and x.dst[0] in unit:
            net.add_wire(x.formula, (m[x.src[0]], x.src[1]), (m[x.dst[0]], x.dst[1]))
    return m


def _rule_dup(net: Net, c: int, unit: set) -> None:
    w0, w1 = net.ins(c)
    lvl, like = net.level(c), net.nodes[c]
    k = net.src(w0)
    prems = net.ins(k)
    doors = _doors(net, unit, w1)
    contrs = {d: net.add_node("contr", lvl) for d in doors}
    for q in prems:
        m = _copy_unit(net, unit)
        top = net.add_wire(net.wires[w1].formula, (m[net.src(w1)], net.wires[w1].src[1]))
        _new_cut(net, lvl, q, top, like)
        for d in doors:
            x = net.wires[d]
            net.add_wire(x.formula, (m[x.src[0]], x.src[1]), (contrs[d], 0))
    for d in doors:
        net.wires[d].src = (contrs[d], 0)
    del net.wires[w0]
    _drop(net, unit | {k, c})


def _rule_move(net: Net, c: int, unit: set) -> None:
    w0, _ = net.ins(c)
    lvl = net.level(c)
    target = _child_box(net, net.src(w0), lvl)
    for n in unit | {c}:
        if net.nodes[n].box == lvl:
            net.nodes[n].box = target


def apply_rule(net: Net, c: int, rule: str, data) -> Net:
    out = net.copy()
    if rule == C_AX:
        _rule_ax(out, c, data)
    elif rule == C_TP:
        _rule_tp(out, c)
    elif rule in (C_BW, C_TW):
        _rule_erase(out, c, data)
    elif rule == C_BD:
        _rule_der(out, c)
    elif rule in (C_BC, C_TC):
        _rule_dup(out, c, data)
    elif rule in (C_BB, C_TB):
        _rule_move(out, c, data)
    else:
        raise ValueError(f"unknown cut rule {rule}")
    return out


def redexes(net: Net, rules=CUT_RULES, only_marked: bool = False) -> list:
    """(cut node, rule, data) for every cut matching one of ``rules``."""
    out = []
    for c in net.cuts():
        if only_marked and not net.nodes[c].marked:
            continue
        for rule, data in _redexes(net, c):
            if rule in rules:
                out.append((c, rule, data))
    return out


def ppn_steps(net: Net, rules=CUT_RULES) -> list:
    rules = frozenset(RULE_ALIASES.get(r, r) for r in rules)
    return [(rule, apply_rule(net, c, rule, data)) for c, rule, data in redexes(net, rules)]


def mult_normal_form(net: Net, limit: int = 100_000) -> Net:
    """Normal form under C(ax) and C(⊗,⅋)."""
    for _ in range(limit):
        rs = redexes(net, MULTIPLICATIVE)
        if not rs:
            return net
        c, rule, data = rs[0]
        net = apply_rule(net, c, rule, data)
    raise RuntimeError("multiplicative normalization did not terminate")


def mnf(net: Net) -> Net:
    return mult_normal_form(net)


# --------------------------------------------------------- structural equivalence

def canonicalize(net: Net) -> Net:
    """≡-normal form: n-ary contractions hoisted out of boxes, weakenings
    absorbed by contractions or hoisted, final weakenings dropped."""
    net = net.copy()
    changed = True
    while changed:
        changed = False
        for n in sorted(net.nodes):
            if n not in net.nodes:
                continue
            x = net.nodes[n]
            if x.kind not in ("contr", "weak"):
                continue
            w = net.out(n)
            wx = net.wires[w]
            # permeability: leave the box through its auxiliary door
            if x.box is not None and (wx.dst is None or not net.within(wx.dst[0], x.box)
                                      and wx.dst[0] != x.box):
                x.box = net.nodes[x.box].box
                changed = True
                continue
            d = wx.dst[0] if wx.dst else None
            if x.kind == "contr" and d is not None and net.nodes[d].kind == "contr" \
                    and net.level(d) == x.box:
                for p in net.ins(n):
                    net.wires[p].dst = (d, 0)
                del net.wires[w]
                net.remove_nodes([n])
                changed = True
            elif x.kind == "weak" and d is not None and net.nodes[d].kind == "contr":
                del net.wires[w]
                net.remove_nodes([n])
                _collapse(net, d)
                changed = True
            elif x.kind == "weak" and d is None and x.box is None and not wx.distinguished:
                del net.wires[w]
                net.remove_nodes([n])
                changed = True
    return net


def _collapse(net: Net, k: int) -> None:
    """Tidy a contraction that lost premises."""
    prems = net.ins(k)
    if len(prems) >= 2:
        return
    w = net.out(k)
    if not prems:
        net.nodes[k].kind = "weak"
        return
    p, wx = net.wires[prems[0]], net.wires[w]
    p.dst, p.label, p.distinguished = wx.dst, wx.label, wx.distinguished
    del net.wires[w]
    net.remove_nodes([k])


def _graph(net: Net, rename: dict | None = None) -> nx.DiGraph:
    g = nx.DiGraph()
    for n, x in net.nodes.items():
        g.add_node(n, lab=x.kind)
    for n, x in net.nodes.items():
        if x.box is not None:
            g.add_edge(x.box, n, skel="box", full="box", ports="box", wires=())
    for w, x in net.wires.items():
        f = rename_atoms(x.formula, rename) if rename else x.formula
        if x.dst is None:
            tag = ("*" if x.distinguished else "") + (x.label or "")
            g.add_node(("c", w), lab=f"concl:{tag}")
            u, v, dport = x.src[0], ("c", w), 0
        else:
            u, v, dport = x.src[0], x.dst[0], x.dst[1]
        key = f"{x.src[1]}>{dport}"
        data = g.get_edge_data(u, v)
        old = data["wires"] if data else ()
        wires = tuple(sorted(old + ((key, f),), key=lambda kf: (kf[0], str(kf[1]))))
        g.add_edge(u, v, wires=wires,
                   ports="|".join(k for k, _ in wires),
                   skel="|".join(f"{k}:{skeleton(f)}" for k, f in wires),
                   full="|".join(f"{k}:{f}" for k, f in wires))
    return g


def _match(pat: Formula, f: Formula, sub: dict) -> bool:
    """Extend ``sub`` (atom -> output formula) so that ``pat`` becomes ``f``."""
    match pat:
        case Atom(n):
            if not is_output(f):
                return False
            return sub.setdefault(n, f) == f
        case NegAtom(n):
            if not is_anti_output(f):
                return False
            return sub.setdefault(n, neg(f)) == neg(f)
        case Why(p) | Bang(p):
            return type(f) is type(pat) and _match(p, f.body, sub)
        case Par(l, r) | Tensor(l, r):
            return type(f) is type(pat) and _match(l, f.left, sub) and _match(r, f.right, sub)
    return False


def _instance_under(g_pat: nx.DiGraph, g_tgt: nx.DiGraph, mapping: dict) -> bool:
    sub: dict = {}
    for u, v, d in g_pat.edges(data=True):
        other = g_tgt.edges[mapping[u], mapping[v]]["wires"]
        for (_, fp), (_, ft) in zip(d["wires"], other):
            if not _match(fp, ft, sub):
                return False
    return True


def _atoms_of(net: Net) -> set:
    out = set()
    for x in net.wires.values():
        out |= atoms(x.formula)
    return out


def _formula_bag(net: Net, rename=None) -> list:
    return sorted(str(rename_atoms(x.formula, rename) if rename else x.formula)
                  for x in net.wires.values())


def net_hash(net: Net) -> str:
    """Isomorphism-invariant fingerprint up to atom names."""
    g = _graph(net)
    # the hasher only accepts ASCII labels
    esc = lambda s: s.encode("unicode_escape").decode("ascii")  # noqa: E731
    for _, d in g.nodes(data=True):
        d["lab"] = esc(d["lab"])
    for _, _, d in g.edges(data=True):
        d["skel"] = esc(d["skel"])
    return nx.weisfeiler_lehman_graph_hash(g, node_attr="lab", edge_attr="skel")


def isomorphic(n1: Net, n2: Net, up_to_atoms: bool = False,
               up_to_instance: bool = False, cap: int = 5000) -> bool:
    """Label-respecting isomorphism.  ``up_to_atoms`` allows a bijective
    renaming of atoms; ``up_to_instance`` lets one side be a substitution
    instance of the other (atoms replaced by formulas)."""
    if len(n1.nodes) != len(n2.nodes) or len(n1.wires) != len(n2.wires):
        return False
    nm = lambda a, b: a["lab"] == b["lab"]  # noqa: E731
    g1, g2 = _graph(n1), _graph(n2)
    if nx.is_isomorphic(g1, g2, node_match=nm,
                        edge_match=lambda a, b: a["full"] == b["full"]):
        return True
    if up_to_instance:
        gm = nx.isomorphism.DiGraphMatcher(g1, g2, node_match=nm,
                                           edge_match=lambda a, b: a["ports"] == b["ports"])
        for i, m in enumerate(gm.isomorphisms_iter()):
            if i >= cap:
                break
            inv = {v: k for k, v in m.items()}
            if _instance_under(g2, g1, inv) or _instance_under(g1, g2, m):
                return True
        return False
    if not up_to_atoms:
        return False
    a1, a2 = sorted(_atoms_of(n1)), sorted(_atoms_of(n2))
    if len(a1) != len(a2) or len(a1) > 7:
        return False
    target = _formula_bag(n2)
    for perm in itertools.permutations(a2):
        m = dict(zip(a1, perm))
        if m == {a: a for a in a1} or _formula_bag(n1, m) != target:
            continue
        if nx.is_isomorphic(_graph(n1, m), g2, node_match=nm,
                            edge_match=lambda a, b: a["full"] == b["full"]):
            return True
    return False


def ppn_equiv(n1: Net, n2: Net, up_to_atoms: bool = False,
              up_to_instance: bool = False) -> bool:
    """Structural equivalence: label-respecting isomorphism of ≡-normal forms."""
    return isomorphic(canonicalize(n1), canonicalize(n2), up_to_atoms, up_to_instance)


# ------------------------------------------------------------------ simulation

SIMULATION_TABLE = {
    Rule.dB: frozenset({C_AX, C_TP}),
    Rule.S: frozenset({C_AX}) | BANG_RULES,
    Rule.dM: frozenset(),
    Rule.N: frozenset(),
    Rule.C: frozenset(),
    Rule.W: frozenset(),
    Rule.Nnl: TENSOR_RULES,
    Rule.Cnl: TENSOR_RULES,
    Rule.Wnl: TENSOR_RULES,
    Rule.Rnl: TENSOR_RULES,
}


@dataclass
class SimReport:
    ok: bool
    rule: str
    allowed: tuple
    sequence: list
    reason: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok, "rule": self.rule, "allowed": list(self.allowed),
                "sequence": self.sequence, "reason": self.reason}


def _mark(net: Net, step: Step) -> Net:
    net = net.copy()
    p = tuple(step.path)
    tag = {Rule.dB: "app", Rule.dM: "app", Rule.S: "subs"}.get(step.rule, "repl")
    for x in net.nodes.values():
        if x.kind != "cut" or x.origin is None:
            continue
        path, kind = x.origin
        if (path, kind) == (p, tag):
            x.marked = True
        elif tag == "repl" and kind == "stk" and len(path) == len(p) + 2 \
                and path[:len(p) + 1] == p + (1,):
            x.marked = True
    return net


def _residual_run(net: Net, rules, limit: int) -> tuple[Net, list]:
    """Reduce marked cuts (and the cuts they create) with ``rules`` only."""
    seq = []
    for _ in range(limit):
        rs = redexes(net, rules, only_marked=True)
        if not rs:
            break
        c, rule, data = rs[0]
        net = canonicalize(apply_rule(net, c, rule, data))
        seq.append(rule)
    return net, seq


def _bfs(src: Net, goal: Net, rules, budget: int) -> list | None:
    seen = {net_hash(src)}
    queue = deque([(src, [])])
    while queue and len(seen) < budget:
        net, seq = queue.popleft()
        for c, rule, data in redexes(net, rules):
            nxt = canonicalize(apply_rule(net, c, rule, data))
            if isomorphic(nxt, goal, up_to_instance=True):
                return seq + [rule]
            h = net_hash(nxt)
            if h not in seen:
                seen.add(h)
                queue.append((nxt, seq + [rule]))
    return None


def related_typing(o, p):
    """Typing of ``p`` constrained by the typing of ``o`` (the two derivations
    compared by simulation and soundness statements)."""
    before = infer(o)
    try:
        after = infer(p, against=before)
    except TypeFailure:
        after = infer(p)
    return before, after


def simulate_check(o, step: Step, budget: int = 2000) -> SimReport:
    """Check that the net of ``o`` reaches the net of ``step.after`` using only
    the cut rules associated with ``step.rule`` (plus ≡)."""
    rule = Rule(step.rule)
    allowed = SIMULATION_TABLE.get(rule)
    if allowed is None:
        raise ValueError(f"no simulation entry for rule {rule}")
    try:
        before, after = related_typing(o, step.after)
    except TypeFailure as e:
        raise Untypable(str(e)) from e
    src = canonicalize(_mark(translate(before.derivation), step))
    goal = canonicalize(translate(after.derivation))
    names = tuple(sorted(allowed))
    if isomorphic(src, goal, up_to_instance=True):
        return SimReport(True, rule.value, names, [])
    if not allowed:
        return SimReport(False, rule.value, names, [], "nets differ and no cut rule is allowed")
    # The raw translation keeps weakenings that ≡ would absorb into
    # contractions; some duplications only show up before that absorption.
    raw = _mark(translate(before.derivation), step)
    for start in (src, raw):
        net, seq = _residual_run(start, allowed, budget)
        if isomorphic(net, goal, up_to_instance=True):
            return SimReport(True, rule.value, names, seq)
    for start in (src, raw):
        found = _bfs(start, goal, allowed, budget)
        if found is not None:
            return SimReport(True, rule.value, names, found)
    return SimReport(False, rule.value, names, seq,
                     "target net not reached with the allowed cut rules")


def mnf_of(o, against=None) -> Net:
    """Multiplicative normal form of the translation of ``o``."""
    return mult_normal_form(translate_object(o, against))


def mnf_equiv(o, p) -> bool:
    """Do ``o`` and ``p`` (the latter typed against ``o``) have ≡ multiplicative
    normal forms?"""
    try:
        before, after = related_typing(o, p)
    except TypeFailure as e:
        raise Untypable(str(e)) from e
    return ppn_equiv(mult_normal_form(translate(before.derivation)),
                     mult_normal_form(translate(after.derivation)), up_to_instance=True)


__all__ = [
    "Atom", "Bang", "C_AX", "C_BB", "C_BC", "C_BD", "C_BW", "C_TB", "C_TC", "C_TP", "C_TW",
    "CUT_RULES", "Formula", "InvalidDerivation", "InvalidNet", "MULTIPLICATIVE", "NegAtom",
    "Net", "Par", "SIMULATION_TABLE", "SimReport", "Tensor", "Untypable", "Why",
    "apply_rule", "canonicalize", "check_net", "formula_of_stacktype", "formula_of_type",
    "isomorphic", "mnf_equiv", "mnf_of", "mult_normal_form", "neg", "net_hash", "ppn_equiv",
    "ppn_steps", "redexes", "related_typing", "renumber", "simulate_check", "translate",
    "translate_object", "well_formed",
]
