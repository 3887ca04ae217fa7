"""Command-line front end: ``lm <subcommand> ...``.

Exit codes: 0 success / equivalent / property holds, 1 not equivalent /
property fails / untypable, 2 usage or input error, 3 budget exhausted."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import equivalence as eq
from . import proofnets as pn
from .gen import shrink
from .meta import PreconditionError as MetaPrecondition
from .properties import SUITES, run_suite
from .reduction import (
    EXPLICIT, LAMBDA_MU, MEANINGFUL, PLAIN, NotLambdaMu, NotPlainForm, Rule, fcan, is_plain_form,
    lmu_steps, plain_weight, steps,
)
from .syntax import (
    InvariantError, ParseError, Sort, SortError, from_json, parse, parse_any, render, to_json,
)
from .typecheck import TypeFailure, infer, parse_type, type_str

OK, FAIL, USAGE, UNKNOWN = 0, 1, 2, 3

RULE_SETS = {
    "explicit": EXPLICIT, "plain": PLAIN, "meaningful": MEANINGFUL, "lambda-mu": LAMBDA_MU,
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------- helpers

def _text(arg: str) -> str:
    if arg.startswith("@"):
        try:
            return Path(arg[1:]).read_text()
        except OSError as e:
            raise UsageError(f"cannot read {arg[1:]}: {e.strerror}") from e
    return arg


def _obj(arg: str, sort: str | None):
    text = _text(arg).strip()
    return parse(text, sort) if sort else parse_any(text)


def _rules(spec: str) -> frozenset:
    out = set()
    for part in spec.split(","):
        part = part.strip()
        if part in RULE_SETS:
            out |= RULE_SETS[part]
        else:
            try:
                out.add(Rule(part))
            except ValueError:
                raise UsageError(f"unknown rule or rule set {part!r}") from None
    return frozenset(out)


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False) if args.json else text)


def _verdict_code(v) -> int:
    return {eq.Equivalent: OK, eq.NotEquivalent: FAIL, eq.Unknown: UNKNOWN}[type(v)]


def _verdict_text(v) -> str:
    if isinstance(v, eq.Equivalent):
        n = len(v.path)
        lines = [f"Equivalent ({n} move{'' if n == 1 else 's'})"]
        lines += [f"  {m.axiom} {m.orientation} at {list(m.path)}: {render(m.after)}"
                  for m in v.path]
        return "\n".join(lines)
    if isinstance(v, eq.NotEquivalent):
        return f"NotEquivalent (closed set of {v.closed_set_size} objects)"
    return f"Unknown (budget exhausted after {v.explored} objects)"


def _derivation_lines(d, depth=0) -> list:
    out = [f"{'  ' * depth}{d.judgment()}   [{d.rule}]"]
    for p in d.premises:
        out += _derivation_lines(p, depth + 1)
    return out


# ---------------------------------------------------------------- subcommands

def cmd_parse(args) -> int:
    o = _obj(args.object, args.sort)
    ast = to_json(o)
    _emit(args, {"sort": o.sort.value, "ast": ast}, json.dumps(ast, ensure_ascii=False))
    return OK


def cmd_render(args) -> int:
    try:
        data = json.loads(_text(args.ast))
        o = from_json(data.get("ast", data))
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as e:
        raise UsageError(f"not a JSON object tree: {e}") from e
    _emit(args, {"sort": o.sort.value, "text": render(o)}, render(o))
    return OK


def cmd_fcan(args) -> int:
    o = _obj(args.object, args.sort)
    r = fcan(o)
    _emit(args, {"input": render(o), "plain_form": render(r)}, render(r))
    return OK


def cmd_steps(args) -> int:
    o = _obj(args.object, args.sort)
    rules = _rules(args.rules)
    sts = lmu_steps(o) if rules <= LAMBDA_MU else steps(o, rules)
    sts = [s for s in sts if s.rule in rules]
    _emit(args, {"steps": [s.to_json() for s in sts]},
          "\n".join(f"{s.rule} at {list(s.path)}: {render(s.after)}" for s in sts))
    return OK


def cmd_reduce(args) -> int:
    o = _obj(args.object, args.sort)
    rules = _rules(args.rules)
    trace = []
    cur = o
    for _ in range(args.limit):
        sts = lmu_steps(cur) if rules <= LAMBDA_MU else steps(cur, rules)
        sts = [s for s in sts if s.rule in rules]
        if not sts:
            break
        trace.append(sts[0])
        cur = sts[0].after
    else:
        if (lmu_steps(cur) if rules <= LAMBDA_MU else steps(cur, rules)):
            payload = {"normal": False, "result": render(cur),
                       "trace": [s.to_json() for s in trace]}
            _emit(args, payload, f"{render(cur)}\n(step limit {args.limit} reached)")
            return UNKNOWN
    text = "\n".join(f"-> {s.rule}: {render(s.after)}" for s in trace) if args.trace \
        else render(cur)
    _emit(args, {"normal": True, "result": render(cur), "trace": [s.to_json() for s in trace]},
          text)
    return OK


def cmd_weight(args) -> int:
    o = _obj(args.object, args.sort)
    w = plain_weight(o)
    _emit(args, {"object": render(o), "weight": w}, str(w))
    return OK


def cmd_typeof(args) -> int:
    o = _obj(args.object, args.sort)
    t = infer(o)
    d = t.derivation
    closed = not t.gamma and not t.delta and t.type is not None
    _emit(args, {"gamma": {x: str(v) for x, v in sorted(t.gamma.items())},
                 "delta": {a: str(v) for a, v in sorted(t.delta.items())},
                 "type": type_str(t.type) if t.type is not None else None},
          type_str(t.type) if closed else d.judgment())
    return OK


def cmd_derive(args) -> int:
    o = _obj(args.object, args.sort)
    d = infer(o).derivation
    _emit(args, d.to_json(), "\n".join(_derivation_lines(d)))
    return OK


def _equiv_inputs(args):
    o, p = _obj(args.left, args.sort), _obj(args.right, args.sort)
    if o.sort != p.sort:
        raise eq.SortMismatch(f"{o.sort.value} vs {p.sort.value}")
    return o, p


def cmd_equiv(args) -> int:
    o, p = _equiv_inputs(args)
    if args.laurent:
        v = eq.laurent_equiv(o, p, args.budget, expand_depth=args.expand)
        rel = "laurent"
    else:
        o, p = fcan(o), fcan(p)  # both relations live on plain forms
        v = eq.sigma_equiv(o, p, args.budget, with_ren=args.er, expand_depth=args.expand)
        rel = "er" if args.er else "sigma"
    payload = {"relation": rel, "left": render(o), "right": render(p), **v.to_json()}
    _emit(args, payload, _verdict_text(v))
    return _verdict_code(v)


def cmd_fexp(args) -> int:
    o = _obj(args.object, args.sort)
    r = eq.fexp(o)
    _emit(args, {"input": render(o), "expansion": render(r)}, render(r))
    return OK


def cmd_translate(args) -> int:
    o = _obj(args.object, args.sort)
    try:
        d = infer(o).derivation
    except TypeFailure as e:
        raise pn.Untypable(str(e)) from e
    cod = parse_type(args.codomain) if args.codomain else None
    net = pn.translate(d, codomain=cod)
    if args.mnf:
        net = pn.mult_normal_form(net)
    net = pn.renumber(net)
    if args.dot:
        print(net.to_dot())
    elif args.json:
        print(json.dumps(net.to_json(), indent=2, ensure_ascii=False))
    else:
        kinds: dict = {}
        for x in net.nodes.values():
            kinds[x.kind] = kinds.get(x.kind, 0) + 1
        concl = [f"{x.label or ('*' if x.distinguished else '_')}: {x.formula}"
                 for x in net.wires.values() if x.dst is None]
        print(f"{len(net.nodes)} nodes ({', '.join(f'{k} {v}' for k, v in sorted(kinds.items()))})")
        print("conclusions: " + "; ".join(sorted(concl)))
    return OK


def cmd_ppn_equiv(args) -> int:
    o, p = _equiv_inputs(args)
    try:
        before, after = pn.related_typing(o, p)
    except TypeFailure as e:
        raise pn.Untypable(str(e)) from e
    n1, n2 = pn.translate(before.derivation), pn.translate(after.derivation)
    if args.mnf:
        n1, n2 = pn.mult_normal_form(n1), pn.mult_normal_form(n2)
    same = pn.ppn_equiv(n1, n2, up_to_atoms=args.up_to_atoms,
                        up_to_instance=args.up_to_instance)
    _emit(args, {"equivalent": same}, "equivalent" if same else "not equivalent")
    return OK if same else FAIL


def cmd_simulate(args) -> int:
    o = _obj(args.object, args.sort)
    sts = steps(o, EXPLICIT)
    if args.step is not None:
        if not 0 <= args.step < len(sts):
            raise UsageError(f"step index out of range (0..{len(sts) - 1})")
        sts = [sts[args.step]]
    reports = [(s, pn.simulate_check(o, s, args.budget)) for s in sts]
    payload = {"object": render(o), "steps": [
        {"step": s.to_json(), **r.to_json()} for s, r in reports]}
    lines = [f"{'ok  ' if r.ok else 'FAIL'} {s.rule} at {list(s.path)}: "
             f"{' '.join(r.sequence) or '≡'}{'  (' + r.reason + ')' if r.reason else ''}"
             for s, r in reports]
    _emit(args, payload, "\n".join(lines) or "no steps")
    return OK if all(r.ok for _, r in reports) else FAIL


def cmd_bisim(args) -> int:
    o, p = _equiv_inputs(args)
    rel = "laurent" if args.laurent else "sigma"
    if rel == "sigma":
        for x in (o, p):
            if not is_plain_form(x):
                raise NotPlainForm(f"{render(x)} is not a plain form (apply fcan first)")
    rep = eq.bisim_diagram(o, p, args.budget, relation=rel, expand_depth=args.expand)
    lines = [f"match {m.side} {m.step.rule}: {render(m.step.after)}  ~  "
             f"{m.partner.rule}: {render(m.partner.after)}" for m in rep.matched]
    lines += [f"{f.reason.upper()} {f.side} {f.step.rule}: {render(f.step.after)}"
              for f in rep.failures]
    lines.append("diagram closes" if rep.ok else "diagram does not close")
    _emit(args, {"relation": rel, **rep.to_json()}, "\n".join(lines))
    if rep.ok:
        return OK
    return UNKNOWN if all(f.reason == "unknown" for f in rep.failures) else FAIL


def cmd_fuzz(args) -> int:
    seed = args.seed if args.seed is not None else int(os.environ.get("LM_SEED", "0"))
    opts = {}
    if args.max_size is not None:
        if args.suite == "correspondence":
            raise UsageError("the correspondence corpus has a fixed size bound")
        opts["max_size"] = args.max_size
    res = run_suite(args.suite, seed, args.n, args.workers, **opts)
    if args.dump and res.failures:
        _dump(Path(args.dump), args.suite, res, opts)
    d = res.to_json()
    lines = [f"{args.suite}: {d['pass']} pass, {d['fail']} fail, {d['unknown']} unknown, "
             f"{d['skip']} skipped in {d['seconds']:.2f}s"]
    lines += [f"  FAIL [{f.sort}] {f.subject}: {f.detail}" for f in res.failures[:20]]
    _emit(args, d, "\n".join(lines))
    if not res.ok:
        return FAIL
    return UNKNOWN if d["unknown"] and not d["pass"] else OK


def _dump(root: Path, suite: str, res, opts) -> None:
    """Write each failing subject as a text-syntax corpus file, shrunk when
    the subject is a single generated object."""
    root.mkdir(parents=True, exist_ok=True)
    check = SUITES[suite][0]
    for i, f in enumerate(res.failures):
        text = f.subject
        if "  ~  " not in text and f.sort:
            o = parse(text, f.sort)
            text = render(shrink(o, lambda c: _still_fails(check, suite, c, opts)))
        (root / f"{suite}-{i:04d}.{f.sort or 'txt'}").write_text(text + "\n")


def _still_fails(check, suite, o, opts) -> bool:
    from . import properties as pr
    single = {"weight": pr.weight_obj, "unique-nf": pr.unique_nf_obj,
              "subject": pr.subject_obj, "simulation": pr.simulation_obj}.get(suite)
    return single is not None and single(o, **{k: v for k, v in opts.items()
                                               if k != "max_size"}).status == pr.FAIL


# ----------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lm", description="Workbench for lambda-mu with "
                                 "explicit substitution, replacement and renaming.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_, objects=("object",)):
        p = sub.add_parser(name, help=help_)
        for o in objects:
            p.add_argument(o, help="object text or @file")
        p.add_argument("--sort", choices=[s.value for s in Sort])
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(fn=fn)
        return p

    add("parse", cmd_parse, "print the abstract syntax tree as JSON")
    p = sub.add_parser("render", help="print the text form of a JSON syntax tree")
    p.add_argument("ast", help="JSON text or @file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_render)
    add("fcan", cmd_fcan, "plain normal form")
    p = add("steps", cmd_steps, "list one-step reducts")
    p.add_argument("--rules", default="explicit",
                   help="rule sets (explicit, plain, meaningful, lambda-mu) or rule tags, "
                        "comma separated")
    p = add("reduce", cmd_reduce, "bounded leftmost-outermost reduction")
    p.add_argument("--rules", default="explicit")
    p.add_argument("--limit", type=int, default=1000)
    p.add_argument("--trace", action="store_true")
    add("weight", cmd_weight, "termination measure of plain reduction")
    add("typeof", cmd_typeof, "principal simple typing")
    add("derive", cmd_derive, "typing derivation")
    p = add("equiv", cmd_equiv, "structural equivalence check", ("left", "right"))
    g = p.add_mutually_exclusive_group()
    g.add_argument("--er", action="store_true", help="include the renaming axiom")
    g.add_argument("--laurent", action="store_true", help="Laurent's relation on lambda-mu")
    p.add_argument("--budget", type=int, default=50_000)
    p.add_argument("--expand", type=int, default=1)
    add("fexp", cmd_fexp, "expand explicit operators into lambda-mu syntax")
    p = add("translate", cmd_translate, "proof-net of the principal derivation")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--mnf", action="store_true", help="multiplicative normal form")
    p.add_argument("--codomain", help="codomain type for stacks, e.g. 'A -> B'")
    p = add("ppn-equiv", cmd_ppn_equiv, "structural equivalence of the two proof-nets",
            ("left", "right"))
    p.add_argument("--mnf", action="store_true", help="compare multiplicative normal forms")
    p.add_argument("--up-to-atoms", action="store_true")
    p.add_argument("--up-to-instance", action="store_true")
    p = add("simulate", cmd_simulate, "check proof-net simulation of each step")
    p.add_argument("--step", type=int, help="index of a single step")
    p.add_argument("--budget", type=int, default=2000)
    p = add("bisim", cmd_bisim, "check the strong bisimulation square", ("left", "right"))
    p.add_argument("--laurent", action="store_true")
    p.add_argument("--budget", type=int, default=50_000)
    p.add_argument("--expand", type=int, default=1)
    p = sub.add_parser("fuzz", help="run a property suite on generated cases")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-size", type=int)
    p.add_argument("--dump", help="directory for failing cases")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_fuzz)
    return ap


_INPUT_ERRORS = (ParseError, SortError, InvariantError, NotPlainForm, NotLambdaMu,
                 eq.SortMismatch, eq.PreconditionError, MetaPrecondition, UsageError,
                 pn.InvalidDerivation)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.fn(args)
    except _INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except (TypeFailure, pn.Untypable) as e:
        print(f"untypable: {e}", file=sys.stderr)
        return FAIL
    except ValueError as e:  # e.g. a malformed type for --codomain
        print(f"error: {e}", file=sys.stderr)
        return USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
