"""Random objects, related pairs, shrinking and small exhaustive corpora."""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field
from functools import lru_cache

from .equivalence import moves
from .reduction import fcan
from .syntax import (
    Abs, App, Mu, Named, Sort, Stack, Var, alpha_key, children, erepl, eren, esub,
    positions, replace_at,
)
from .typecheck import TypeFailure, infer


class GenerationExhausted(RuntimeError):
    pass


# Relative frequencies per constructor.  Explicit operators get the larger
# share because they drive the interesting rewrite rules.
DEFAULT_WEIGHTS = {
    "app": 3, "abs": 2, "mu": 2, "esub": 3,
    "named": 3, "erepl": 3, "eren": 2,
}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_size: int = 12
    free_vars: tuple = ("x", "y", "z")
    free_names: tuple = ("a", "b", "c")
    require_plain: bool = False
    require_typable: bool = False
    pure: bool = False              # lambda-mu syntax only
    retries: int = 500              # rejection budget in typable mode
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS), hash=False)

    def with_seed(self, seed: int) -> "GenConfig":
        return dataclasses.replace(self, seed=seed)


_BINDER_VARS = ("u", "v", "w")
_BINDER_NAMES = ("d", "e", "g")
_MIN = {"term": 1, "command": 2, "stack": 2}


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng

    def pick(self, options: list[str]) -> str:
        ws = [self.cfg.weights.get(o, 1) for o in options]
        return self.rng.choices(options, ws)[0]

    def var(self, scope_v):
        pool = list(self.cfg.free_vars)
        if scope_v and (not pool or self.rng.random() < 0.6):
            return self.rng.choice(sorted(scope_v))
        return self.rng.choice(pool or sorted(scope_v))

    def name(self, scope_n):
        pool = list(self.cfg.free_names)
        if scope_n and (not pool or self.rng.random() < 0.6):
            return self.rng.choice(sorted(scope_n))
        return self.rng.choice(pool or sorted(scope_n))

    def binder_var(self):
        return self.rng.choice(_BINDER_VARS + tuple(self.cfg.free_vars))

    def binder_name(self):
        return self.rng.choice(_BINDER_NAMES + tuple(self.cfg.free_names))

    def split(self, n: int, lo_left: int, lo_right: int) -> tuple[int, int]:
        k = self.rng.randint(lo_left, n - lo_right)
        return k, n - k

    def term(self, n: int, sv: frozenset, sn: frozenset):
        if n <= 1:
            return Var(self.var(sv))
        opts = ["abs"]
        if n >= 3:
            opts += ["app", "mu"] + ([] if self.cfg.pure else ["esub"])
        op = self.pick(opts)
        if op == "abs":
            x = self.binder_var()
            return Abs(x, self.term(n - 1, sv | {x}, sn))
        if op == "mu":
            a = self.binder_name()
            return Mu(a, self.command(n - 1, sv, sn | {a}))
        left, right = self.split(n - 1, 1, 1)
        if op == "app":
            return App(self.term(left, sv, sn), self.term(right, sv, sn))
        x = self.binder_var()
        return esub(self.term(left, sv | {x}, sn), x, self.term(right, sv, sn))

    def command(self, n: int, sv, sn):
        opts = ["named"]
        if not self.cfg.pure:
            if n >= 3:
                opts.append("eren")
            if n >= 5:
                opts.append("erepl")
        op = self.pick(opts)
        if op == "named":
            return Named(self.name(sn), self.term(n - 1, sv, sn))
        if op == "eren":
            a = self.binder_name()
            return eren(self.command(n - 1, sv, sn | {a}), a, self.name(sn))
        a = self.binder_name()
        left, right = self.split(n - 1, 2, 2)
        s = self.stack(right, sv, sn)
        return erepl(self.command(left, sv, sn | {a}), a, s, self.name(sn))

    def stack(self, n: int, sv, sn):
        budget = max(n - 1, 1)
        items = []
        while budget > 0:
            k = budget if self.rng.random() < 0.6 else self.rng.randint(1, budget)
            items.append(self.term(k, sv, sn))
            budget -= k
        return Stack(tuple(items))


def _draw(cfg: GenConfig, sort: Sort, rng: random.Random):
    g = _Gen(cfg, rng)
    lo = _MIN[sort.value]
    top = max(cfg.max_size, lo)
    n = rng.randint(max(lo, (top + 1) // 2), top)
    empty = frozenset()
    if sort is Sort.TERM:
        return g.term(n, empty, empty)
    if sort is Sort.COMMAND:
        return g.command(n, empty, empty)
    return g.stack(n, empty, empty)


def gen_object(cfg: GenConfig, sort: Sort | str = Sort.TERM):
    """A well-formed object of ``sort`` of size at most ``cfg.max_size``
    (before plain normalization), deterministic in ``cfg``."""
    sort = Sort(sort)
    if cfg.max_size < 1:
        raise ValueError("max_size must be at least 1")
    rng = random.Random(cfg.seed)
    for _ in range(cfg.retries if cfg.require_typable else 1):
        o = _draw(cfg, sort, rng)
        if cfg.require_plain:
            o = fcan(o)
        if not cfg.require_typable:
            return o
        try:
            infer(o)
        except TypeFailure:
            continue
        return o
    raise GenerationExhausted(f"no typable {sort.value} after {cfg.retries} draws")


def gen_objects(cfg: GenConfig, n: int, sort: Sort | str = Sort.TERM) -> list:
    """``n`` objects from consecutive seeds starting at ``cfg.seed``."""
    return [gen_object(cfg.with_seed(cfg.seed + i), sort) for i in range(n)]


def gen_equiv_pair(cfg: GenConfig, k: int, sort: Sort | str = Sort.TERM,
                   relation: str = "sigma"):
    """(o, p, witness): o plain, p reached by at most ``k`` random
    non-expanding axiom moves recorded in ``witness``."""
    cfg = dataclasses.replace(cfg, require_plain=True)
    o = gen_object(cfg, sort)
    rng = random.Random(cfg.seed ^ 0x5EED)
    p, witness = o, []
    for _ in range(k):
        ms = list(moves(p, relation, expand=False))
        if not ms:
            break
        mv = rng.choice(ms)
        witness.append(mv)
        p = mv.after
    return o, p, witness


REDEX_KINDS = ("Name", "Comp", "Swap")


def gen_replacement_redex(cfg: GenConfig, kind: str = "Name", linear: bool = False):
    """A command ``c[a := s > out]`` where ``a`` occurs exactly once in ``c``,
    as a named term, a replacement output or a renaming target (``kind``),
    under a linear context or inside an argument.  Such redexes are rare in
    uniform generation."""
    if kind not in REDEX_KINDS:
        raise ValueError(f"kind must be one of {REDEX_KINDS}")
    rng = random.Random(cfg.seed)
    a = "a"
    rest = tuple(n for n in cfg.free_names if n != a) or ("b",)
    g = _Gen(dataclasses.replace(cfg, free_names=rest), rng)
    empty = frozenset()
    budget = max(cfg.max_size // 4, 2)

    def t(n=None):
        return g.term(rng.randint(1, n or budget), empty, empty)

    if kind == "Name":
        occ = Named(a, t())
    elif kind == "Comp":
        e = rng.choice(_BINDER_NAMES)
        occ = erepl(Named(e, t()), e, Stack((t(),)), a)
    else:
        e = rng.choice(_BINDER_NAMES)
        occ = eren(Named(e, t()), e, a)
    d = "k"
    if linear:
        body = Named(rng.choice(rest), Mu(d, occ)) if rng.random() < 0.5 else occ
    else:
        hole = Mu(d, occ)
        where = rng.choice(("app", "esub"))
        inner = App(t(), hole) if where == "app" else esub(t(), "w", hole)
        body = Named(rng.choice(rest), inner)
    items = tuple(t() for _ in range(rng.randint(1, 2)))
    return erepl(body, a, Stack(items), rng.choice(rest))


# -------------------------------------------------------------------- shrinking

def shrink_candidates(o):
    """Smaller objects of the same sort: same-sort descendants first, then
    stacks with an item removed."""
    seen = set()
    for c in _descendants(o):
        if c.sort == o.sort and c is not o:
            k = alpha_key(c)
            if k not in seen:
                seen.add(k)
                yield c
    yield from _fewer_items(o)


def _descendants(o):
    for c in children(o):
        yield c
        yield from _descendants(c)


def _fewer_items(o):
    for path, sub in positions(o):
        if isinstance(sub, Stack) and len(sub.items) > 1:
            for i in range(len(sub.items)):
                try:
                    yield replace_at(o, path, Stack(sub.items[:i] + sub.items[i + 1:]))
                except ValueError:
                    continue


def shrink(o, failing, limit: int = 1000):
    """Greedy shrinking: follow candidates while ``failing`` still holds."""
    for _ in range(limit):
        for c in shrink_candidates(o):
            try:
                bad = failing(c)
            except Exception:
                bad = False
            if bad:
                o = c
                break
        else:
            return o
    return o


# ----------------------------------------------------------- hypothesis support

def objects(cfg: GenConfig = GenConfig(), sort: Sort | str = Sort.TERM):
    """Hypothesis strategy drawing generator seeds."""
    from hypothesis import strategies as st
    return st.integers(min_value=0, max_value=2**63 - 1).map(
        lambda s: gen_object(cfg.with_seed(s), sort))


# -------------------------------------------------------- exhaustive pure corpus

def enumerate_pure(max_size: int, free_vars=("x", "y"), free_names=("a", "b")) -> dict:
    """All lambda-mu terms and commands of size at most ``max_size`` over the
    given free identifiers, one representative per alpha class."""
    fv, fn = tuple(free_vars), tuple(free_names)

    @lru_cache(maxsize=None)
    def terms(n, sv, sn):
        out = []
        if n == 1:
            return tuple(Var(x) for x in fv + sv)
        x = f"v{len(sv) + 1}"
        out += [Abs(x, t) for t in terms(n - 1, sv + (x,), sn)]
        a = f"d{len(sn) + 1}"
        out += [Mu(a, c) for c in commands(n - 1, sv, sn + (a,))]
        for k in range(1, n - 1):
            for f in terms(k, sv, sn):
                for u in terms(n - 1 - k, sv, sn):
                    out.append(App(f, u))
        return tuple(out)

    @lru_cache(maxsize=None)
    def commands(n, sv, sn):
        if n < 2:
            return ()
        return tuple(Named(a, t) for a in fn + sn for t in terms(n - 1, sv, sn))

    res = {Sort.TERM: [], Sort.COMMAND: []}
    for sort, fam in ((Sort.TERM, terms), (Sort.COMMAND, commands)):
        seen = set()
        for n in range(1, max_size + 1):
            for o in fam(n, (), ()):
                k = alpha_key(o)
                if k not in seen:
                    seen.add(k)
                    res[sort].append(o)
    return res


def correspondence_pairs(n_pairs: int = 2000, max_size: int = 7, seed: int = 0,
                         related_share: float = 0.5) -> list:
    """Pairs of pure objects of equal sort: a share reached by random moves of
    the lambda-mu axioms, the rest drawn independently from the corpus."""
    corpus = enumerate_pure(max_size)
    rng = random.Random(seed)
    pool = [(s, o) for s, objs in corpus.items() for o in objs]
    pairs = []
    while len(pairs) < n_pairs:
        sort, o = rng.choice(pool)
        if rng.random() < related_share:
            p = o
            for _ in range(rng.randint(1, 2)):
                ms = list(moves(p, "laurent", expand=False))
                if not ms:
                    break
                p = rng.choice(ms).after
            pairs.append((o, p))
        else:
            same = corpus[sort]
            pairs.append((o, rng.choice(same)))
    return pairs


__all__ = [
    "DEFAULT_WEIGHTS", "GenConfig", "GenerationExhausted", "REDEX_KINDS", "correspondence_pairs",
    "enumerate_pure", "gen_equiv_pair", "gen_object", "gen_objects", "gen_replacement_redex",
    "objects", "shrink",
    "shrink_candidates",
]
