"""Property suites over generated instances, shared by ``lm fuzz`` and the
acceptance tests.  Each suite maps a case payload to a ``CaseResult``."""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .equivalence import (
    Equivalent, NotEquivalent, Unknown, bisim_diagram, fexp, laurent_equiv, replay,
    sigma_equiv,
)
from .gen import (
    REDEX_KINDS, GenConfig, GenerationExhausted, correspondence_pairs, gen_equiv_pair, gen_object,
    gen_replacement_redex,
)
from .proofnets import mnf_equiv, simulate_check, translate_object
from .reduction import EXPLICIT, PLAIN, fcan, plain_weight, steps
from .syntax import Sort, alpha_key, parse, render
from .typecheck import subject_expansion_check, subject_step_check, typable

PASS, FAIL, UNKNOWN, SKIP = "pass", "fail", "unknown", "skip"
_SORTS = (Sort.TERM, Sort.COMMAND, Sort.STACK)


@dataclass
class CaseResult:
    status: str
    subject: str = ""
    detail: str = ""
    sort: str = ""


@dataclass
class SuiteResult:
    suite: str
    results: list = field(default_factory=list)
    seconds: float = 0.0

    def count(self, status: str) -> int:
        return sum(r.status == status for r in self.results)

    @property
    def cases(self) -> int:
        return sum(r.status != SKIP for r in self.results)

    @property
    def failures(self) -> list:
        return [r for r in self.results if r.status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "cases": self.cases,
                "pass": self.count(PASS), "fail": self.count(FAIL),
                "unknown": self.count(UNKNOWN), "skip": self.count(SKIP),
                "seconds": round(self.seconds, 3),
                "failures": [{"subject": f.subject, "sort": f.sort, "detail": f.detail}
                             for f in self.failures]}


def _sort_for(seed: int) -> Sort:
    return _SORTS[seed % 3]


# ------------------------------------------------------------------ case checks

def weight_obj(o) -> CaseResult:
    w = plain_weight(o)
    for st in steps(o, PLAIN):
        if plain_weight(st.after) >= w:
            return CaseResult(FAIL, render(o), f"{st.rule} at {list(st.path)} does not decrease",
                              o.sort.value)
    return CaseResult(PASS, render(o), sort=o.sort.value)


def weight_case(seed: int, max_size: int = 40) -> CaseResult:
    return weight_obj(gen_object(GenConfig(seed=seed, max_size=max_size), _sort_for(seed)))


def unique_nf_obj(o, strategies: int = 20, seed: int = 0) -> CaseResult:
    ref = alpha_key(fcan(o))
    for i in range(strategies):
        if alpha_key(fcan(o, rng=random.Random(seed * 1000 + i))) != ref:
            return CaseResult(FAIL, render(o), f"strategy {i} reaches another normal form",
                              o.sort.value)
    return CaseResult(PASS, render(o), sort=o.sort.value)


def unique_nf_case(seed: int, max_size: int = 20, strategies: int = 20) -> CaseResult:
    o = gen_object(GenConfig(seed=seed, max_size=max_size), _sort_for(seed))
    return unique_nf_obj(o, strategies, seed)


def bisim_case(seed: int, max_size: int = 25, k: int = 3, budget: int = 50_000,
               expand_depth: int = 1) -> CaseResult:
    sort = _sort_for(seed)
    rng = random.Random(seed)
    o, p, witness = gen_equiv_pair(GenConfig(seed=seed, max_size=max_size),
                                   rng.randint(1, k), sort)
    subject = f"{render(o)}  ~  {render(p)}"
    if not replay(witness, o, p):
        return CaseResult(FAIL, subject, "generated witness does not replay", sort.value)
    rep = bisim_diagram(o, p, budget, expand_depth=expand_depth, check_premise=False)
    if rep.ok:
        return CaseResult(PASS, subject, sort=sort.value)
    if all(f.reason == "unknown" for f in rep.failures):
        return CaseResult(UNKNOWN, subject, "equivalence search hit its budget", sort.value)
    f = next(f for f in rep.failures if f.reason != "unknown")
    return CaseResult(FAIL, subject, f"{f.side} {f.step.rule} step to {render(f.step.after)} "
                      "has no partner", sort.value)


def _typable_object(seed: int, max_size: int, plain: bool = False):
    sort = _sort_for(seed)
    cfg = GenConfig(seed=seed, max_size=max_size, require_typable=True, require_plain=plain)
    return gen_object(cfg, sort), sort


def _typed_instance(seed: int, max_size: int):
    """Every fourth case is a targeted replacement redex (cycling through the
    occurrence kinds, linear and not); the others come from ``gen_object``."""
    if seed % 4 != 3:
        return _typable_object(seed, max_size)
    kind = REDEX_KINDS[(seed // 4) % 3]
    linear = (seed // 12) % 2 == 1
    for i in range(200):
        o = gen_replacement_redex(GenConfig(seed=seed * 1000 + i, max_size=max_size),
                                  kind, linear)
        if typable(o):
            return o, Sort.COMMAND
    raise GenerationExhausted(f"no typable {kind} redex")


def subject_obj(o) -> CaseResult:
    for st in steps(o, EXPLICIT):
        if not subject_step_check(o, st):
            return CaseResult(FAIL, render(o), f"{st.rule} reduct loses the typing",
                              o.sort.value)
        if st.rule in PLAIN and not subject_expansion_check(st):
            return CaseResult(FAIL, render(o), f"{st.rule} redex not typable at reduct typing",
                              o.sort.value)
    return CaseResult(PASS, render(o), sort=o.sort.value)


def subject_case(seed: int, max_size: int = 14) -> CaseResult:
    try:
        o, _ = _typed_instance(seed, max_size)
    except GenerationExhausted:
        return CaseResult(SKIP)
    return subject_obj(o)


def simulation_obj(o, max_nodes: int = 30) -> CaseResult:
    sort = o.sort.value
    if not typable(o):
        return CaseResult(SKIP, render(o), "untypable", sort)
    if translate_object(o).size() > max_nodes:
        return CaseResult(SKIP, render(o), "net too large", sort)
    for st in steps(o, EXPLICIT):
        rep = simulate_check(o, st)
        if not rep.ok:
            return CaseResult(FAIL, render(o), f"{st.rule} at {list(st.path)}: {rep.reason}",
                              sort)
        if st.rule in PLAIN and not mnf_equiv(o, st.after):
            return CaseResult(FAIL, render(o), f"{st.rule} step changes the normal net", sort)
    for label, other in (("fcan", fcan(o)), ("fexp", fexp(o))):
        if not mnf_equiv(o, other):
            return CaseResult(FAIL, render(o), f"{label} changes the normal net", sort)
    return CaseResult(PASS, render(o), sort=sort)


def simulation_case(seed: int, max_size: int = 10, max_nodes: int = 30) -> CaseResult:
    try:
        o, _ = _typed_instance(seed, max_size)
    except GenerationExhausted:
        return CaseResult(SKIP)
    return simulation_obj(o, max_nodes)


def soundness_case(seed: int, max_size: int = 10, k: int = 3) -> CaseResult:
    sort = _sort_for(seed)
    cfg = GenConfig(seed=seed, max_size=max_size, require_typable=True)
    try:
        o, p, _ = gen_equiv_pair(cfg, random.Random(seed).randint(1, k), sort)
    except GenerationExhausted:
        return CaseResult(SKIP)
    subject = f"{render(o)}  ~  {render(p)}"
    try:
        same = mnf_equiv(o, p)
    except Exception as e:  # the related side must type as well
        return CaseResult(FAIL, subject, f"{type(e).__name__}: {e}", sort.value)
    return CaseResult(PASS if same else FAIL, subject,
                      "" if same else "normal nets differ", sort.value)


def correspondence_case(pair: tuple, budget: int = 50_000) -> CaseResult:
    sort, left, right = pair
    o, p = parse(left, sort), parse(right, sort)
    subject = f"{left}  ~  {right}"
    lv = laurent_equiv(o, p, budget)
    sv = sigma_equiv(fcan(o), fcan(p), budget, with_ren=True)
    if isinstance(lv, Unknown) or isinstance(sv, Unknown):
        return CaseResult(UNKNOWN, subject, f"laurent={_tag(lv)} er={_tag(sv)}", sort)
    if isinstance(lv, Equivalent) != isinstance(sv, Equivalent):
        return CaseResult(FAIL, subject, f"laurent={_tag(lv)} er={_tag(sv)}", sort)
    return CaseResult(PASS, subject, _tag(lv), sort)


def _tag(v) -> str:
    return {Equivalent: "equivalent", NotEquivalent: "not-equivalent",
            Unknown: "unknown"}[type(v)]


# ---------------------------------------------------------------------- driver

def _seed_cases(seed: int, n: int) -> list:
    return list(range(seed, seed + n))


def _pair_cases(seed: int, n: int) -> list:
    return [(o.sort.value, render(o), render(p))
            for o, p in correspondence_pairs(n, max_size=7, seed=seed)]


SUITES = {
    "weight": (weight_case, _seed_cases),
    "unique-nf": (unique_nf_case, _seed_cases),
    "bisim": (bisim_case, _seed_cases),
    "subject": (subject_case, _seed_cases),
    "simulation": (simulation_case, _seed_cases),
    "soundness": (soundness_case, _seed_cases),
    "correspondence": (correspondence_case, _pair_cases),
}


def _run_chunk(args) -> list:
    name, chunk, opts = args
    check = SUITES[name][0]
    return [check(c, **opts) for c in chunk]


def run_suite(name: str, seed: int = 0, n: int = 100, workers: int = 1, **opts) -> SuiteResult:
    """Run ``n`` cases of suite ``name``; keyword options go to the case check."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    check, cases_of = SUITES[name]
    cases = cases_of(seed, n)
    t0 = time.perf_counter()
    if workers <= 1:
        results = [check(c, **opts) for c in cases]
    else:
        size = max(1, -(-len(cases) // (workers * 4)))
        chunks = [(name, cases[i:i + size], opts) for i in range(0, len(cases), size)]
        with ProcessPoolExecutor(workers) as ex:
            results = [r for part in ex.map(_run_chunk, chunks) for r in part]
    return SuiteResult(name, results, time.perf_counter() - t0)


__all__ = [
    "CaseResult", "FAIL", "PASS", "SKIP", "SUITES", "SuiteResult", "UNKNOWN",
    "bisim_case", "correspondence_case", "run_suite", "simulation_case", "simulation_obj",
    "soundness_case", "subject_case", "subject_obj", "unique_nf_case", "unique_nf_obj",
    "weight_case", "weight_obj",
]
