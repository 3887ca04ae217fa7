"""lmcalc: lambda-mu with explicit substitution, replacement and renaming.

Modules: ``syntax`` (objects, parsing, alpha), ``meta`` (implicit
operations), ``reduction`` (rules, plain forms, weight), ``typecheck``
(simple types and derivations), ``equivalence`` (structural equivalences,
expansion, bisimulation diagrams), ``proofnets`` (polarized nets,
translation, cut elimination), ``gen`` (generators) and ``properties``
(property suites)."""

from .equivalence import (
    Equivalent, NotEquivalent, Unknown, bisim_diagram, er_equiv, fexp, laurent_equiv,
    sigma_equiv,
)
from .meta import apply_stack, rename_name, replace, substitute
from .reduction import Rule, Step, fcan, lmu_steps, meaningful_steps, plain_weight, steps
from .syntax import Sort, alpha_equal, parse, parse_any, render
from .typecheck import check, infer, type_str

__version__ = "0.1.0"

__all__ = [
    "Equivalent", "NotEquivalent", "Rule", "Sort", "Step", "Unknown", "alpha_equal",
    "apply_stack", "bisim_diagram", "check", "er_equiv", "fcan", "fexp", "infer",
    "laurent_equiv", "lmu_steps", "meaningful_steps", "parse", "parse_any", "plain_weight",
    "rename_name", "render", "replace", "sigma_equiv", "steps", "substitute", "type_str",
]
