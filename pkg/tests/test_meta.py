import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lmcalc.gen import GenConfig, objects
from lmcalc.meta import PreconditionError, apply_stack, rename_name, replace, substitute
from lmcalc.syntax import (
    App, Sort, Stack, Var, alpha_equal, count, parse,
)

from oracles import naive_rename, naive_replace_pure, naive_subst, refresh_all

cfg = GenConfig(max_size=14)
pure = GenConfig(max_size=12, pure=True)


def P(text, sort="term"):
    return parse(text, sort)


def S(text):
    return parse(text, "stack")


def any_object(c=cfg):
    return st.one_of(*(objects(c, s) for s in Sort))


# ----------------------------------------------------------- substitution

def test_substitution_into_mu_application():
    o = P(r"(mu 'a.['a]x) (\z. z x)")
    r = substitute(o, "x", P(r"\w.w"))
    assert alpha_equal(r, P(r"(mu 'a.['a](\w.w)) (\z. z (\w.w))"))


def test_substitution_of_absent_variable():
    assert substitute(P("y"), "x", P(r"\w.w")) == P("y")


def test_substitution_refreshes_capturing_binder():
    r = substitute(P(r"\y. x"), "x", P("y"))
    assert alpha_equal(r, P(r"\y1. y"))
    assert r.x != "y"


def test_substitution_refreshes_capturing_name_binder():
    r = substitute(P("mu 'a. ['b] x"), "x", P("mu 'c. ['a] y"))
    assert alpha_equal(r, P("mu 'e. ['b] mu 'c. ['a] y"))


@given(any_object(), st.sampled_from(["x", "y", "z"]), objects(GenConfig(max_size=6)))
def test_substitution_matches_capture_free_reference(o, x, u):
    fresh = refresh_all(o)
    assert alpha_equal(substitute(o, x, u), naive_subst(fresh, x, u))


@given(any_object(), objects(GenConfig(max_size=6)))
def test_substituting_absent_variable_is_identity(o, u):
    assume("q" not in o.fv)
    assert alpha_equal(substitute(o, "q", u), o)


@given(any_object(), objects(GenConfig(max_size=6)))
def test_substitution_free_variables(o, u):
    assume("x" in o.fv)
    assert substitute(o, "x", u).fv == (o.fv - {"x"}) | u.fv


# ------------------------------------------------------------ replacement

def test_replacement_of_named_term():
    r = replace(P("['a] x", "command"), "a", S("y0, y1"), "g")
    assert r == P("['g] x y0 y1", "command")


def test_replacement_extends_explicit_replacement_stack():
    r = replace(P("(['a] x)['b := z0 > 'a]", "command"), "a", S("y0"), "g")
    assert alpha_equal(r, P("(['g] x y0)['b := z0, y0 > 'g]", "command"))


def test_replacement_blocked_by_renaming():
    r = replace(P("(['a] x)['b ~> 'a]", "command"), "a", S("y0, y1"), "g")
    assert alpha_equal(r, P("((['g] x y0 y1)['b := y0, y1 > 'g1])['g1 ~> 'g]", "command"))


def test_replacement_preconditions():
    with pytest.raises(PreconditionError):
        replace(P("['a] x", "command"), "a", S("mu 'b. ['a] y"), "g")
    with pytest.raises(PreconditionError):
        replace(P("['a] x", "command"), "a", S("y"), "a")


@given(any_object(pure), st.sampled_from(["a", "b"]), objects(GenConfig(max_size=5), Sort.STACK))
def test_replacement_matches_reference_on_lambda_mu(o, a, s):
    assume(a not in s.fn)
    fresh = refresh_all(o)
    expected = naive_replace_pure(fresh, a, s.items, "out")
    assert alpha_equal(replace(o, a, s, "out"), expected)


@given(any_object(), objects(GenConfig(max_size=5), Sort.STACK), st.data())
def test_replacement_free_names(o, s, data):
    candidates = sorted(o.fn - s.fn)
    assume(candidates)
    a = data.draw(st.sampled_from(candidates))
    r = replace(o, a, s, "g")
    assert count(r, a) == 0
    assert r.fn == (o.fn - {a}) | s.fn | {"g"}


@given(any_object(), objects(GenConfig(max_size=5), Sort.STACK))
def test_replacing_absent_name_is_identity(o, s):
    assume("q" not in o.fn and "q" not in s.fn)
    assert alpha_equal(replace(o, "q", s, "g"), o)


@given(any_object(), objects(GenConfig(max_size=5), Sort.STACK))
def test_replacement_keeps_sort(o, s):
    assume("a" not in s.fn)
    assert replace(o, "a", s, "g").sort == o.sort


@pytest.mark.parametrize("text,sort,expected", [
    (r"\x. mu 'd. ['a] x", "term", r"\x. mu 'd. ['g] x y"),
    ("(mu 'd. ['a] x) (mu 'e. ['a] z)", "term", "(mu 'd. ['g] x y) (mu 'e. ['g] z y)"),
    ("(mu 'd. ['a] x)[w := mu 'e. ['a] z]", "term",
     "(mu 'd. ['g] x y)[w := mu 'e. ['g] z y]"),
    ("z, mu 'd. ['a] x", "stack", "z, mu 'd. ['g] x y"),
])
def test_replacement_is_structural(text, sort, expected):
    assert alpha_equal(replace(P(text, sort), "a", S("y"), "g"), P(expected, sort))


# ---------------------------------------------------------------- renaming

def test_renaming_named_command():
    assert rename_name(P("['a] x", "command"), "a", "b") == P("['b] x", "command")


def test_renaming_replacement_output():
    r = rename_name(P("(['c] x)['d := y > 'a]", "command"), "a", "b")
    assert alpha_equal(r, P("(['c] x)['d := y > 'b]", "command"))


def test_renaming_absent_name():
    assert rename_name(P("['c] x", "command"), "a", "b") == P("['c] x", "command")


def test_renaming_avoids_capture():
    r = rename_name(P("mu 'b. ['a] x", "term"), "a", "b")
    assert alpha_equal(r, P("mu 'c. ['b] x"))


@given(any_object(), st.sampled_from(["a", "b", "c"]))
def test_renaming_matches_reference(o, a):
    fresh = refresh_all(o)
    assert alpha_equal(rename_name(o, a, "z9"), naive_rename(fresh, a, "z9"))


@given(any_object())
def test_renaming_absent_name_is_identity(o):
    assume("q" not in o.fn)
    assert alpha_equal(rename_name(o, "q", "r"), o)


# ----------------------------------------------------------- stack application

def test_apply_two_item_stack():
    assert apply_stack(Var("x"), S("y0, y1")) == App(App(Var("x"), Var("y0")), Var("y1"))


def test_apply_single_item_stack():
    assert apply_stack(Var("x"), Stack((Var("y"),))) == P("x y")


@given(objects(GenConfig(max_size=5), Sort.STACK), objects(GenConfig(max_size=5), Sort.STACK))
def test_stack_application_associates(s1, s2):
    t = Var("x")
    assert apply_stack(apply_stack(t, s1), s2) == apply_stack(t, s1 + s2)
