import pytest
from hypothesis import given
from hypothesis import strategies as st

from lmcalc.gen import GenConfig, objects
from lmcalc.syntax import (
    Abs, App, ERen, ERepl, ESub, InvariantError, Mu, Named, ParseError, Sort, SortError, Stack,
    Var, alpha_equal, analyze, count, erepl, eren, esub, from_json, parse, parse_any, render,
    to_json,
)

from oracles import de_bruijn, free_names, free_vars

any_sort = st.sampled_from(list(Sort))
small = GenConfig(max_size=14)


def any_object():
    return st.one_of(*(objects(small, s) for s in Sort))


# ---------------------------------------------------------------- parsing

def test_parse_application_of_abstraction():
    assert parse(r"(\x.x) y") == App(Abs("x", Var("x")), Var("y"))


def test_parse_replacement_with_two_item_stack():
    c = parse("(['a] x)['a := y0, y1 > 'g]", "command")
    assert c == ERepl(Named("a", Var("x")), "a", Stack((Var("y0"), Var("y1"))), "g")


def test_mu_abstraction_is_not_a_command():
    with pytest.raises(SortError):
        parse("mu 'a. ['a] x", "command")


def test_application_is_left_associative():
    assert parse("x y z") == App(App(Var("x"), Var("y")), Var("z"))


def test_binders_extend_to_the_right():
    assert parse(r"\x. x y") == Abs("x", App(Var("x"), Var("y")))
    assert parse("mu 'a. ['a] x y") == Mu("a", Named("a", App(Var("x"), Var("y"))))


def test_substitution_postfix_binds_to_atom():
    assert parse("x y[y := z]") == App(Var("x"), ESub(Var("y"), "y", Var("z")))


def test_renaming_postfix():
    assert parse("(['a] x)['a ~> 'b]", "command") == ERen(Named("a", Var("x")), "a", "b")


def test_stack_sort():
    assert parse("x, y z", "stack") == Stack((Var("x"), App(Var("y"), Var("z"))))


def test_parse_any_picks_the_sort():
    assert parse_any("x").sort is Sort.TERM
    assert parse_any("['a] x").sort is Sort.COMMAND
    assert parse_any("x, y").sort is Sort.STACK


@pytest.mark.parametrize("text", ["(x", r"\x x", "['a x", "x [", "mu a. ['a] x", "x)"])
def test_syntax_errors_carry_a_position(text):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.position >= 0


@pytest.mark.parametrize("text", [
    "(['a] x)['a := mu 'b. ['a] y > 'c]",
    "(['a] x)['a ~> 'a]",
    "(['a] x)['a := y > 'a]",
])
def test_literal_input_violating_binder_conditions_is_rejected(text):
    with pytest.raises(InvariantError):
        parse(text, "command")


def test_substitution_argument_capture_rejected():
    with pytest.raises(InvariantError):
        parse("x[x := x]")


# ---------------------------------------------------------------- printing

def test_render_variable():
    assert render(Var("x")) == "x"


def test_render_replacement():
    o = ERepl(Named("a", Var("x")), "a", Stack((Var("y"),)), "g")
    assert render(o) == "(['a] x)['a := y > 'g]"


def test_render_mu():
    assert render(Mu("a", Named("a", App(Var("x"), Var("y"))))) == "mu 'a. ['a] x y"


def test_render_parenthesizes_arguments():
    o = App(Var("x"), App(Var("y"), Var("z")))
    assert render(o) == "x (y z)"
    assert render(App(Abs("x", Var("x")), Var("y"))) == r"(\x. x) y"


@given(any_object())
def test_render_parse_round_trip(o):
    assert alpha_equal(parse(render(o), o.sort), o)


@given(any_object())
def test_json_round_trip(o):
    assert from_json(to_json(o)) == o


def test_json_shape():
    assert to_json(parse("x")) == {"k": "Var", "x": {"var": "x"}}
    j = to_json(parse("['a] x", "command"))
    assert j["k"] == "Named" and j["a"] == {"name": "a"}


# ------------------------------------------------------ free identifiers

def test_free_names_of_replacement():
    a = analyze(parse("(['a] x)['a := y > 'g]", "command"))
    assert a.fn == {"g"}
    assert a.fv == {"x", "y"}


def test_count_single_occurrence():
    assert count(parse("['a] x", "command"), "a") == 1


def test_free_names_of_renaming():
    assert analyze(parse("(['a] x)['a ~> 'b]", "command")).fn == {"b"}


def test_count_sees_every_occurrence_kind():
    c = parse("(['a] x (mu 'd. ['a] y))['e ~> 'a]", "command")
    assert count(c, "a") == 3


@given(any_object())
def test_free_identifiers_match_reference_definitions(o):
    assert o.fv == free_vars(o)
    assert o.fn == free_names(o)


# --------------------------------------------------------- constructors

@given(any_object())
def test_smart_constructors_keep_binder_conditions(o):
    from lmcalc.syntax import positions
    for _, sub in positions(o):
        if isinstance(sub, ESub):
            assert sub.x not in sub.arg.fv
        if isinstance(sub, ERepl):
            assert sub.a not in sub.s.fn and sub.a != sub.out
        if isinstance(sub, ERen):
            assert sub.a != sub.b


def test_esub_refreshes_instead_of_failing():
    t = esub(Var("x"), "x", Var("x"))
    assert t.x != "x" and t.body == Var(t.x)


def test_erepl_refreshes_bound_name():
    c = erepl(Named("a", Var("x")), "a", Stack((Mu("b", Named("a", Var("y"))),)), "g")
    assert c.a != "a" and c.out == "g"
    assert count(c, "a") == 1  # the occurrence in the stack stays free


def test_eren_to_same_name_is_refreshed():
    c = eren(Named("a", Var("x")), "a", "a")
    assert c.a != c.b and c.fn == {"a"}


def test_stack_must_be_nonempty():
    with pytest.raises(ValueError):
        Stack(())


# ------------------------------------------------------------------ alpha

def test_alpha_abstractions():
    assert alpha_equal(parse(r"\x.x"), parse(r"\y.y"))


def test_alpha_bound_replacement_name():
    assert alpha_equal(parse("(['g] x)['b := z > 'a]", "command"),
                       parse("(['g] x)['c := z > 'a]", "command"))


def test_free_names_are_rigid():
    assert not alpha_equal(parse("['a] x", "command"), parse("['b] x", "command"))


def test_output_name_is_not_renamed():
    assert not alpha_equal(parse("(['b] x)['b := z > 'a]", "command"),
                           parse("(['b] x)['b := z > 'c]", "command"))


def test_sorts_never_alpha_equal():
    assert not alpha_equal(parse("x"), parse("x, y", "stack"))


@given(any_object(), any_object())
def test_alpha_equality_agrees_with_nameless_form(o, p):
    assert alpha_equal(o, p) == (o.sort == p.sort and de_bruijn(o) == de_bruijn(p))


@given(any_object())
def test_alpha_equality_is_reflexive_on_renamed_copies(o):
    from oracles import refresh_all
    r = refresh_all(o)
    assert alpha_equal(o, r) and alpha_equal(r, o)
