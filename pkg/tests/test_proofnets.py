from collections import Counter

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lmcalc.equivalence import fexp
from lmcalc.gen import GenConfig, gen_equiv_pair, gen_object
from lmcalc.proofnets import (
    C_AX, C_TP, CUT_RULES, MULTIPLICATIVE, SIMULATION_TABLE, Atom, Bang, InvalidDerivation, NegAtom,
    Net, Par, Tensor, Untypable, Why, canonicalize, check_net, formula_of_stacktype,
    formula_of_type, isomorphic, mnf_equiv, mnf_of, mult_normal_form, neg, net_hash, ppn_equiv,
    ppn_steps, redexes, renumber, simulate_check, translate, translate_object, well_formed,
)
from lmcalc.reduction import EXPLICIT, PLAIN, Rule, fcan, steps
from lmcalc.syntax import Sort, parse
from lmcalc.typecheck import Base, infer, parse_type

I = Atom("ι")


def P(text, sort="term"):
    return parse(text, sort)


def kinds(net):
    return Counter(x.kind for x in net.nodes.values())


def typed(seed, size=10, sort=Sort.TERM):
    return gen_object(GenConfig(seed=seed, max_size=size, require_typable=True), sort)


formulas = st.recursive(
    st.sampled_from([Atom("A"), Atom("B")]),
    lambda f: f.map(lambda o: Par(Why(neg(o)), o)) | st.tuples(f, f).map(
        lambda p: Par(Why(neg(p[0])), p[1])),
    max_leaves=6,
)


# --------------------------------------------------------------- formulas

def test_base_type():
    assert formula_of_type(Base("ι")) == I


def test_arrow_type():
    assert formula_of_type(parse_type("ι -> ι")) == Par(Why(NegAtom("ι")), I)


def test_stack_type_reads_as_curried_arguments():
    a, b, c = (parse_type(n) for n in "ABC")
    assert formula_of_stacktype((a, b), c) == formula_of_type(parse_type("A -> B -> C"))


@given(formulas)
def test_negation_is_involutive(f):
    assert neg(neg(f)) == f
    assert isinstance(neg(f), Tensor) or isinstance(neg(f), NegAtom)


def test_polarized_shapes_are_enforced():
    with pytest.raises((TypeError, ValueError)):
        Why(I)
    with pytest.raises((TypeError, ValueError)):
        Bang(NegAtom("ι"))


# ------------------------------------------------------------- translation

def test_variable_net():
    net = translate_object(P("x"))
    assert kinds(net) == Counter({"ax": 1, "der": 1})
    [a] = [w for w in net.conclusions() if not net.wires[w].distinguished]
    t = infer(P("x")).type
    assert net.wires[a].label == "x" and net.wires[a].formula == Why(neg(formula_of_type(t)))
    assert net.wires[net.distinguished()].formula == formula_of_type(t)
    assert well_formed(net)


def test_vacuous_abstraction_uses_a_weakening():
    net = translate_object(P(r"\x. y"))
    k = kinds(net)
    assert k["weak"] == 1 and k["par"] == 1


def test_different_labels_give_different_nets():
    assert not isomorphic(translate_object(P("x")), translate_object(P("y")))
    assert isomorphic(translate_object(P("x")), translate_object(P("x")))


def test_command_has_no_distinguished_conclusion():
    net = translate_object(P("['a] x", "command"))
    assert net.distinguished() is None
    assert set(net.labels()) == {"x", "'a"}


def test_translation_rejects_invalid_derivation():
    d = infer(P("x")).derivation
    d.gamma["y"] = Base("B")
    with pytest.raises(InvalidDerivation):
        translate(d)


def test_untypable_object():
    with pytest.raises(Untypable):
        translate_object(P(r"\x. x x"))


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from(list(Sort)))
def test_translations_are_well_formed_with_free_identifier_labels(seed, sort):
    o = typed(seed, sort=sort)
    net = translate_object(o)
    check_net(net)
    labels = set(net.labels())
    assert labels == set(o.fv) | {f"'{a}" for a in o.fn}


# ------------------------------------------------------------ cut elimination

def _ax_chain(k):
    """ax - cut - ax - cut - ... - ax on the atom ι: k cuts."""
    net = Net()
    prev = None
    for i in range(k + 1):
        a = net.add_node("ax")
        pos = net.add_wire(I, (a, 0))
        negw = net.add_wire(NegAtom("ι"), (a, 1))
        if prev is None:
            net.wires[negw].label = "in"
        else:
            c = net.add_node("cut")
            net.wires[prev].dst = (c, 0)
            net.wires[negw].dst = (c, 1)
        prev = pos
    net.wires[prev].label = "out"
    return net


def _single_wire():
    net = Net()
    a = net.add_node("ax")
    net.add_wire(I, (a, 0), label="out")
    net.add_wire(NegAtom("ι"), (a, 1), label="in")
    return net


@pytest.mark.parametrize("k", [1, 2, 5])
def test_axiom_chain_normalizes_to_one_wire(k):
    net, n = _ax_chain(k), 0
    check_net(net)
    while True:
        rs = ppn_steps(net, {C_AX})
        if not rs:
            break
        net = rs[0][1]
        n += 1
    assert n == k
    assert isomorphic(net, _single_wire())
    assert isomorphic(mult_normal_form(_ax_chain(k)), _single_wire())


def test_cut_free_net_is_normal():
    net = translate_object(P(r"\x. x"))
    assert redexes(net) == [] and mult_normal_form(net) is net


def test_tensor_par_cut_splits():
    net = translate_object(P(r"(\x.x) y"))
    rs = [r for r in ppn_steps(net, {C_TP})]
    assert len(rs) == 1
    assert len(rs[0][1].cuts()) == len(net.cuts()) + 1


def test_beta_redex_and_its_reduct_have_equivalent_normal_nets():
    assert mnf_equiv(P(r"(\x.x) y"), P("x[x := y]"))


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_rewrites_preserve_well_formedness(seed):
    o = typed(seed)
    net = translate_object(o)
    for _ in range(6):
        nxt = ppn_steps(net, CUT_RULES)
        if not nxt:
            break
        for rule, after in nxt:
            check_net(after)
            if rule in MULTIPLICATIVE:
                assert after.size() < net.size()
        net = nxt[0][1]


# ------------------------------------------------------- structural equivalence

def _three_uses(assoc_left):
    net = Net()
    ders = []
    for i in range(3):
        a = net.add_node("ax")
        net.add_wire(I, (a, 0), label=f"o{i}")
        w = net.add_wire(NegAtom("ι"), (a, 1))
        d = net.add_node("der")
        net.wires[w].dst = (d, 0)
        ders.append(net.add_wire(Why(NegAtom("ι")), (d, 0)))

    def contr(w0, w1, label=None):
        c = net.add_node("contr")
        net.wires[w0].dst = (c, 0)
        net.wires[w1].dst = (c, 0)
        return net.add_wire(Why(NegAtom("ι")), (c, 0), label=label)

    if assoc_left:
        contr(contr(ders[0], ders[1]), ders[2], "x")
    else:
        contr(ders[0], contr(ders[1], ders[2]), "x")
    return net


def test_contraction_reassociation():
    left, right = _three_uses(True), _three_uses(False)
    check_net(left), check_net(right)
    assert not isomorphic(left, right)
    assert ppn_equiv(left, right)


def test_net_equivalent_to_itself():
    net = translate_object(P(PEIRCE := r"\x. mu 'a. ['a] (x (\y. mu 'd. ['a] y))"))
    assert ppn_equiv(net, net)


def test_theta_pair_nets():
    o, p = P(r"mu 'a. ['a] \x. x"), P(r"\x. x")
    ty = ({}, {}, parse_type("ι -> ι"))
    assert ppn_equiv(mult_normal_form(translate_object(o, ty)),
                     mult_normal_form(translate_object(p, ty)))


def test_equivalence_respects_atoms_unless_asked():
    n1 = translate_object(P("x"), ({"x": Base("A")}, {}, None))
    n2 = translate_object(P("x"), ({"x": Base("B")}, {}, None))
    assert not ppn_equiv(n1, n2)
    assert ppn_equiv(n1, n2, up_to_atoms=True)
    assert ppn_equiv(n1, n2, up_to_instance=True)


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(list(Sort)))
def test_canonicalization_is_idempotent(seed, sort):
    net = translate_object(typed(seed, sort=sort))
    c = canonicalize(net)
    assert isomorphic(canonicalize(c), c)
    assert ppn_equiv(net, c) and ppn_equiv(c, net)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_equivalence_is_symmetric(s1, s2):
    n1, n2 = mnf_of(typed(s1, 8)), mnf_of(typed(s2, 8))
    assert ppn_equiv(n1, n2) == ppn_equiv(n2, n1)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_hash_is_invariant_under_renumbering(seed):
    net = translate_object(typed(seed))
    assert net_hash(net) == net_hash(renumber(net))


def test_exports_are_stable():
    o = P(r"\x. mu 'a. ['a] (x (\y. mu 'd. ['a] y))")
    a, b = renumber(translate_object(o)), renumber(translate_object(o))
    assert a.to_json() == b.to_json() and a.to_dot() == b.to_dot()
    assert a.to_dot().startswith("digraph net {")
    assert "cluster_" in a.to_dot() and "doublecircle" in a.to_dot()


# ----------------------------------------------------------------- simulation

def test_dm_step_needs_no_cut():
    o = P("(mu 'a.['a] x) y")
    [st_] = steps(o, {Rule.dM})
    rep = simulate_check(o, st_)
    assert rep.ok and rep.sequence == []


def test_db_step_uses_multiplicative_cuts():
    o = P(r"(\x.x) y")
    [st_] = steps(o, {Rule.dB})
    rep = simulate_check(o, st_)
    assert rep.ok and rep.sequence and set(rep.sequence) <= {C_AX, C_TP}


def test_simulation_table_rule_classes():
    for r in (Rule.dM, Rule.N, Rule.C, Rule.W):
        assert SIMULATION_TABLE[r] == frozenset()
    assert SIMULATION_TABLE[Rule.dB] == {C_AX, C_TP}
    assert set(SIMULATION_TABLE) == set(EXPLICIT)


def test_simulation_of_untypable_object():
    o = P(r"(\x. x x) y")
    [st_] = steps(o, {Rule.dB})
    with pytest.raises(Untypable):
        simulate_check(o, st_)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_simulation_on_small_typed_objects(seed):
    o = typed(seed, 8)
    assume(translate_object(o).size() <= 30)
    for st_ in steps(o, EXPLICIT):
        rep = simulate_check(o, st_)
        assert rep.ok, (str(o), st_.rule, rep.reason)
        assert set(rep.sequence) <= SIMULATION_TABLE[st_.rule]
        if st_.rule in PLAIN:
            assert mnf_equiv(o, st_.after)


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(list(Sort)))
def test_normal_nets_invariant_under_fcan_and_fexp(seed, sort):
    o = typed(seed, 10, sort)
    assert mnf_equiv(o, fcan(o))
    assert mnf_equiv(o, fexp(o))


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from(list(Sort)))
def test_sigma_soundness(seed, sort):
    cfg = GenConfig(seed=seed, max_size=10, require_typable=True)
    o, p, _ = gen_equiv_pair(cfg, 3, sort)
    assert mnf_equiv(o, p)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_er_soundness(seed):
    cfg = GenConfig(seed=seed, max_size=10, require_typable=True)
    o, p, _ = gen_equiv_pair(cfg, 2, Sort.COMMAND, relation="er")
    assert mnf_equiv(o, p)
