import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamlogic.adqbf import AdqbfInstance, Block, FnApp, FnDecl, evaluate_adqbf, parse_matrix, random_instance
from teamlogic.deciders import brute_entails_prop, brute_sat_modal, brute_valid_prop, emdl_sat, emdl_valid, qplinc_entails
from teamlogic.errors import ReductionError
from teamlogic.generators import random_formula
from teamlogic.models import PropTeam, all_teams
from teamlogic.parser import parse_formula as P
from teamlogic.parser import render
from teamlogic.reductions import (
    adqbf_pi2_to_pdl_entailment,
    adqbf_sigma1_complement_to_qplinc_entailment,
    adqbf_to_qplind_validity,
    branch_formula,
    inclusion_to_independence,
    is_prenex,
    prenex,
    qpdl_to_mdl,
    split_prefix,
    store_formula,
    tree_formula,
)
from teamlogic.syntax import (
    And,
    Atom,
    Box,
    Dep,
    Diamond,
    Exists,
    Forall,
    Fragment,
    Incl,
    Indep,
    NegAtom,
    Or,
    all_vars,
    classify,
    free_vars,
    node_count,
    walk,
)
from teamlogic.teamcheck import check_prop

p, q = Atom("p"), Atom("q")


def equivalent(f, g):
    return brute_entails_prop([f], g).answer and brute_entails_prop([g], f).answer


# ----------------------------------------------------------------- prenex


def test_prenex_examples():
    f = P("E p . p & =(q)")
    assert prenex(f) == f
    g = prenex(P("(E p . p) & q"))
    assert isinstance(g, Exists) and is_prenex(g)
    assert equivalent(g, P("(E p . p) & q"))
    h = prenex(P("(E p . p & q) | (E p . !p & q)"))
    pre, _ = split_prefix(h)
    assert [k for k, _ in pre] == [Exists, Exists]
    assert len({v for _, v in pre}) == 2
    assert equivalent(h, P("(E p . p & q) | (E p . !p & q)"))


def test_prenex_universal_under_split():
    src = P("(A p . p | !p) | =(q)")
    out = prenex(src)
    assert is_prenex(out)
    assert [k for k, _ in split_prefix(out)[0]] == [Exists, Forall]
    assert equivalent(src, out)


def test_prenex_rejects_modal_input():
    with pytest.raises(ReductionError):
        prenex(P("<>p"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_prenex_is_equivalent(seed):
    rng = random.Random(seed)
    frag = rng.choice([Fragment.QPL, Fragment.QPDL, Fragment.QPLInc])
    f = random_formula(rng, frag, ("p", "q"), rng.randint(2, 7), max_quant_depth=2)
    g = prenex(f)
    assert is_prenex(g)
    assert free_vars(g) == free_vars(f)
    assert equivalent(f, g)


# ------------------------------------------------------------ tree encoding


def test_store_and_branch_examples():
    assert store_formula("q", 0) == Or(And(q, q), And(NegAtom("q"), NegAtom("q")))
    assert store_formula("q", 1) == Or(And(q, Box(q)), And(NegAtom("q"), Box(NegAtom("q"))))
    b = branch_formula("p", 0)
    assert b == And(And(Diamond(p), Diamond(NegAtom("p"))), Box(store_formula("p", 0)))
    with pytest.raises(ValueError):
        store_formula("q", -1)


def test_tree_formula_errors():
    with pytest.raises(ReductionError):
        tree_formula(["p"], ["p"], 1)
    with pytest.raises(ReductionError):
        tree_formula([], ["p"], 2)


def test_tree_formula_is_ml_with_polynomial_size():
    for n in range(0, 6):
        for k in range(0, 4):
            V = [f"v{i}" for i in range(k)]
            ps = [f"x{i}" for i in range(n)]
            if not V and not ps:
                continue
            f = tree_formula(V, ps, n)
            assert classify(f) in (Fragment.ML, Fragment.PL)
            assert node_count(f) <= 8 * (k + 1) * (n + 1) + 6 * n * n


def test_qpdl_to_mdl_examples():
    out = qpdl_to_mdl("valid", [P("A p . =(p)")])
    assert not emdl_valid(out.conclusion).answer
    assert not brute_valid_prop(P("A p . =(p)")).answer

    out = qpdl_to_mdl("sat", [P("E p . p & =(p)")])
    assert emdl_sat(out.conclusion).answer
    assert brute_sat_modal(out.conclusion, bound=3) is not None

    out = qpdl_to_mdl("entail", [q], [P("A p . q")])
    assert brute_entails_prop([P("A p . q")], q).answer
    from teamlogic.deciders import emdl_entails

    assert emdl_entails(out.premises, out.conclusion).answer


def test_qpdl_to_mdl_shapes():
    out = qpdl_to_mdl("entail", [P("E p . p")], [P("A p . A q . p | q")])
    assert out.fresh["x"] == ["x#1", "x#2"]
    for f in out.formulas():
        assert classify(f) in (Fragment.ML, Fragment.MDL, Fragment.PL, Fragment.PDL)
    assert not any(isinstance(g, (Exists, Forall)) for f in out.formulas() for g in walk(f))
    with pytest.raises(ReductionError):
        qpdl_to_mdl("sat", [P("inc(p, q)")])
    with pytest.raises(ReductionError):
        qpdl_to_mdl("sat", [p], [q])
    with pytest.raises(ValueError):
        qpdl_to_mdl("count", [p])


# --------------------------------------------------------------- ADQBF


def _copy_instance():
    blocks = (Block("A", (FnDecl("f", ("p1",)),)), Block("E", (FnDecl("g", ("p1",)),)))
    return AdqbfInstance(blocks, 1, parse_matrix("(f(p1) & g(p1)) | (!f(p1) & !g(p1))"))


def test_pi2_to_pdl_example():
    inst = _copy_instance()
    assert evaluate_adqbf(inst)
    red = adqbf_pi2_to_pdl_entailment(inst)
    q1, q2 = red.fresh["q"]
    assert red.premises == (Dep((Atom("p1"),), Atom(q1)),)
    theta = P(f"({q1} & {q2}) | (!{q1} & !{q2})")
    assert red.conclusion == Or(theta, Dep((Atom("p1"),), Atom(q2)))
    assert brute_entails_prop(red.premises, red.conclusion).answer


def test_pi2_tautology_matrix():
    blocks = (Block("A", (FnDecl("f", ()),)), Block("E", (FnDecl("g", ("p1",)),)))
    inst = AdqbfInstance(blocks, 1, parse_matrix("p1 | !p1"))
    red = adqbf_pi2_to_pdl_entailment(inst)
    assert evaluate_adqbf(inst)
    assert brute_entails_prop(red.premises, red.conclusion).answer


def test_pi2_shape_mismatch():
    inst = random_instance(1, "sigma1", n=1, fn_count=1)
    for red in (adqbf_pi2_to_pdl_entailment, adqbf_to_qplind_validity):
        with pytest.raises(ReductionError):
            red(inst)
    with pytest.raises(ReductionError):
        adqbf_sigma1_complement_to_qplinc_entailment(_copy_instance())


def test_qplind_without_universal_block():
    # an empty ∀-block leaves only θ ∨ dep-part
    blocks = (Block("A", ()), Block("E", (FnDecl("g", ("p1",)),)))
    inst = AdqbfInstance(blocks, 1, parse_matrix("g(p1) | p1"))
    red = adqbf_to_qplind_validity(inst)
    (q1,) = red.fresh["q"]
    assert red.conclusion == Or(Or(Atom(q1), Atom("p1")), Indep(("p1",), (q1,), (q1,)))
    assert red.fresh["r"] == []


def test_qplind_one_universal_block_shape():
    red = adqbf_to_qplind_validity(_copy_instance(), translate_inclusions=False)
    f = red.conclusion
    assert isinstance(f, Exists) and f.var == red.fresh["r"][0]
    parts = []
    body = f.body
    while isinstance(body, And):
        parts.append(body.right)
        body = body.left
    parts.append(body)
    assert len(parts) == 4
    assert sum(isinstance(g, Exists) for g in walk(f)) == 1
    incs = [g for g in walk(f) if isinstance(g, Incl)]
    assert len(incs) == 1 and incs[0].left[0] == "p1" and incs[0].right[0] == "p1"
    assert not any(isinstance(g, Dep) for g in walk(f))


def test_qplind_translated_is_pure_independence():
    red = adqbf_to_qplind_validity(_copy_instance())
    assert not any(isinstance(g, (Incl, Dep)) for g in walk(red.conclusion))
    assert classify(red.conclusion) == Fragment.QPLInd
    assert red.fresh["v"] and red.fresh["r_inc"]


def _sigma1(matrix):
    return AdqbfInstance((Block("E", (FnDecl("g", ("p1",)),)),), 1, parse_matrix(matrix))


def test_sigma1_examples():
    inst = _sigma1("g(p1)")
    assert evaluate_adqbf(inst)
    red = adqbf_sigma1_complement_to_qplinc_entailment(inst)
    assert not qplinc_entails(red.premises, red.conclusion).answer
    assert not brute_entails_prop(red.premises, red.conclusion).answer

    inst = _sigma1("g(p1) & !g(p1)")
    assert not evaluate_adqbf(inst)
    red = adqbf_sigma1_complement_to_qplinc_entailment(inst)
    assert qplinc_entails(red.premises, red.conclusion).answer
    assert brute_entails_prop(red.premises, red.conclusion).answer


def test_sigma1_negated_matrix_is_renamed():
    red = adqbf_sigma1_complement_to_qplinc_entailment(_sigma1("p1 | g(p1)"))
    (pp,), (qp,) = red.fresh["p'"], red.fresh["q'"]
    first = red.conclusion
    while isinstance(first, Or):
        first = first.left
    while isinstance(first, Exists):
        first = first.body
    assert first.left == And(NegAtom(pp), NegAtom(qp))
    assert first.right == Incl((pp, qp), ("p1", red.fresh["q"][0]))


def test_sigma1_premises():
    red = adqbf_sigma1_complement_to_qplinc_entailment(_sigma1("g(p1)"))
    (t,), (f,) = red.fresh["t"], red.fresh["f"]
    assert red.premises[0] == And(Atom(t), NegAtom(f))
    assert red.premises[1] == And(Incl((t,), ("p1",)), Incl((f,), ("p1",)))


# ------------------------------------------------- inclusion as independence


def test_inclusion_translation_exhaustive_pq():
    g = inclusion_to_independence(("p",), ("q",))
    f = Incl(("p",), ("q",))
    for x in all_teams(("p", "q")):
        assert check_prop(x, f) == check_prop(x, g)


def test_inclusion_translation_singletons():
    g = inclusion_to_independence(("p",), ("q",))
    for a in (0, 1):
        for b in (0, 1):
            assert check_prop(PropTeam(("p", "q"), frozenset({(a, b)})), g) == (a == b)


def test_inclusion_translation_quantifies_three_variables():
    g = inclusion_to_independence(("p",), ("q",))
    bound = []
    while isinstance(g, Forall):
        bound.append(g.var)
        g = g.body
    assert bound == ["v#1", "v#2", "r#1"]
    assert not any(isinstance(h, (Exists, Forall)) for h in walk(g))


def test_inclusion_translation_length_mismatch():
    with pytest.raises(ReductionError):
        inclusion_to_independence(("p", "q"), ("q",))


# ---------------------------------------------------------------- freshness


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["pi2", "sigma1"]))
def test_fresh_variables_never_collide(seed, shape):
    inst = random_instance(seed, shape, n=2, fn_count=2, max_arity=1, matrix_size=4)
    outs = [adqbf_sigma1_complement_to_qplinc_entailment(inst)] if shape == "sigma1" else [
        adqbf_pi2_to_pdl_entailment(inst),
        adqbf_to_qplind_validity(inst),
    ]
    source = set(inst.universals) | {fn.name for fn in inst.functions}
    for out in outs:
        introduced = [v for vs in out.fresh.values() for v in vs]
        assert len(introduced) == len(set(introduced))
        assert not set(introduced) & source
        assert all("#" in v for v in introduced)
        used = set().union(*(all_vars(f) for f in out.formulas()))
        assert used <= source | set(introduced)


def test_qpdl_fresh_names_avoid_source():
    f = P("A x#1 . x#1 | q")
    out = qpdl_to_mdl("valid", [f])
    assert "x#1" not in out.fresh["x"]
    assert "q" in out.source_vars


def test_reduction_output_serialization():
    out = adqbf_pi2_to_pdl_entailment(_copy_instance())
    doc = out.to_json()
    assert doc["kind"] == "pi2-to-pdl" and doc["source_vars"] == ["p1"]
    assert [P(s) for s in doc["premises"]] == list(out.premises)
    assert P(doc["conclusion"]) == out.conclusion
    assert out.sigma_text() == render(out.premises[0]) + "\n"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_pi2_truth_transfer(seed):
    inst = random_instance(seed, "pi2", n=1, fn_count=2, max_arity=1, matrix_size=4)
    red = adqbf_pi2_to_pdl_entailment(inst)
    assert brute_entails_prop(red.premises, red.conclusion).answer == evaluate_adqbf(inst)


def test_fnapp_kept_out_of_outputs():
    red = adqbf_to_qplind_validity(_copy_instance())
    assert not any(isinstance(g, FnApp) for g in walk(red.conclusion))
