import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_modal, naive_prop, prop_rows
from teamlogic.deciders import (
    Caps,
    ModalWitness,
    brute_entails_modal,
    brute_entails_prop,
    brute_sat_modal,
    brute_valid_prop,
    emdl_entails,
    emdl_sat,
    emdl_valid,
    full_team_valid,
    maxsub,
    mldisj_entails,
    mldisj_sat,
    mldisj_valid,
    qplinc_entails,
    qplinc_valid,
    qplind_entails,
    singletons_valid,
    verdict_to_json,
)
from teamlogic.errors import FragmentError, ResourceError
from teamlogic.generators import random_formula
from teamlogic.models import PropTeam, all_teams, induced_kripke
from teamlogic.parser import parse_formula as P
from teamlogic.syntax import Fragment, IDisj, free_vars
from teamlogic.teamcheck import check_modal, check_prop


def rechecks(verdict, premises, concl):
    """A false verdict's countermodel satisfies the premises and refutes the conclusion."""
    w = verdict.witness
    if isinstance(w, ModalWitness):
        sat = lambda f: check_modal(w.model, w.team, f)
    else:
        sat = lambda f: check_prop(w, f)
    return all(sat(f) for f in premises) and not sat(concl)


# ----------------------------------------------------------------- EMDL


def test_emdl_entails_examples():
    assert emdl_entails([P("=(p,q)")], P("=(p,q)")).answer
    v = emdl_entails([], P("=(p,q)"))
    assert not v.answer and rechecks(v, [], P("=(p,q)"))
    assert emdl_entails([P("=(p,q)"), P("=(q,r)")], P("=(p,r)")).answer
    assert brute_entails_prop([P("=(p,q)"), P("=(q,r)")], P("=(p,r)")).answer


def test_emdl_countermodel_is_two_rows_differing_on_q():
    v = emdl_entails([], P("=(p,q)"))
    w = v.witness
    if isinstance(w, ModalWitness):
        assert len(w.team) == 2
        a, b = sorted(w.team)
        assert (a in w.model.val.get("p", ())) == (b in w.model.val.get("p", ()))
        assert (a in w.model.val.get("q", ())) != (b in w.model.val.get("q", ()))
    else:
        assert len(w) == 2


def test_emdl_valid_and_sat_examples():
    assert emdl_valid(P("=(p,p)")).answer
    assert emdl_valid(P("p | !p")).answer
    assert not emdl_valid(P("p")).answer
    assert emdl_sat(P("[] =(p,q) & <>p & <>!p")).answer
    assert brute_sat_modal(P("[] =(p,q) & <>p & <>!p"), bound=4) is not None


def test_emdl_fragment_violation():
    with pytest.raises(FragmentError):
        emdl_entails([], P("inc(p, q)"))
    with pytest.raises(FragmentError):
        emdl_valid(P("p \\/ q"))


def test_emdl_witness_cap():
    f = P("=(p,q,r,s,t)")
    with pytest.raises(ResourceError):
        emdl_valid(f, Caps(max_dep_arity=3))
    with pytest.raises(ResourceError):
        emdl_entails([P("=(p,q,r)"), P("=(q,r,s)")], P("=(p,s)"), Caps(max_witness_tuples=100))


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_emdl_countermodels_recheck(seed):
    rng = random.Random(seed)
    prem = [random_formula(rng, Fragment.MDL, ("p", "q"), rng.randint(1, 4)) for _ in range(rng.randint(0, 2))]
    concl = random_formula(rng, Fragment.MDL, ("p", "q"), rng.randint(1, 5))
    v = emdl_entails(prem, concl)
    if not v.answer:
        assert rechecks(v, prem, concl)
        w = v.witness
        if isinstance(w, ModalWitness):
            sat = lambda f: naive_modal(w.model, frozenset(w.team), f)
        else:
            sat = lambda f: naive_prop(prop_rows(w), f)
        assert all(sat(f) for f in prem) and not sat(concl)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_valid_equals_entails_from_nothing(seed):
    rng = random.Random(seed)
    f = random_formula(rng, Fragment.EMDL, ("p", "q"), rng.randint(1, 6))
    assert emdl_valid(f).answer == emdl_entails([], f).answer
    g = random_formula(rng, Fragment.MLIDisj, ("p", "q"), rng.randint(1, 6))
    assert mldisj_valid(g).answer == mldisj_entails([], g).answer
    h = random_formula(rng, Fragment.QPLInc, ("p", "q"), rng.randint(1, 5), max_quant_depth=1)
    assert qplinc_valid(h).answer == qplinc_entails([], h).answer == brute_valid_prop(h).answer


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_emdl_sat_against_bounded_brute_force(seed):
    rng = random.Random(seed)
    f = random_formula(rng, Fragment.MDL, ("p",), rng.randint(1, 6))
    found = brute_sat_modal(f, bound=3)
    if found is not None:
        assert emdl_sat(f).answer
        assert check_modal(found.model, found.team, f) and found.team
    if not emdl_sat(f).answer:
        assert found is None


# ---------------------------------------------------------------- ML(⋁)


def test_mldisj_examples():
    assert not mldisj_valid(P("p \\/ !p")).answer
    assert mldisj_valid(P("(p | !p) \\/ q")).answer
    assert mldisj_entails([P("p")], P("p \\/ q")).answer
    assert mldisj_sat(P("(p & !p) \\/ <>q")).answer
    assert not mldisj_sat(P("(p & !p) \\/ (q & !q)")).answer


def test_mldisj_countermodel():
    v = mldisj_valid(P("p \\/ !p"))
    assert rechecks(v, [], P("p \\/ !p"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_split_law(seed):
    rng = random.Random(seed)
    sigma = [random_formula(rng, Fragment.ML, ("p", "q"), rng.randint(1, 4)) for _ in range(rng.randint(0, 2))]
    a = random_formula(rng, Fragment.MLIDisj, ("p", "q"), rng.randint(1, 4))
    b = random_formula(rng, Fragment.MLIDisj, ("p", "q"), rng.randint(1, 4))
    whole = mldisj_entails(sigma, IDisj(a, b)).answer
    assert whole == (mldisj_entails(sigma, a).answer or mldisj_entails(sigma, b).answer)


# --------------------------------------------------------------- MaxSub


def test_maxsub_examples():
    x = PropTeam.full(("p", "q"))
    assert maxsub(x, P("p")) == PropTeam(("p", "q"), frozenset({(1, 0), (1, 1)}))
    assert len(maxsub(PropTeam(("p", "q"), frozenset({(1, 0)})), P("inc(p, q)"))) == 0


def _maxsub_brute(x, f):
    best = None
    for y in all_teams(x.domain):
        if y.rows <= x.rows and naive_prop(prop_rows(y), f):
            if best is None or len(y) > len(best):
                best = y
    return best


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 15))
def test_maxsub_is_the_unique_maximum(seed, mask):
    rng = random.Random(seed)
    f = random_formula(rng, Fragment.QPLInc, ("p", "q"), rng.randint(1, 6), max_quant_depth=1)
    x = PropTeam.from_mask(("p", "q"), mask)
    y = maxsub(x, f)
    assert y == _maxsub_brute(x, f)
    assert check_prop(y, f)
    assert maxsub(y, f) == y
    assert (y == x) == check_prop(x, f)


def test_maxsub_fragment():
    with pytest.raises(FragmentError):
        maxsub(PropTeam.full(("p", "q")), P("=(p,q)"))


# ------------------------------------------------------------ QPLInc


def test_qplinc_entails_examples():
    assert qplinc_entails([P("inc(p, q)")], P("inc(p, q)")).answer
    v = qplinc_entails([], P("inc(p, q)"))
    assert not v.answer and len(v.witness) == 1 and rechecks(v, [], P("inc(p, q)"))
    assert qplinc_entails([P("inc(p q, r s)")], P("inc(p, r)")).answer
    assert brute_entails_prop([P("inc(p q, r s)")], P("inc(p, r)")).answer


def test_qplinc_valid_examples():
    assert qplinc_valid(P("inc(p, p)")).answer
    assert not qplinc_valid(P("inc(p, q)")).answer
    # the singleton p=1, q=0 refutes this one
    f = P("(p & inc(p, q)) | !p")
    assert not qplinc_valid(f).answer
    assert not brute_valid_prop(f).answer
    assert not check_prop(PropTeam(("p", "q"), frozenset({(1, 0)})), f)


def test_qplinc_domain_cap():
    with pytest.raises(ResourceError):
        qplinc_entails([], P("inc(p q, r s) | t"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_qplinc_valid_matches_singletons(seed):
    rng = random.Random(seed)
    f = random_formula(rng, Fragment.QPLInc, ("p", "q", "r"), rng.randint(1, 7))
    assert qplinc_valid(f).answer == singletons_valid(f)


# ------------------------------------------------------------ QPLInd


def test_qplind_examples():
    f = P("ind(; p; q)")
    assert qplind_entails([f], f).answer
    assert qplind_entails([P("=(p,q)")], P("ind(p; q; q)")).answer
    v = qplind_entails([], f)
    assert not v.answer and rechecks(v, [], f) and len(v.witness) == 2


# ------------------------------------------------------------ brute force


def test_brute_prop_examples():
    assert brute_entails_prop([], P("=(p) | =(p)")).answer
    assert brute_entails_prop([P("p")], P("p")).answer
    v = brute_entails_prop([], P("p \\/ !p"))
    assert not v.answer and rechecks(v, [], P("p \\/ !p"))


def test_brute_prop_cap():
    with pytest.raises(ResourceError):
        brute_valid_prop(P("p | q | r | s | t"))
    assert brute_valid_prop(P("p | !p | q | r | s"), Caps(max_domain=4)).answer
    with pytest.raises(ResourceError):
        brute_valid_prop(P("p | q | r"), Caps(max_domain=2))


def test_brute_sat_modal_examples():
    w = brute_sat_modal(P("p"))
    assert w is not None and w.model.n == 1 and w.model.val["p"] == {0}
    for bound in (1, 2, 3):
        assert brute_sat_modal(P("p & !p"), bound=bound) is None
    f = P("<>p & <>!p & [] =(p)")
    assert brute_sat_modal(f, bound=3) is None
    assert not emdl_sat(f).answer


def test_brute_entails_modal():
    assert brute_entails_modal([P("[]p")], P("[](p | q)")).answer
    v = brute_entails_modal([P("<>p")], P("[]p"))
    assert not v.answer and rechecks(v, [P("<>p")], P("[]p"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_pdl_validity_three_ways(seed):
    rng = random.Random(seed)
    f = random_formula(rng, Fragment.PDL, ("p", "q", "r"), rng.randint(1, 7))
    a = brute_valid_prop(f).answer
    assert a == full_team_valid(f)
    assert a == emdl_valid(f).answer


def test_full_team_valid_needs_downward_closure():
    with pytest.raises(FragmentError):
        full_team_valid(P("inc(p, q)"))


def test_verdict_json_shape():
    out = verdict_to_json(emdl_entails([], P("=(p,q)")))
    assert out["answer"] is False and "witness" in out and isinstance(out.get("counters", {}), dict)


def test_prop_entailment_over_induced_models():
    # on propositional formulas, team entailment equals entailment over induced models
    rng = random.Random(11)
    for _ in range(60):
        prem = [random_formula(rng, Fragment.PDL, ("p", "q"), rng.randint(1, 4))]
        concl = random_formula(rng, Fragment.PDL, ("p", "q"), rng.randint(1, 4))
        dom = tuple(sorted(free_vars(concl) | free_vars(prem[0])))
        direct = all(
            check_modal(*induced_kripke(x), concl)
            for x in all_teams(dom)
            if all(check_modal(*induced_kripke(x), f) for f in prem)
        )
        assert direct == brute_entails_prop(prem, concl).answer
