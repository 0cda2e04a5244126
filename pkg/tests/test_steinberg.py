import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from relsteinberg.oddform import identity_crossed
from relsteinberg.pairs import admissible_crossed_pair, crossed_ofasymp, ofaorth, ofasymp
from relsteinberg.rootsys import RootSystem, saturated_special_subsets
from relsteinberg.steinberg import (Context, check_commutator_expansion, check_weyl_equivariance,
                                    enumerate_relations, instance_holds, lemma_form_pres, lemma_ring_pres,
                                    product_injectivity, run_patterns, unrel_patterns, verify)


@pytest.fixture(scope="module")
def ctx_z3(ff):
    return Context(ofr=ofasymp(3, ff(3)))


@pytest.fixture(scope="module")
def ctx_orth(ff):
    return Context(ofr=ofaorth(2, ff(2)))


def test_unrel_holds(ctx_z3, ctx_orth):
    for ctx in (ctx_z3, ctx_orth):
        rep = verify(ctx, "unrel", budget=0)
        assert rep.ok, rep.failed_names()


def test_unrel_mutation_is_caught(ctx_z3):
    fam = "[X_ij(a),X_jk(b)]=X_ik(ab)"
    rep = verify(ctx_z3, "unrel", budget=0, mutate=[fam], families=[fam])
    assert rep.failed_names() == [fam]
    w = rep.failures[0]["witness"]
    assert w["lhs_value"] != w["rhs_value"]


def test_presentation_identity_crossed_module(ff):
    ctx = Context(cm=identity_crossed(ofasymp(3, ff(2))))
    assert verify(ctx, "presentation", budget=0).ok


def test_presentation_small_admissible(ff):
    cm = crossed_ofasymp(admissible_crossed_pair(ff(4), [2], [0]), 3)
    rep = verify(Context(cm=cm), "presentation", budget=200)
    assert rep.ok, rep.failed_names()


def test_commutator_expansion_and_weyl(ff):
    ctx = Context(ofr=ofasymp(2, ff(3)))
    phi = RootSystem("BC", 2)
    assert check_commutator_expansion(ctx, phi).ok
    assert check_weyl_equivariance(ctx, phi).ok


def test_product_injectivity_bc2(ff):
    ctx = Context(ofr=ofasymp(2, ff(2)))
    for sigma in saturated_special_subsets(RootSystem("BC", 2)):
        assert product_injectivity(ctx, sigma).ok


def test_lemmas(ff):
    r = ofasymp(2, ff(3))
    assert lemma_ring_pres(r).ok and lemma_form_pres(r).ok


def test_reports_ignore_worker_count(ctx_z3):
    pats = unrel_patterns(ctx_z3)
    one = run_patterns(ctx_z3, pats, "unrel", budget=300, seed=7, workers=1)
    two = run_patterns(ctx_z3, pats, "unrel", budget=300, seed=7, workers=2)
    assert one[0].to_json() == two[0].to_json()
    assert json.dumps(one[1], sort_keys=True) == json.dumps(two[1], sort_keys=True)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_streamed_instances_hold(ctx_z3, seed):
    """Any seeded sample of single relation instances evaluates to equality."""
    for inst in itertools.islice(enumerate_relations(ctx_z3, "unrel", budget=50, seed=seed), 40):
        assert instance_holds(ctx_z3, inst)
