import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relsteinberg.oddform import (check_axioms, check_crossed, check_family, check_peirce, corrupt_crossed_d,
                                  corrupt_family, corrupt_rho, identity_crossed, unitary_group)
from relsteinberg.pairs import ofaorth, ofasymp


@pytest.fixture(scope="module")
def sp4_z3(ff):
    return ofasymp(2, ff(3))


@pytest.fixture(scope="module")
def sp4_z2(ff):
    return ofasymp(2, ff(2))


def test_axioms_and_family(sp4_z3):
    assert check_axioms(sp4_z3).ok
    assert check_family(sp4_z3).ok
    assert check_peirce(sp4_z3).ok


def test_normal_form_model_agrees(ff):
    nf = ofasymp(2, ff(2), model="nf")
    assert check_axioms(nf).ok and check_family(nf).ok


def test_orthogonal_axioms(ff):
    r = ofaorth(2, ff(2))
    assert check_axioms(r).ok and check_family(r).ok


def test_corrupted_rho_fails_with_witness(sp4_z3):
    rep = check_axioms(corrupt_rho(sp4_z3))
    assert not rep.ok
    assert any(name.startswith("ρ") for name in rep.failed_names())
    assert rep.failures


def test_corrupted_family_fails(sp4_z3):
    rep = check_family(sp4_z3, corrupt_family(sp4_z3))
    assert rep.failed_names() == ["π(q±) = e±"]


def test_crossed_identity_and_its_fault(sp4_z3):
    cm = identity_crossed(sp4_z3)
    assert check_crossed(cm).ok
    bad = check_crossed(corrupt_crossed_d(cm))
    assert "p1∘d = id" in bad.failed_names()


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_unitary_group_law(sp4_z2, data):
    """Random products of root elements: associativity and inverses in U."""
    from relsteinberg.steinberg import Context

    ctx = Context(ofr=sp4_z2)
    U = ctx.U
    idx = ctx.indices
    pick = lambda: data.draw(st.sampled_from([(i, j) for i in idx for j in idx if i not in (j, -j)]))
    elems = []
    for _ in range(3):
        i, j = pick()
        S = list(ctx.S(i, j))
        elems.append(ctx.x_ij(i, j, S[data.draw(st.integers(0, len(S) - 1))]))
    a, b, c = elems
    assert np.all(U.eq(U.mul(U.mul(a, b), c), U.mul(a, U.mul(b, c))))
    assert np.all(U.eq(U.mul(a, U.inv(a)), U.one()))
