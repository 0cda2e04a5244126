import itertools

import pytest
from hypothesis import given, settings, strategies as st

from relsteinberg.rootsys import (RootSubset, RootSystem, extreme_roots, parse_roots, quotient,
                                  saturate, saturated_special_subsets, subsystem)

SIZES = {("BC", 1): 4, ("BC", 2): 12, ("BC", 3): 24, ("B", 3): 18, ("C", 3): 18, ("F", 4): 48}


@pytest.mark.parametrize("kind,rank", sorted(SIZES))
def test_root_counts(kind, rank):
    phi = RootSystem(kind, rank)
    assert len(phi) == SIZES[kind, rank]
    assert all((-r).coords in phi for r in phi)
    assert len(phi.positive()) * 2 == len(phi)


def test_f4_length_classes():
    phi = RootSystem("F", 4)
    norms = sorted({r.norm2 for r in phi})
    assert norms == [4, 8]
    assert sum(r.norm2 == 4 for r in phi) == 24


def test_saturation_halves_doubles():
    phi = RootSystem("BC", 1)
    assert saturate(phi, [(4,)]).members == {(2,), (4,)}


def test_bc2_saturated_special_count():
    subs = saturated_special_subsets(RootSystem("BC", 2))
    assert len(subs) == 33
    for s in subs:
        assert s.saturated and s.special
        if len(s):
            assert extreme_roots(s)


def test_removing_an_extreme_root_keeps_saturated_special():
    for s in saturated_special_subsets(RootSystem("BC", 2)):
        for a in extreme_roots(s) if len(s) else []:
            rest = s.minus(saturate(s.ambient, [a]))
            assert rest.saturated and rest.special


def test_quotient_example():
    phi = RootSystem("BC", 3)
    psi = subsystem(phi, [(0, -2, 2)])
    q = quotient(phi, psi)
    assert q.classes == [[1], [2, 3]]
    assert q.quotientSystem.kind == "BC" and q.quotientSystem.rank == 2
    assert len(q.projection) == 22


@given(st.sampled_from(sorted(SIZES)), st.data())
@settings(max_examples=30, deadline=None)
def test_serialization_round_trip(kr, data):
    phi = RootSystem(*kr)
    picked = data.draw(st.lists(st.sampled_from(phi.roots), min_size=1, max_size=8, unique=True))
    phi2, back = parse_roots(phi.serialize(picked))
    assert (phi2.kind, phi2.rank) == kr
    assert back == phi.sorted(picked)


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_saturate_is_a_closure(data):
    phi = RootSystem("BC", 3)
    X = data.draw(st.lists(st.sampled_from(phi.roots), max_size=4))
    s = saturate(phi, X)
    assert s.closed and s.saturated
    assert saturate(phi, s).members == s.members
    assert all(x.coords in s for x in X)


def test_parse_rejects_non_roots():
    with pytest.raises(ValueError):
        parse_roots("BC 2 : 2 6")
