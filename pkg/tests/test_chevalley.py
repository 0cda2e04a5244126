import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relsteinberg.chevalley import (DL_FAMILIES, Dispatcher, PairOps, derive_structure_constants,
                                    span_roots, subsystem_type, verify_dl, vrep, _dims, _string_p)
from relsteinberg.rootsys import RootSystem

SYSTEMS = [("B", 2), ("C", 2), ("B", 3), ("C", 3), ("F", 4)]


def _sum(a, b):
    return tuple(x + y for x, y in zip(a, b))


@pytest.fixture(scope="module", params=SYSTEMS, ids=lambda kr: f"{kr[0]}{kr[1]}")
def phi_sc(request):
    phi = RootSystem(*request.param)
    return phi, derive_structure_constants(phi)


def test_structure_constant_identities(phi_sc):
    phi, sc = phi_sc
    for (a, b), n in sc.N.items():
        assert abs(n) == _string_p(phi, a, b) + 1
        assert sc.N[(b, a)] == -n
        assert sc.N[(tuple(-x for x in a), tuple(-x for x in b))] == -n
    for a, b in sc.extraspecial:
        assert sc.N[(a, b)] > 0


def test_cyclic_rule(phi_sc):
    phi, sc = phi_sc
    norm = lambda r: sum(x * x for x in r)
    for (a, b), n in sc.N.items():
        c = tuple(-x for x in _sum(a, b))
        if (b, c) in sc.N:
            assert n * norm(a) == sc.N[(b, c)] * norm(c)


def test_only_nonzero_pairs_are_tabulated(phi_sc):
    phi, sc = phi_sc
    keys = {(a.coords, b.coords) for a, b in itertools.product(phi.roots, repeat=2)
            if _sum(a.coords, b.coords) in phi}
    assert set(sc.N) == keys


@pytest.mark.parametrize("kind", ["B", "C"])
@pytest.mark.parametrize("n", [2, 3])
def test_verify_dl_rank2(ff, kind, n):
    rep = verify_dl(RootSystem(kind, 2), ff(n), budget=0)
    assert rep.ok, rep.failed_names()


@pytest.mark.parametrize("kind", ["B", "C"])
def test_sign_calibration_is_consistent(ff, kind):
    phi = RootSystem(kind, 3)
    pair = ff(3).as_B() if kind == "B" else ff(3).as_C()
    disp = Dispatcher(phi, derive_structure_constants(phi), PairOps(pair), pair=pair)
    assert disp._global.inconsistencies == 0


def test_flipped_sign_is_caught(ff):
    phi = RootSystem("C", 3)
    sc = derive_structure_constants(phi)
    rep = verify_dl(phi, ff(3), budget=0, sc=sc.flipped(*sc.extraspecial[0]))
    assert not rep.ok
    assert rep.failures[0]["witness"]


def test_relation_mutation_is_caught(ff):
    rep = verify_dl(RootSystem("B", 2), ff(3), budget=0, mutate=DL_FAMILIES)
    assert not rep.ok


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_f4_three_dimensional_spans(data):
    """Every rank three root span of F4 is of type A1xA2, B3 or C3."""
    phi = RootSystem("F", 4)
    roots = data.draw(st.lists(st.sampled_from([r.coords for r in phi.roots]), min_size=3, max_size=3))
    span = span_roots(phi, roots)
    if _dims(span) == 3:
        assert subsystem_type(span) in ("A1xA2", "B3", "C3")


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_nilpotent_v_law_is_respected_by_the_oracle(ff, data):
    phi = RootSystem("C", 3)
    sc = derive_structure_constants(phi)
    pair = ff(3).as_C()
    ops = PairOps(pair)
    disp = Dispatcher(phi, sc, ops, pair=pair)
    shapes = [vrep(phi, sc, a.coords, b.coords) for a in phi.roots for b in phi.roots]
    shapes = [V for V in shapes if V is not None]
    V = data.draw(st.sampled_from(shapes))
    draw = lambda: tuple(np.array([data.draw(st.integers(0, 2))]) for _ in V.sorts)
    u, v = draw(), draw()
    emb = disp._global
    lhs = emb.evaluate(V.iota(u) + V.iota(v))
    rhs = emb.evaluate(V.iota(V.add(ops, u, v)))
    assert np.all(emb.G.eq(lhs, rhs))
