import pytest

from relsteinberg.pairs import (FF, admissible, admissible_crossed_pair, check_crossed_pair, check_pair,
                                corrupt_pair_d, crossed_ofasymp, ofaorth, ofasymp)
from relsteinberg.oddform import check_axioms, check_crossed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ff_and_its_views_are_pairs(ff, n):
    p = ff(n)
    for q in (p, p.as_B(), p.as_C()):
        rep = check_pair(q)
        assert rep.ok, rep.failed_names()


def test_corrupted_d_is_detected_in_odd_characteristic(ff):
    rep = check_pair(corrupt_pair_d(ff(3).as_C()))
    assert not rep.ok
    assert rep.failures and all(f["name"] in rep.failed_names() for f in rep.failures)


@pytest.mark.parametrize("a,b,kind,expected", [
    ([0, 2], [0], "C", True),
    ([0, 2], [0, 2], "B", True),
    ([0, 2], [0, 1, 2, 3], "C", False),
    ([0, 1, 2, 3], [0], "C", False),
])
def test_admissible_pairs_over_z4(zmod, a, b, kind, expected):
    assert admissible(zmod(4), a, b, kind) is expected


@pytest.mark.parametrize("b", [[0], [2]])
def test_crossed_pairs_over_z4(ff, b):
    cp = admissible_crossed_pair(ff(4), [2], b)
    rep = check_crossed_pair(cp)
    assert rep.ok, rep.failed_names()
    assert cp.total.K.order == 8


def test_inadmissible_pair_is_rejected(ff):
    with pytest.raises(ValueError):
        admissible_crossed_pair(ff(4), [2], [1])


def test_small_crossed_odd_form_ring(ff):
    cm = crossed_ofasymp(admissible_crossed_pair(ff(4), [2], [2]), 2)
    assert check_crossed(cm).ok
    assert check_axioms(cm.total, budget=20_000).ok


@pytest.mark.parametrize("build", [lambda p: ofasymp(2, p), lambda p: ofaorth(1, p)])
def test_constructions_satisfy_axioms_over_z3(ff, build):
    rep = check_axioms(build(ff(3)), budget=50_000)
    assert rep.ok, rep.failed_names()
