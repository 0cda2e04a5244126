import numpy as np
from hypothesis import given, settings, strategies as st

from relsteinberg.rings import FiniteRing, fiber_product


@given(st.integers(2, 9), st.data())
@settings(max_examples=40, deadline=None)
def test_zmod_tables_match_integer_arithmetic(n, data):
    K = FiniteRing.zmod(n)
    a, b, c = (data.draw(st.integers(0, n - 1)) for _ in range(3))
    assert K.add[a, b] == (a + b) % n
    assert K.mul[a, b] == (a * b) % n
    assert K.mul[a, K.add[b, c]] == K.add[K.mul[a, b], K.mul[a, c]]
    assert K.one == 1 % n


@given(st.integers(2, 12))
def test_generated_subgroup_is_multiples_of_gcd(n):
    K = FiniteRing.zmod(n)
    for g in range(n):
        assert sorted(K.generated([g])) == list(range(0, n, int(np.gcd(g, n))))


def test_ideals_of_z4():
    K = FiniteRing.zmod(4)
    assert K.is_ideal([0, 2])
    assert not K.is_ideal([0, 1])


def test_fiber_product_size():
    K = FiniteRing.zmod(4)
    P = fiber_product(K, [0, 2])
    assert P.order == 8
