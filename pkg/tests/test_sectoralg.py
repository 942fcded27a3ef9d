from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbgkz import lattice as la
from bbgkz.ktheory import sectors
from bbgkz.sectoralg import gram_matrix, pair_in_sector

FANS = ["fine", "coarse", "local_p2", "c3_mod_3", "a1"]


def test_key_example_untwisted(fine):
    s = sectors(fine)[0]
    alg, mod = s.algebra, s.module
    assert alg.labels == ["1", "D3"]
    assert alg.d(1) == alg.d(3) * 2
    assert alg.d(2) == alg.d(3) * -3
    assert alg.d(3) * alg.d(3) == alg.zero()
    assert mod.labels == ["F[2]", "F[2,3]"]
    assert s.integral(mod.generator((2,))) == 0
    assert s.integral(alg.d(3) * mod.generator((2,))) == Fraction(1, 2)
    assert mod.generator((1, 2)) == mod.generator((2, 3)) * 2


def test_key_example_twisted(fine, coarse):
    tw = sectors(fine)[1]
    assert tw.algebra.dim == 1 and tw.module.labels == ["F[]"]
    assert tw.integral(tw.module.generator(())) == 1
    un = sectors(coarse)[0]
    assert un.module.labels == ["F[1,3]"]
    assert un.integral(un.module.generator((1, 3))) == Fraction(1, 3)


def test_local_p2_intersection_numbers(local_p2):
    s = sectors(local_p2)[0]
    alg, mod = s.algebra, s.module
    h = alg.d(1)
    assert alg.d(2) == h and alg.d(3) == h
    assert alg.d(4) == h * -3
    # the compact divisor is P^2 with normal bundle O(-3)
    assert s.integral(alg.d(4) * alg.d(4) * mod.generator((4,))) == 9
    assert s.integral(h * h * mod.generator((4,))) == 1
    assert alg.degree_dims == {0: 1, 1: 1, 2: 1, 3: 0}


@pytest.mark.parametrize("name", FANS)
def test_linear_forms_vanish(name, request):
    fan = request.getfixturevalue(name)
    for s in sectors(fan):
        q = s.quotient
        for k in range(q.quotient_rank):
            form = s.algebra.linear({i: Fraction(q.quotient_points[i][k]) for i in q.ray_labels})
            assert form == s.algebra.zero()
            for I in q.interior_simplices:
                assert form * s.module.generator(I) == s.module.zero()


@pytest.mark.parametrize("name", FANS)
def test_stanley_reisner_relations(name, request):
    fan = request.getfixturevalue(name)
    for s in sectors(fan):
        q = s.quotient
        labels = q.ray_labels
        for i in labels:
            for j in labels:
                if i < j and not q.is_simplex((i, j)):
                    assert s.algebra.d(i) * s.algebra.d(j) == s.algebra.zero()
        interior = set(q.interior_simplices)
        for I in q.interior_simplices:
            for i in labels:
                if i in I:
                    continue
                J = tuple(sorted(I + (i,)))
                expect = s.module.generator(J) if J in interior else s.module.zero()
                assert s.algebra.d(i) * s.module.generator(I) == expect


@pytest.mark.parametrize("name", FANS)
def test_poincare_duality(name, request):
    fan = request.getfixturevalue(name)
    for s in sectors(fan):
        g = gram_matrix(s)
        assert la.det(g) != 0
        assert s.module.dim == s.algebra.dim
        for J in s.quotient.maximal_simplices:
            assert s.integral(s.module.generator(J)) * s.quotient.volume(J) == 1


@pytest.mark.parametrize("name", FANS)
def test_algebra_is_commutative_and_associative(name, request):
    fan = request.getfixturevalue(name)
    for s in sectors(fan):
        B = [s.algebra.monomial(m) for m in s.algebra.basis]
        for a in B:
            for b in B:
                assert a * b == b * a
                for c in B:
                    assert (a * b) * c == a * (b * c)
                    for m in s.module.basis:
                        x = s.module.monomial(m)
                        assert (a * b) * x == a * (b * x)


coeff = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=40, deadline=None)
@given(st.lists(coeff, min_size=3, max_size=3), st.fractions(-3, 3, max_denominator=4))
def test_exp_log_and_powers(local_p2, xs, r):
    alg = sectors(local_p2)[0].algebra
    n = alg.element((Fraction(0),) + tuple(xs[:alg.dim - 1]))
    u = n.exp()
    assert u.log() == n
    assert u.rational_power(r) * u.rational_power(1 - r) == u
    assert u * u.inverse() == alg.one()
    assert (u * 3).inverse() * u == alg.one() * Fraction(1, 3)
    with pytest.raises(ValueError):
        (n + 2).log()


def test_pairing_is_bilinear(fine):
    s = sectors(fine)[0]
    a = s.algebra.one() * 2 + s.algebra.d(3)
    m = s.module.generator((2,)) * 3
    assert pair_in_sector(a, m, s.integral) == Fraction(3, 2)
