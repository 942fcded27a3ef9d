import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbgkz import lattice as la
from bbgkz.errors import BadGorenstein, InputError, NonSimplicial, NotCovering, NotProjective
from bbgkz.fans import (box_of_cone, check_weights, dual_covectors, fan_from_json,
                        interior_simplices, lattice_points, require_gamma_ready, signed_volume,
                        simplex_volume, star_quotient, validate_fan)


def brute_box(fan, J):
    """Lattice points sum g_j v_j with 0 <= g_j < 1, by scanning a bounding box."""
    V = np.array([fan.v(j) for j in J], dtype=float).T
    Vinv = np.linalg.inv(V)
    lo = [min(0, *(fan.v(j)[k] for j in J)) * len(J) for k in range(fan.rank)]
    hi = [max(0, *(fan.v(j)[k] for j in J)) * len(J) for k in range(fan.rank)]
    out = set()
    for p in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        g = Vinv @ np.array(p, dtype=float)
        if np.all(g > -1e-9) and np.all(g < 1 - 1e-9):
            out.add(tuple(p))
    return out


def test_key_example_box(fine, coarse):
    assert [b.gamma for b in fine.box] == [(0, 0), (2, 1)]
    tw = fine.box[1]
    assert tw.sigma == (2, 3) and tw.frac == {2: Fraction(1, 2), 3: Fraction(1, 2)}
    assert [b.gamma for b in coarse.box] == [(0, 0), (1, 1), (2, 1)]
    assert coarse.box[1].frac == {1: Fraction(2, 3), 3: Fraction(1, 3)}


@pytest.mark.parametrize("name", ["fine", "coarse", "local_p2", "c3_mod_3", "a1"])
def test_box_size_is_volume(name, request):
    fan = request.getfixturevalue(name)
    for J in fan.max_simplices:
        elems = box_of_cone(fan, J)
        assert len(elems) == simplex_volume(fan, J) == abs(signed_volume(fan, J))
        assert {b.gamma for b in elems} == brute_box(fan, J)
        for b in elems:
            recon = [sum(f * fan.v(i)[k] for i, f in b.fractional_coords) for k in range(fan.rank)]
            assert tuple(recon) == b.gamma
            assert all(0 < f < 1 for _, f in b.fractional_coords)


@pytest.mark.parametrize("name", ["fine", "coarse", "local_p2", "c3_mod_3"])
def test_dual_covectors(name, request):
    fan = request.getfixturevalue(name)
    for J in fan.max_simplices:
        u = dual_covectors(fan, J)
        for i in J:
            assert [la.dot(u[i], fan.v(j)) for j in J] == [int(i == j) for j in J]


def test_interior_simplices(fine, coarse, local_p2):
    assert interior_simplices(fine) == [(2,), (1, 2), (2, 3)]
    assert interior_simplices(coarse) == [(1, 3)]
    assert interior_simplices(local_p2) == [(4,), (1, 4), (2, 4), (3, 4), (1, 2, 4), (1, 3, 4), (2, 3, 4)]


def test_star_quotient_ranks(fine, coarse):
    q0 = star_quotient(fine, fine.box[0])
    assert q0.quotient_rank == 2 and q0.box_order == 1 and q0.maximal_simplices == ((1, 2), (2, 3))
    q1 = star_quotient(fine, fine.box[1])
    assert q1.quotient_rank == 0 and q1.box_order == 2 and q1.interior_simplices == ((),)
    assert star_quotient(coarse, coarse.box[2]).box_order == 3


def test_weights_and_degree(fine, coarse, local_p2):
    for fan in (fine, coarse, local_p2):
        assert fan.is_projective and not check_weights(fan, fan.weights)
        assert fan.is_gorenstein
        assert all(fan.degree(fan.v(i)) == 1 for i in range(1, fan.n + 1))
    assert fine.gorenstein_degree == (0, 1)


def test_lattice_points(fine):
    assert lattice_points(fine, 1) == [(0, 1), (1, 1), (2, 1), (3, 1)]
    assert len(lattice_points(fine, 2)) == 7
    assert lattice_points(fine, 0) == [(0, 0)]


def test_json_roundtrip(fine):
    again = fan_from_json(fine.to_json())
    assert again == fine


def test_extra_keys_ignored(fine_doc):
    doc = dict(fine_doc, comment="ignored")
    assert fan_from_json(doc).points == ((0, 1), (1, 1), (3, 1))


@pytest.mark.parametrize("doc, exc", [
    ({"rank": 2, "points": [[0, 1], [1, 1]], "max_simplices": [[1, 2, 1]]}, InputError),
    ({"rank": 2, "points": [[0, 1], [0, 2]], "max_simplices": [[1, 2]]}, NonSimplicial),
    ({"rank": 2, "points": [[0, 1], [1, 1], [3, 1]], "max_simplices": [[1, 2]]}, NotCovering),
    ({"rank": 2, "points": [[0, 1], [1, 1], [3, 1]], "max_simplices": [[1, 2], [1, 3]]}, NotCovering),
    ({"rank": 2, "points": [[0, 1], [1.5, 1]], "max_simplices": [[1, 2]]}, InputError),
    ({"rank": 2, "points": [[0, 1], [1, 1], [3, 1]], "max_simplices": [[1, 2], [2, 4]]}, InputError),
    ({"rank": 2, "points": [[0, 1], [1, 1]]}, InputError),
])
def test_validation_errors(doc, exc):
    with pytest.raises(exc):
        fan_from_json(doc)


def test_bad_weights(fine_doc):
    with pytest.raises(NotProjective):
        fan_from_json(dict(fine_doc, weights=[0, 1, 0]))
    assert fan_from_json(dict(fine_doc, weights=["1/2", 0, 0])).weights == (Fraction(1, 2), 0, 0)


def test_non_gorenstein_rejected_only_on_request():
    fan = validate_fan(2, [[2, 1], [1, 2]], [[1, 2]])
    assert not fan.is_gorenstein
    with pytest.raises(BadGorenstein):
        require_gamma_ready(fan)
    with pytest.raises(BadGorenstein):
        validate_fan(2, [[2, 1], [1, 2]], [[1, 2]], require_gorenstein=True)


def test_non_projective_subdivision_detected():
    # a classic non-regular triangulation of a height-one triangle
    pts = [[0, 0, 1], [4, 0, 1], [0, 4, 1], [1, 1, 1], [2, 1, 1], [1, 2, 1]]
    sims = [[1, 2, 5], [2, 3, 6], [3, 1, 4], [1, 4, 5], [2, 5, 6], [3, 6, 4], [4, 5, 6]]
    fan = validate_fan(3, pts, sims)
    assert fan.weights is None and not fan.is_projective
    with pytest.raises(NotProjective):
        require_gamma_ready(fan)


# --- integer linear algebra ----------------------------------------------

small = st.integers(-6, 6)


@settings(max_examples=60)
@given(st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r))))
def test_smith_normal_form(a):
    U, D, W = la.smith_normal_form(a)
    assert la.matmul(la.matmul(U, a), W) == D
    assert abs(la.det(U)) == 1 and abs(la.det(W)) == 1
    diag = [D[k][k] for k in range(min(len(D), len(D[0])))]
    assert all(x >= 0 for x in diag)
    for x, y in zip(diag, diag[1:]):
        assert (y == 0) if x == 0 else y % x == 0
    off = [D[i][j] for i in range(len(D)) for j in range(len(D[0])) if i != j]
    assert not any(off)


@settings(max_examples=60)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=3))
def test_integer_kernel(a):
    ker = la.integer_kernel(a)
    assert len(ker) == 4 - la.rank(a)
    for k in ker:
        assert all(x == 0 for x in la.matvec(a, k))
    if ker:
        # a lattice basis of the saturated kernel has coprime maximal minors
        U, D, W = la.smith_normal_form(ker)
        assert all(D[i][i] == 1 for i in range(len(ker)))


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_and_det(a):
    d = la.det(a)
    assert d == round(np.linalg.det(np.array(a, dtype=float)))
    if d:
        assert la.matmul(a, la.inverse(a)) == la.identity(3)
