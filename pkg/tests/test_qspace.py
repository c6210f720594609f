from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from reflekt.exact import ExactMatrix, ExactScalar, ONE, ZERO, scalar, vec
from reflekt.qspace import (Polyhedron, QuadraticSpace, is_crystallographic_root, reflect,
                            reflection_matrix, rescale_to_integral)

S = ExactScalar.sqrt


def test_signature_checked():
    assert QuadraticSpace.diagonal(-1, 2, 1).signature == (2, 1)
    with pytest.raises(ValueError):
        QuadraticSpace.diagonal(1, 1, 1)
    with pytest.raises(ValueError):
        QuadraticSpace([[0, 1], [2, 0]])


def test_inner_examples(prism):
    std = QuadraticSpace.diagonal(-1, 1, 1)
    assert std.inner((1, 0, 0), (1, 0, 0)) == -1
    e4, e5, e6 = (prism.roots[i].coords for i in (3, 4, 5))
    assert prism.space.inner(e4, e4) == 1                     # 1/4 + 1/2 + 1/4
    assert prism.space.inner(e5, e6) == -S(Fraction(8, 7))
    with pytest.raises(ValueError):
        std.inner((1, 0), (1, 0, 0))


def test_reflect_examples(prism):
    sp = prism.space
    e5, e6 = prism.roots[4].coords, prism.roots[5].coords
    assert reflect(sp, e6, e6) == tuple(-x for x in e6)
    e1 = prism.roots[0].coords
    assert sp.inner(e1, e6) == 0 and reflect(sp, e1, e6) == e6
    r = reflect(sp, e5, e6)
    assert sp.norm(r) == 1 and sp.inner(r, e5) == S(Fraction(8, 7))
    with pytest.raises(ValueError):
        reflect(QuadraticSpace.diagonal(-1, 1, 1), (1, 1, 0), (0, 0, 1))


def test_crystallographic_examples(omega):
    tri = QuadraticSpace.diagonal(-1, 2, 1)
    assert is_crystallographic_root(tri, (0, 1, 0))
    assert is_crystallographic_root(tri, (0, 0, 1))
    assert is_crystallographic_root(tri, (1, 1, 1))             # norm 2, 2(e,b_i)/2 = -1, 2, 1
    space, roots, _ = omega
    assert is_crystallographic_root(space, (0, 1, 2, 1, 0))
    with pytest.raises(ValueError):
        is_crystallographic_root(tri, (0, 2, 0))
    with pytest.raises(ValueError):
        is_crystallographic_root(tri, (1, 0, 0))
    assert not is_crystallographic_root(QuadraticSpace.diagonal(-1, 3, 1), (1, 1, 1))


def test_rescale_examples(omega):
    space, _, data = omega
    printed = ExactMatrix(data["printed_inverse_gram"]["matrix"]) * scalar(data["printed_inverse_gram"]["scale"])
    integral, c = rescale_to_integral(printed)
    assert integral.matrix == space.matrix and c == Fraction(-256, 7)
    # the inverse of G(V) is +7/256 M; either sign rescales to the same form
    integral2, c2 = rescale_to_integral(printed * -1)
    assert integral2.matrix == space.matrix and c2 == Fraction(256, 7)
    same, one = rescale_to_integral(QuadraticSpace.diagonal(-1, 2, 1))
    assert one == 1 and same.matrix == QuadraticSpace.diagonal(-1, 2, 1).matrix
    _, two = rescale_to_integral(ExactMatrix.diag([scalar("-1/2"), scalar("1/2"), scalar("1/2")]))
    assert two == 2
    with pytest.raises(ValueError):
        rescale_to_integral([[0, 0], [0, 0]])


def test_polyhedron_json_roundtrip(prism):
    back = Polyhedron.from_json(prism.to_json())
    assert back.space == prism.space
    assert [r.coords for r in back.roots] == [r.coords for r in prism.roots]
    assert prism.dim == 4 and prism.check_acute() == []


# -- properties -------------------------------------------------------------------

small = st.integers(-4, 4)
FORMS = [QuadraticSpace.diagonal(-1, 2, 1), QuadraticSpace.diagonal(-2, 1, 1, 1),
         QuadraticSpace([[0, 0, 49], [0, 49, 7], [49, 7, 3]])]


@st.composite
def form_and_vectors(draw):
    sp = draw(st.sampled_from(FORMS))
    vs = [tuple(draw(small) for _ in range(sp.dim)) for _ in range(3)]
    return sp, vs


@given(form_and_vectors())
def test_reflection_involution_and_isometry(data):
    sp, (e, x, y) = data
    if sp.norm(e) == 0:
        return
    rx, ry = reflect(sp, e, x), reflect(sp, e, y)
    assert reflect(sp, e, rx) == vec(x)
    assert sp.inner(rx, ry) == sp.inner(x, y)


@given(form_and_vectors())
def test_crystallographic_implies_integer_matrix(data):
    sp, (e, _, _) = data
    from math import gcd
    if not any(e) or gcd(*e) != 1 or sp.norm(e).sign() <= 0:
        return
    if is_crystallographic_root(sp, e):
        assert reflection_matrix(sp, e).is_integer()
