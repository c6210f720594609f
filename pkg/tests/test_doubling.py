import pytest
from hypothesis import given, settings, strategies as st

from conftest import fn_space
from reflekt.diagram import build_diagram, find_isolated_roots
from reflekt.doubling import DoublingError, double, facet_polyhedron, orthogonalize
from reflekt.qspace import Polyhedron, QuadraticSpace, reflect
from reflekt.vinberg import finite_volume_check, run_vinberg

TRI = QuadraticSpace.diagonal(-1, 2, 1)


def quarter_count(poly, i):
    d = build_diagram(poly)
    return sum(1 for j in d.neighbors(i) if d.edge(i, j).kind == "simple" and d.edge(i, j).m == 4)


def eligible(poly):
    """Facets meeting every neighbor at pi/2, pi/4, or not at all."""
    d = build_diagram(poly)
    return [i for i in range(len(poly))
            if all(d.edge(i, j).kind != "simple" or d.edge(i, j).m == 4 for j in d.neighbors(i))]


# -- double ----------------------------------------------------------------------------

def test_double_orthogonal_only():
    p = Polyhedron(TRI, [[0, -1, 0], [0, 0, -1]])
    q = double(p, 0)
    assert [r.coords for r in q.roots] == [p.roots[1].coords]


def test_triangle_double_quadrilateral(triangle):
    # facet 3 meets facet 2 at pi/4 and facet 1 at infinity
    q = double(triangle, 2, check_volume=True)
    assert q.labels == ["1", "2", "1'", "2'"]
    d = build_diagram(q)
    assert d.edge(1, 3).kind == "none"                   # pi/4 doubled to pi/2
    assert sorted(str(k) for k in d.edges.values()) == ["bold", "dotted(sqrt(2))", "dotted(sqrt(2))"]
    assert finite_volume_check(q)
    # oracle: the images are the reflections of the originals
    f = triangle.roots[2].coords
    assert q.roots[2].coords == reflect(TRI, f, triangle.roots[0].coords)


def test_double_rejects_odd_angle(fn_polyhedra):
    p = fn_polyhedra[3]
    with pytest.raises(DoublingError) as err:
        double(p, 2)
    assert err.value.pair is not None and "pi/3" in str(err.value)


# -- orthogonalize ------------------------------------------------------------------------

def test_zero_steps(fn_polyhedra):
    tr = orthogonalize(fn_polyhedra[3], 3)
    assert tr.steps == [] and tr.final is fn_polyhedra[3] and tr.facet == 3


@pytest.mark.parametrize("p0", [1, 2])
def test_triangle_one_step(triangle, p0):
    assert quarter_count(triangle, p0) == 1
    tr = orthogonalize(triangle, p0)
    assert len(tr.steps) == 1
    assert tr.facet in find_isolated_roots(build_diagram(tr.final))


def test_f4_one_step(fn_polyhedra):
    tr = orthogonalize(fn_polyhedra[4], 5, check_volume=True)
    assert len(tr.steps) == 1 and finite_volume_check(tr.final)
    js = tr.to_json()
    assert js["facet"] == tr.facet and len(js["steps"]) == 1


def test_orthogonalize_errors(fn_polyhedra):
    with pytest.raises(DoublingError) as err:
        orthogonalize(fn_polyhedra[3], 1)
    assert err.value.stage == 0
    with pytest.raises(DoublingError) as err:
        orthogonalize(fn_polyhedra[3], 0)                 # its pi/4 neighbor meets a pi/3
    assert err.value.stage == 1


def test_two_quarter_neighbors(triangle):
    # doubling the (2,4,inf) triangle across its right-angled facet gives a (4,4,inf)
    # triangle whose first facet has two pi/4 neighbors
    q = double(triangle, 0)
    assert quarter_count(q, 0) == 2
    tr = orthogonalize(q, 0, check_volume=True)
    assert len(tr.steps) == 2
    assert tr.facet in find_isolated_roots(build_diagram(tr.final))
    assert finite_volume_check(tr.final)


# -- property suite ----------------------------------------------------------------------

def _doubling_cases():
    out = []
    for sp in (TRI, fn_space(3), fn_space(4)):
        p = run_vinberg(sp).polyhedron(sp)
        out += [(p, i) for i in eligible(p)]
        if sp is TRI:
            q = double(p, 0)
            out += [(q, i) for i in eligible(q)]
    return out


CASES = _doubling_cases()


@settings(max_examples=len(CASES) * 2)
@given(st.sampled_from(CASES))
def test_orthogonalize_properties(case):
    poly, p0 = case
    k = quarter_count(poly, p0)
    try:
        tr = orthogonalize(poly, p0)
    except DoublingError as err:
        # only allowed when a pi/4 neighbor itself meets something at an odd angle
        assert err.stage >= 1 and ("pi/3" in str(err) or "pi/6" in str(err))
        return
    assert len(tr.steps) == k
    for p, f in tr.steps + [(tr.final, None)]:
        build_diagram(p)                                     # Coxeter, or it raises
        assert p.check_acute() == []
        assert p.space == poly.space
    assert tr.facet in find_isolated_roots(build_diagram(tr.final))


@settings(max_examples=len(CASES) * 2)
@given(st.sampled_from(CASES))
def test_angle_law(case):
    poly, f = case
    try:
        q = double(poly, f)
    except DoublingError:
        return
    d0, d1 = build_diagram(poly), build_diagram(q)
    mirror = poly.roots[f].coords
    index = {r.coords: i for i, r in enumerate(q.roots)}
    for g in d0.neighbors(f):
        k = d0.edge(f, g)
        if k.kind != "simple":
            continue
        e = poly.roots[g].coords
        a, b = index[e], index[reflect(poly.space, mirror, e)]
        got = d1.edge(a, b)
        assert (2 if got.kind == "none" else got.m) == k.m // 2


# -- facet polyhedra ---------------------------------------------------------------------

def _projection_gram_matches(poly, i, sub):
    sp = poly.space
    e0 = poly.roots[i].coords
    n0 = sp.norm(e0)
    proj = {}
    for lab, r in zip(poly.labels, poly.roots):
        if lab in sub.labels:
            c = sp.inner(r.coords, e0) / n0
            proj[lab] = tuple(a - c * b for a, b in zip(r.coords, e0))
    for a, ra in zip(sub.labels, sub.roots):
        for b, rb in zip(sub.labels, sub.roots):
            assert sub.space.inner(ra.coords, rb.coords) == sp.inner(proj[a], proj[b])


def test_prism_facet(prism):
    sub = facet_polyhedron(prism, 5)
    assert sub.dim == 3 and sub.labels == ["1", "2", "3", "4"]
    _projection_gram_matches(prism, 5, sub)
    # the walls of this facet are orthogonal to e6, so they keep their norms
    assert all(r.norm == 1 for r in sub.roots)
    assert finite_volume_check(sub)


@pytest.mark.parametrize("i", [3, 4])
def test_f3_facets(fn_polyhedra, i):
    p = fn_polyhedra[3]
    sub = facet_polyhedron(p, i)
    assert sub.dim == 2 and sub.space.is_integral
    _projection_gram_matches(p, i, sub)
    assert finite_volume_check(sub)
