import re
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fn_space
from reflekt import packing
from reflekt.diagram import build_diagram, find_clusters
from reflekt.exact import ExactMatrix, ExactScalar, ONE, ZERO, scalar
from reflekt.io import fixture, parse_matrix
from reflekt.packing import (InversiveFrame, InversiveSphere, OrbitRecord, audit_disjoint, bend_orbit,
                             conjugated_generators, find_bend_congruence, gram_of_orbit, integrality_scan,
                             inversive_frame, inversive_product, orbit, render_svg, superpacking)
from reflekt.qspace import QuadraticSpace, reflect

S = ExactScalar.sqrt
PACK = fixture("prism_packing")
GENS = [parse_matrix(m) for m in PACK["conjugated_generators"]]
SPLIT = QuadraticSpace([[0, "-1/2", 0, 0], ["-1/2", 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def frame_is_standard(frame: InversiveFrame, space) -> bool:
    g = frame.gram(space)
    n = len(g)
    want = [[ZERO] * n for _ in range(n)]
    want[0][1] = want[1][0] = scalar(-2)
    for i in range(2, n):
        want[i][i] = ONE
    return g == want


def cluster_orbit(poly, depth, which=0):
    cl = find_clusters(build_diagram(poly))[which]
    roots = [r.coords for r in poly.roots]
    return orbit([roots[i] for i in cl.cluster], [roots[i] for i in cl.cocluster], poly.space, depth)


# -- frames -----------------------------------------------------------------------------

def test_split_form_frame():
    fr = inversive_frame(SPLIT)
    assert frame_is_standard(fr, SPLIT)
    assert fr.b == (ZERO, ONE, ZERO, ZERO) and fr.bhat == (ONE, ZERO, ZERO, ZERO)
    # bend zero: the "center" is a unit normal
    sph = fr.apply((5, 0, 1, 0))
    assert sph.bend == 0 and sph.center() is None and sph.unit_normal() == (ONE, ZERO)
    assert sph.self_product() == 1


@pytest.mark.parametrize("space", [fn_space(3), fn_space(5), QuadraticSpace.diagonal(-1, 2, 1)],
                         ids=["f3", "f5", "tri"])
def test_general_frames(space):
    assert frame_is_standard(inversive_frame(space), space)


def test_prism_frame(prism):
    fr = inversive_frame(prism.space)
    assert frame_is_standard(fr, prism.space)
    sph = [fr.apply(r.coords) for r in prism.roots]
    for i, j in combinations(range(6), 2):
        assert inversive_product(sph[i], sph[j]) == prism.space.inner(prism.roots[i].coords, prism.roots[j].coords)
    assert all(s.self_product() == 1 for s in sph)
    back = InversiveFrame.from_json(fr.to_json())
    assert back == fr


def test_rational_isotropic_frame(fn_polyhedra):
    sp = fn_space(3)
    fr = inversive_frame(sp)
    assert all(x.is_rational() for x in fr.b) and frame_is_standard(fr, sp)
    # with a rational b the f3 packing is integral after one common rescale
    rep = integrality_scan(cluster_orbit(fn_polyhedra[3], 4))
    assert rep.integral and rep.rescale == S(2)
    # x^2 = 3(y^2 + z^2) has no rational zero (3-adically), so the orthonormal frame is kept
    odd = QuadraticSpace.diagonal(-1, 3, 3)
    assert packing._rational_isotropic(odd.matrix.inverse()) is None
    fr = inversive_frame(odd)
    assert frame_is_standard(fr, odd) and not all(x.is_rational() for x in fr.b)


def test_frame_error_outside_radicals():
    with pytest.raises(packing.FrameError):
        inversive_frame(QuadraticSpace.diagonal(-1, 1 + S(2), 1))     # needs sqrt(sqrt2 - 1)


# -- orbits ---------------------------------------------------------------------------------

def test_depth_zero(prism):
    rec = orbit([prism.roots[5].coords], [r.coords for r in prism.roots[:5]], prism.space, 0)
    assert len(rec) == 1 and rec[0].word == () and rec[0].depth == 0


def test_prism_orbit_contains_v(prism, prism_V):
    rec = orbit([prism.roots[5].coords], [r.coords for r in prism.roots[:5]], prism.space, 3)
    labels = [[prism.labels[i] for i in r.word] for r in rec]
    assert labels == [[], ["5"], ["5", "4"], ["5", "4", "2"], ["5", "4", "3"]]
    assert [r.root for r in rec] == list(prism_V)
    assert audit_disjoint(rec) == []


def test_orbit_rejects_bad_partition(prism):
    with pytest.raises(ValueError):
        orbit([prism.roots[4].coords], [r.coords for r in prism.roots[:4]], prism.space, 1)
    with pytest.raises(ValueError):
        orbit([prism.roots[5].coords], [], prism.space, -1)


def test_orbit_workers_deterministic(monkeypatch, prism):
    base = superpacking(prism, [5], 3)
    monkeypatch.setenv("REFLEKT_WORKERS", "3")
    assert superpacking(prism, [5], 3) == base


@settings(max_examples=15)
@given(st.permutations(range(5)))
def test_orbit_generator_order_irrelevant(perm):
    from reflekt import suite
    p = suite.prism()
    gens = [p.roots[i].coords for i in range(5)]
    keys = lambda rec: {(r.depth, packing._dedup_key(r.root)) for r in rec}
    a = orbit([p.roots[5].coords], gens, p.space, 4)
    b = orbit([p.roots[5].coords], [gens[i] for i in perm], p.space, 4)
    assert keys(a) == keys(b)
    assert packing._dedup_key(packing._dedup_key(a[3].root)) == packing._dedup_key(a[3].root)


# -- the prism packing data ------------------------------------------------------------------

def test_gram_of_orbit(prism, prism_V):
    printed = parse_matrix(PACK["gram_V"]["matrix"]) * scalar(PACK["gram_V"]["scale"])
    assert gram_of_orbit(prism_V, prism.space) == printed
    assert gram_of_orbit([prism_V[0]], prism.space) == ExactMatrix([[1]])
    perm = [2, 0, 4, 1, 3]
    g = gram_of_orbit([prism_V[i] for i in perm], prism.space)
    assert g == ExactMatrix([[printed[i, j] for j in perm] for i in perm])


def test_conjugated_generators(prism, prism_V):
    got = conjugated_generators(prism_V, [r.coords for r in prism.roots[:5]], prism.space)
    assert got == GENS
    swap = ExactMatrix([[0, 1, 0, 0, 0], [1, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]])
    assert got[4] == swap


def test_conjugation_by_identity():
    sp = fn_space(3)
    ident = [tuple(int(i == j) for j in range(4)) for i in range(4)]
    e = (0, 1, -1, 0)
    (r,) = conjugated_generators(ident, [e], sp)
    assert [tuple(row) for row in r.rows] == [reflect(sp, e, b) for b in ident]
    with pytest.raises(ValueError):
        conjugated_generators([ident[0], ident[0], ident[2], ident[3]], [e], sp)


def test_bend_orbit_prism():
    first = bend_orbit(PACK["initial_bends"], [GENS[0]], 1)
    assert first[1] == (1, 1, 1, 5, 5)
    # oracle: the matrix-vector product done by hand on the printed rows
    row4 = [Fraction(9, 4), Fraction(9, 4), Fraction(3, 2), Fraction(-1, 4), Fraction(-3, 4)]
    assert sum(row4) == 5
    full = bend_orbit(PACK["initial_bends"], GENS, 5)
    assert all(x.denominator == 1 and x >= 0 for v in full for x in v)
    c, m = PACK["congruence"]["coefficients"], PACK["congruence"]["modulus"]
    assert all(sum(a * b for a, b in zip(c, v)) % m == 0 for v in full)


def test_bend_orbit_identity():
    assert bend_orbit([1, 2, 3], [ExactMatrix.identity(3)], 4) == [(1, 2, 3)]


def test_congruence_search():
    assert find_bend_congruence(GENS, PACK["initial_bends"], 4) == ((1, 1, 2, 3, 1), 4)
    assert find_bend_congruence([ExactMatrix.identity(3)], [2, 1, 1], 4) == ((1, 0, 0), 2)
    sl2 = [[[1, 1], [0, 1]], [[1, 0], [1, 1]]]
    assert find_bend_congruence(sl2, [1, 0], 4) is None


def test_integrality(prism):
    rec = orbit([prism.roots[5].coords], [r.coords for r in prism.roots[:5]], prism.space, 5)
    rep = integrality_scan(rec)
    assert rep.integral and rep.rescale == S(Fraction(8, 7))
    assert all((r.sphere.bend / rep.rescale).is_integer() for r in rec)
    sup = integrality_scan(superpacking(prism, [5], 5))
    assert not sup.integral and not sup.witness[1].is_integer()


def test_integrality_degenerate():
    flat = [OrbitRecord((), InversiveSphere(ZERO, ZERO, (ONE, ZERO)), (), 0)]
    rep = integrality_scan(flat)
    assert rep.integral and rep.rescale == 1


# -- SVG ------------------------------------------------------------------------------------

def circles(svg):
    return [tuple(float(x) for x in m) for m in re.findall(r'<circle cx="([^"]+)" cy="([^"]+)" r="([^"]+)"/>', svg)]


def test_svg_unit_circle():
    svg = render_svg([InversiveSphere(ONE, scalar(-1), (ZERO, ZERO))])
    assert circles(svg) == [(0.0, 0.0, 1.0)]
    assert svg.startswith("<?xml") and 'version="1.1"' in svg


def test_svg_tangent_circles():
    a = InversiveSphere(ONE, ZERO, (ONE, ZERO))
    b = InversiveSphere(ONE, ZERO, (scalar(-1), ZERO))
    assert inversive_product(a, b) == -1
    (x1, y1, r1), (x2, y2, r2) = circles(render_svg([a, b]))
    assert abs(((x1 - x2) ** 2 + (y1 - y2) ** 2) ** 0.5 - (r1 + r2)) < 1e-12


def test_svg_line_and_errors():
    svg = render_svg([InversiveSphere(ZERO, ZERO, (ZERO, ONE))])
    assert '<line x1="-2" y1="0" x2="2" y2="0"/>' in svg
    with pytest.raises(ValueError):
        render_svg([InversiveSphere(ONE, scalar(-1), (ZERO, ZERO, ZERO))])


def test_svg_f3_orbit(fn_polyhedra):
    rec = cluster_orbit(fn_polyhedra[3], 4)
    assert audit_disjoint(rec) == []
    svg = render_svg(rec, viewport=(-3, -3, 3, 3))
    assert svg == render_svg(rec, viewport=(-3, -3, 3, 3))
    assert svg.count("<circle") + svg.count("<line") >= 1


# -- inversive invariants over every orbit --------------------------------------------------

def _check_records(rec):
    for r in rec:
        s = r.sphere
        assert s.self_product() == 1
        assert s.bend * s.cobend - sum((x * x for x in s.x), ZERO) == -1


@settings(max_examples=12)
@given(st.sampled_from(["prism", "f3", "f4", "f5"]), st.integers(0, 4))
def test_inversive_invariants(name, depth):
    from reflekt import suite
    from reflekt.vinberg import run_vinberg
    if name == "prism":
        p = suite.prism()
        rec = orbit([p.roots[5].coords], [r.coords for r in p.roots[:5]], p.space, depth)
    else:
        sp = fn_space(int(name[1]))
        p = run_vinberg(sp).polyhedron(sp)
        rec = cluster_orbit(p, depth)
    _check_records(rec)
    if depth <= 3:
        assert audit_disjoint(rec) == []
