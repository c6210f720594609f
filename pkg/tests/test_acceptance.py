"""End-to-end acceptance criteria, one PASS/FAIL line each.

Criteria 6 and 7 each contain one clause that the bundled data does not
support. Those clauses run as strict xfails that still print their FAIL line;
everything else in those criteria is asserted by a separate passing test.
"""

import time
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import ACCEPTANCE, fn_space
from reflekt import suite
from reflekt.arith import verdict
from reflekt.diagram import build_diagram, diagrams_isomorphic, find_clusters, find_isolated_roots
from reflekt.doubling import DoublingError, orthogonalize
from reflekt.exact import ZERO, scalar
from reflekt.io import fixture, parse_matrix
from reflekt.packing import (audit_disjoint, bend_orbit, conjugated_generators, find_bend_congruence,
                             gram_of_orbit, integrality_scan, inversive_product, orbit, superpacking)
from reflekt.qspace import Polyhedron, QuadraticSpace, is_crystallographic_root
from reflekt.vinberg import (FINITE_VOLUME, VinbergState, accept, candidate_norms, finite_volume_check,
                             no_roots_obstruction, run_vinberg, verify_infinite_symmetry)

TRI = QuadraticSpace.diagonal(-1, 2, 1)
OMEGA_W = (2, 3, 8, 13, 0)


def record(capsys, k, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {k:>2}. {title}: {detail}"
    ACCEPTANCE[k] = line
    with capsys.disabled():
        print("\n" + line)
    return ok


def timed(fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t


# -- 1 -----------------------------------------------------------------------------------

def test_01_triangle_group(capsys):
    run_vinberg(TRI)                                   # warm the compiled kernels
    rep, dt = timed(run_vinberg, TRI)
    d = build_diagram(rep.polyhedron(TRI))
    kinds = sorted(str(k) for k in d.edges.values())
    pairs = len(list(combinations(range(3), 2)))
    ok = (rep.status == FINITE_VOLUME and len(rep.roots) == 3 and kinds == ["bold", "m=4"]
          and pairs - len(d.edges) == 1 and dt < 1)
    record(capsys, 1, "triangle group", ok, f"{rep.status}, {len(rep.roots)} roots, edges {kinds}, {dt:.2f} s")
    assert ok


# -- 2 -----------------------------------------------------------------------------------

def test_02_fn_series(capsys):
    parts, ok = [], True
    for n in (3, 4, 5):
        s = fn_space(n)
        rep, dt = timed(run_vinberg, s)
        iso = find_isolated_roots(build_diagram(rep.polyhedron(s)))
        ok &= rep.status == FINITE_VOLUME and len(iso) >= 1 and dt < 60
        parts.append(f"f{n} {len(rep.roots)} roots, {len(iso)} isolated, {dt:.2f} s")
    record(capsys, 2, "f_n series", ok, "; ".join(parts))
    assert ok


# -- 3 -----------------------------------------------------------------------------------

def test_03_prism_arithmeticity(capsys, prism):
    v = verdict(prism)
    cyc = v.failing_cycle
    dotted = [ij for ij, k in build_diagram(prism).edges.items() if k.kind == "dotted"]
    ok = (v.quasi_arithmetic and not v.arithmetic and cyc is not None and cyc[1] == scalar("32/7")
          and tuple(sorted(set(cyc[0]))) in dotted)
    record(capsys, 3, "prism arithmeticity", ok,
           f"quasi {v.quasi_arithmetic}, arithmetic {v.arithmetic}, witness {cyc[1] if cyc else None}")
    assert ok


# -- 4 -----------------------------------------------------------------------------------

def test_04_isolated_root(capsys, prism):
    d = build_diagram(prism)
    lab = prism.labels
    iso = {lab[i] for i in find_isolated_roots(d)}
    parts = [({lab[i] for i in c.cluster}, {lab[i] for i in c.cocluster}) for c in find_clusters(d)]
    ok = iso == {"6"} and parts == [({"6"}, {"1", "2", "3", "4", "5"})]
    shown = [(sorted(r), sorted(c)) for r, c in parts]
    record(capsys, 4, "isolated root", ok, f"isolated {sorted(iso)}, partitions {shown}")
    assert ok


# -- 5 -----------------------------------------------------------------------------------

def test_05_conjugated_generators(capsys, prism, prism_V):
    data = fixture("prism_packing")
    printed = [parse_matrix(m) for m in data["conjugated_generators"]]
    got = conjugated_generators(prism_V, [r.coords for r in prism.roots[:5]], prism.space)
    gv = parse_matrix(data["gram_V"]["matrix"]) * scalar(data["gram_V"]["scale"])
    gen_ok = got == printed
    gram_ok = gram_of_orbit(prism_V, prism.space) == gv and scalar(data["gram_V"]["scale"]) == scalar("-1/7")
    ok = gen_ok and gram_ok
    record(capsys, 5, "conjugated generators", ok, f"5 matrices equal {gen_ok}, G(V) equal {gram_ok}")
    assert ok


# -- 6 -----------------------------------------------------------------------------------

def _integrality_parts(prism):
    data = fixture("prism_packing")
    gens = [parse_matrix(m) for m in data["conjugated_generators"]]
    t = time.perf_counter()
    full = bend_orbit([1, 1, 1, 1, 1], gens, 5)
    first = bend_orbit([1, 1, 1, 1, 1], [gens[0]], 1)[1]
    cong = find_bend_congruence(gens, [1, 1, 1, 1, 1], 4)
    scan = integrality_scan(superpacking(prism, [5], 5))
    dt = time.perf_counter() - t
    return {
        "integral": all(x.denominator == 1 for v in full for x in v),
        "congruence": cong == ((1, 1, 2, 3, 1), 4),
        "witness": not scan.integral and scan.witness is not None and scan.witness[0] <= 5,
        "time": dt < 30,
        "first": tuple(int(x) for x in first),
        "dt": dt,
        "ratio": None if scan.witness is None else scan.witness[1],
    }


def test_06_integrality_attainable_parts(prism):
    p = _integrality_parts(prism)
    assert p["integral"] and p["congruence"] and p["witness"] and p["time"]
    assert p["first"] == (1, 1, 1, 5, 5)            # hand product of the printed fourth and fifth rows


@pytest.mark.xfail(strict=True, reason="the printed generator maps (1,1,1,1,1) to (1,1,1,5,5), not (1,1,1,6,6)")
def test_06_proper_integrality(capsys, prism):
    p = _integrality_parts(prism)
    literal = p["first"] == (1, 1, 1, 6, 6)
    ok = p["integral"] and p["congruence"] and p["witness"] and p["time"] and literal
    record(capsys, 6, "proper integrality", ok,
           f"depth 5 integral {p['integral']}, first application {p['first']} (expected (1,1,1,6,6)), "
           f"congruence {p['congruence']}, superpacking witness {p['ratio']}, {p['dt']:.1f} s")
    assert ok


# -- 7 -----------------------------------------------------------------------------------

def _omega_parts(omega):
    space, roots, data = omega
    t = time.perf_counter()
    cryst = all(is_crystallographic_root(space, e) for e in roots)
    st_ = VinbergState(space, tuple(data["basepoint"]))
    replay = all(accept(st_, e) for e in roots)
    printed = Polyhedron(space, [list(e) for e in roots])
    fv = finite_volume_check(printed)
    rep = run_vinberg(space, data["basepoint"], max_roots=31, check_volume=False, direction=OMEGA_W)
    ours = rep.polyhedron(space)
    iso = diagrams_isomorphic(build_diagram(ours), build_diagram(printed))
    dt = time.perf_counter() - t
    return {"cryst": cryst, "replay": replay, "fv": fv, "iso": iso, "n": len(rep.roots),
            "ours_fv": finite_volume_check(ours), "dt": dt,
            "edges": (len(build_diagram(ours).edges), len(build_diagram(printed).edges))}


def test_07_omega_attainable_parts(omega):
    p = _omega_parts(omega)
    assert p["cryst"] and p["replay"] and not p["fv"] and not p["ours_fv"] and p["n"] == 31
    assert p["dt"] < 600
    # substitute for the isomorphism clause: the printed roots all appear in a longer run
    space, roots, data = omega
    rep = run_vinberg(space, data["basepoint"], max_distance=9216, max_roots=1000,
                      check_volume=False, direction=OMEGA_W)
    assert {tuple(e) for e in roots} <= set(rep.roots)


@pytest.mark.xfail(strict=True, reason="the printed 31 roots are not the 31 nearest roots; diagrams differ")
def test_07_omega_replay(capsys, omega):
    p = _omega_parts(omega)
    ok = p["cryst"] and p["replay"] and p["iso"] and not p["fv"] and p["dt"] < 600
    record(capsys, 7, "omega replay", ok,
           f"crystallographic {p['cryst']}, replay {p['replay']}, finite volume {p['fv']}, "
           f"isomorphic {p['iso']} (edges {p['edges'][0]} vs {p['edges'][1]}), {p['dt']:.1f} s")
    assert ok


# -- 8 -----------------------------------------------------------------------------------

def test_08_infinite_symmetry(capsys, omega):
    space, roots, data = omega
    lab = data["labels"]
    sig = data["sigma"]
    pairs = list(zip(sig["source"], sig["target"]))
    src = [roots[lab.index(a)] for a, _ in pairs]
    dst = [roots[lab.index(b)] for _, b in pairs]
    cert = verify_infinite_symmetry(space, sig["matrix"], src, dst)
    want = [("13", "12"), ("3", "19"), ("14", "25"), ("1", "31"), ("6", "7")]
    ok = bool(cert) and cert.preserves_form and bool(cert.non_cyclotomic) and pairs == want
    record(capsys, 8, "infinite symmetry", ok,
           f"preserves form {cert.preserves_form}, non-cyclotomic factor {cert.non_cyclotomic}")
    assert ok


# -- 9 -----------------------------------------------------------------------------------

def test_09_no_roots(capsys):
    space = QuadraticSpace(fixture("no_roots")["matrix"])
    cert = no_roots_obstruction(space)
    none_tri = no_roots_obstruction(TRI)
    ok = cert is not None and set(cert) == set(candidate_norms(space)) and none_tri is None
    record(capsys, 9, "no-roots lattice", ok,
           f"certificate for {0 if cert is None else len(cert)} norms, diag(-1,2,1) gives {none_tri}")
    assert ok


# -- 10 ----------------------------------------------------------------------------------

def _quarter_count(poly, i):
    d = build_diagram(poly)
    return sum(1 for j in d.neighbors(i) if d.edge(i, j).kind == "simple" and d.edge(i, j).m == 4)


def _doubling_cases():
    out = []
    for sp in (TRI, fn_space(3)):
        p = run_vinberg(sp).polyhedron(sp)
        d = build_diagram(p)
        for i in range(len(p)):
            if all(d.edge(i, j).kind != "simple" or d.edge(i, j).m == 4 for j in d.neighbors(i)):
                out.append((p, i))
    return out


DOUBLING = _doubling_cases()


@settings(max_examples=4 * len(DOUBLING))
@given(st.sampled_from(DOUBLING))
def _doubling_property(case):
    poly, p0 = case
    k = _quarter_count(poly, p0)
    try:
        tr = orthogonalize(poly, p0)
    except DoublingError as err:
        assert err.stage >= 1                     # a pi/4 neighbor meets something at an odd angle
        return
    assert len(tr.steps) == k
    for p, _ in tr.steps + [(tr.final, None)]:
        build_diagram(p)
        assert p.check_acute() == []
    assert tr.facet in find_isolated_roots(build_diagram(tr.final))


def test_10_doubling_property_suite(capsys):
    try:
        _doubling_property()
    except Exception as err:
        record(capsys, 10, "doubling property suite", False, repr(err)[:200])
        raise
    tri_steps = [len(orthogonalize(p, i).steps) for p, i in DOUBLING if p.space == TRI]
    record(capsys, 10, "doubling property suite", True,
           f"{len(DOUBLING)} facets on the triangle and f3, triangle steps {tri_steps}")


# -- 11 ----------------------------------------------------------------------------------

def _orbit_for(name, depth):
    if name == "prism":
        p = suite.prism()
        return orbit([p.roots[5].coords], [r.coords for r in p.roots[:5]], p.space, depth)
    sp = TRI if name == "tri" else fn_space(int(name[1]))
    p = run_vinberg(sp).polyhedron(sp)
    cl = find_clusters(build_diagram(p))[0]
    roots = [r.coords for r in p.roots]
    return orbit([roots[i] for i in cl.cluster], [roots[i] for i in cl.cocluster], sp, depth)


@settings(max_examples=20)
@given(st.sampled_from(["prism", "tri", "f3", "f4", "f5"]), st.integers(0, 5))
def _inversive_property(name, depth):
    rec = _orbit_for(name, depth)
    for r in rec:
        s = r.sphere
        assert s.self_product() == 1
        assert s.bend * s.cobend - sum((x * x for x in s.x), ZERO) == -1
    if depth <= 3:
        assert audit_disjoint(rec) == []
        for a, b in combinations(rec, 2):
            assert inversive_product(a.sphere, b.sphere) <= -1


def test_11_inversive_invariants(capsys):
    try:
        _inversive_property()
    except Exception as err:
        record(capsys, 11, "inversive invariants", False, repr(err)[:200])
        raise
    n = len(_orbit_for("prism", 3))
    record(capsys, 11, "inversive invariants", True,
           f"exact on prism, triangle and f3-f5 orbits to depth 5; prism depth 3 has {n} disjoint spheres")
