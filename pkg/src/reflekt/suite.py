"""Checks against the bundled fixtures, used by ``reflekt fixtures``."""

from __future__ import annotations

import time
from typing import Callable

from . import arith, doubling, packing, vinberg
from .diagram import build_diagram, find_clusters, find_isolated_roots
from .exact import ExactMatrix, parse_scalar, scalar
from .io import fixture, parse_matrix
from .qspace import Polyhedron, QuadraticSpace, is_crystallographic_root


def prism() -> Polyhedron:
    d = fixture("prism")
    space = QuadraticSpace(parse_matrix(d["matrix"]))
    return Polyhedron(space, [[parse_scalar(x) for x in r] for r in d["roots"]], d["labels"])


def prism_orbit_basis(poly: Polyhedron | None = None) -> list[tuple]:
    """The five orbit vectors ``e6 R_w`` listed in the packing fixture."""
    poly = poly or prism()
    data = fixture("prism_packing")
    e6 = poly.roots[poly.labels.index(data["cluster"][0])].coords
    return [packing.apply_word(poly, e6, w) for w in data["V_words"]]


def omega() -> tuple[QuadraticSpace, list[tuple[int, ...]], dict]:
    d = fixture("omega")
    return QuadraticSpace(d["matrix"]), [tuple(e) for e in d["roots"]], d


def _scaled(block: dict) -> ExactMatrix:
    return parse_matrix(block["matrix"]) * parse_scalar(block["scale"])


# each check returns (ok, detail)

def check_triangle():
    rep = vinberg.run_vinberg(QuadraticSpace.diagonal(-1, 2, 1))
    d = build_diagram(rep.polyhedron(QuadraticSpace.diagonal(-1, 2, 1)))
    kinds = sorted(str(k) for k in d.edges.values())
    ok = rep.status == vinberg.FINITE_VOLUME and len(rep.roots) == 3 and kinds == ["bold", "m=4"]
    return ok, f"{rep.status}, {len(rep.roots)} roots, edges {kinds}"


def check_fn_series():
    out = []
    ok = True
    for n in (3, 4, 5):
        s = QuadraticSpace.diagonal(-2, *([1] * n))
        rep = vinberg.run_vinberg(s)
        iso = find_isolated_roots(build_diagram(rep.polyhedron(s)))
        ok &= rep.status == vinberg.FINITE_VOLUME and bool(iso)
        out.append(f"f{n}: {len(rep.roots)} roots, isolated {len(iso)}")
    return ok, "; ".join(out)


def check_prism_transcription():
    p = prism()
    d = fixture("prism")
    norms_ok = all(r.norm == 1 for r in p.roots)
    printed = [[parse_scalar(x) for x in r] for r in d["printed_gram"]]
    g = p.gram()
    gram_ok = all(g[i][j] == -printed[i][j] for i in range(6) for j in range(6))
    return norms_ok and gram_ok, f"unit norms {norms_ok}, Gram equals minus printed {gram_ok}"


def check_prism_arith():
    v = arith.verdict(prism())
    ok = v.quasi_arithmetic and not v.arithmetic and v.failing_cycle[1] == scalar("32/7")
    return ok, f"quasi {v.quasi_arithmetic}, arithmetic {v.arithmetic}, witness {v.failing_cycle[1]}"


def check_prism_clusters():
    p = prism()
    d = build_diagram(p)
    iso = [p.labels[i] for i in find_isolated_roots(d)]
    cl = find_clusters(d)
    ok = iso == ["6"] and len(cl) == 1 and cl[0].cluster == (5,) and cl[0].cocluster == (0, 1, 2, 3, 4)
    return ok, f"isolated {iso}, clusters {[c.cluster for c in cl]}"


def check_conjugated_generators():
    p = prism()
    data = fixture("prism_packing")
    vs = prism_orbit_basis(p)
    gens = packing.conjugated_generators(vs, [r.coords for r in p.roots[:5]], p.space)
    printed = [parse_matrix(m) for m in data["conjugated_generators"]]
    gv = packing.gram_of_orbit(vs, p.space)
    ok_g = gv == _scaled(data["gram_V"])
    ok_r = all(a == b for a, b in zip(gens, printed))
    return ok_g and ok_r, f"G(V) matches {ok_g}, VR_iV^-1 match {ok_r}"


def check_bends():
    data = fixture("prism_packing")
    gens = [parse_matrix(m) for m in data["conjugated_generators"]]
    orb = packing.bend_orbit(data["initial_bends"], gens, 5)
    integral = all(x.denominator == 1 for v in orb for x in v)
    c, m = data["congruence"]["coefficients"], data["congruence"]["modulus"]
    cong = all(sum(a * b for a, b in zip(c, v)) % m == 0 for v in orb)
    found = packing.find_bend_congruence(gens, data["initial_bends"], 4)
    ok = integral and cong and found == (tuple(c), m)
    return ok, f"{len(orb)} vectors integral {integral}, congruence holds {cong}, search {found}"


def check_superpacking():
    p = prism()
    sup = packing.superpacking(p, [5], 5)
    rep = packing.integrality_scan(sup)
    return not rep.integral, f"non-integral ratio {rep.witness[1] if rep.witness else None}"


def check_omega_replay():
    space, roots, _ = omega()
    cryst = all(is_crystallographic_root(space, e) for e in roots)
    st = vinberg.VinbergState(space, (1, 1, 1, 1, 1))
    replay = all(vinberg.accept(st, e) for e in roots)
    fv = vinberg.finite_volume_check(Polyhedron(space, [list(e) for e in roots]))
    return cryst and replay and not fv, f"crystallographic {cryst}, replay {replay}, finite volume {fv}"


def check_sigma():
    space, roots, d = omega()
    lab = d["labels"]
    src = [roots[lab.index(x)] for x in d["sigma"]["source"]]
    dst = [roots[lab.index(x)] for x in d["sigma"]["target"]]
    cert = vinberg.verify_infinite_symmetry(space, d["sigma"]["matrix"], src, dst)
    return bool(cert), f"direction {cert.direction}, factor {cert.non_cyclotomic}"


def check_no_roots():
    d = fixture("no_roots")
    cert = vinberg.no_roots_obstruction(QuadraticSpace(d["matrix"]))
    other = vinberg.no_roots_obstruction(QuadraticSpace(d["commensurable"]["matrix"]))
    return cert is not None and other is None, f"{len(cert or {})} norms excluded; reflective partner certified: {other is not None}"


def check_triangle_doubling():
    s = QuadraticSpace.diagonal(-1, 2, 1)
    p = vinberg.run_vinberg(s).polyhedron(s)
    tr = doubling.orthogonalize(p, 1)
    iso = find_isolated_roots(build_diagram(tr.final))
    return len(tr.steps) == 1 and tr.facet in iso, f"{len(tr.steps)} step(s), final facet isolated {tr.facet in iso}"


CHECKS: list[tuple[str, Callable]] = [
    ("triangle", check_triangle),
    ("fn-series", check_fn_series),
    ("prism-transcription", check_prism_transcription),
    ("prism-arithmeticity", check_prism_arith),
    ("prism-clusters", check_prism_clusters),
    ("conjugated-generators", check_conjugated_generators),
    ("bend-integrality", check_bends),
    ("superpacking", check_superpacking),
    ("omega-replay", check_omega_replay),
    ("sigma", check_sigma),
    ("no-roots", check_no_roots),
    ("triangle-doubling", check_triangle_doubling),
]


def run_all(names=None) -> list[dict]:
    rows = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        t = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as err:  # a crash is a failed check, reported not raised
            ok, detail = False, f"{type(err).__name__}: {err}"
        rows.append({"check": name, "ok": bool(ok), "detail": detail, "seconds": round(time.perf_counter() - t, 2)})
    return rows
