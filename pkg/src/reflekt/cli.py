"""Command-line front end.

Exit codes: 0 success, 1 parse or validation error, 2 budget exhausted
(no finite-volume polyhedron within the limits), 3 invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import arith, doubling, packing, suite, vinberg
from .diagram import (DiagramError, build_diagram, classify_subdiagram, find_clusters,
                      find_isolated_roots, to_dot)
from .io import FIXTURES, InputError, dumps, fixture, load_form, load_polyhedron, resolve_vertex, write_output

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3


class InvariantViolation(RuntimeError):
    pass


def _positive(kind=int):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text}")
        return v
    return parse


def _vector(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer vector: {text}") from None


def _emit(args, payload: dict, out=None):
    write_output(getattr(args, "out", None), dumps(payload), args.force, out or sys.stdout)


def _say(msg: str):
    print(msg, file=sys.stderr)


# -- subcommands ----------------------------------------------------------------------

def cmd_vinberg(args) -> int:
    space = load_form(args.form)
    if args.no_roots:
        cert = vinberg.no_roots_obstruction(space, args.modulus_bound)
        payload = {"form": space.to_json(), "no_roots_certificate": None if cert is None else
                   {str(k): v for k, v in cert.items()}}
        _emit(args, payload)
        _say("no roots: certified" if cert else "no certificate found")
        return EXIT_OK if cert else EXIT_BUDGET
    if not space.is_integral:
        raise InputError("the root enumeration needs an integral form")
    rep = vinberg.run_vinberg(space, args.basepoint, max_roots=args.max_roots,
                              max_distance=args.max_distance, check_volume=not args.no_volume_check,
                              direction=args.direction)
    poly = rep.polyhedron(space)
    if poly.check_acute():
        raise InvariantViolation(f"accepted roots are not pairwise non-acute: {poly.check_acute()[:3]}")
    payload = {"form": space.to_json(), **rep.to_json()}
    if rep.status == vinberg.FINITE_VOLUME or args.with_diagram:
        payload["diagram"] = build_diagram(poly).to_json()
    _emit(args, payload)
    if args.dot:
        write_output(args.dot, to_dot(build_diagram(poly)), args.force)
    _say(f"{rep.status}: {len(rep.roots)} roots, {rep.candidates} candidates, {rep.elapsed:.2f} s")
    return EXIT_OK if rep.status == vinberg.FINITE_VOLUME else EXIT_BUDGET


def cmd_diagram(args) -> int:
    poly = load_polyhedron(args.polyhedron)
    d = build_diagram(poly)
    payload = d.to_json()
    payload["isolated"] = [poly.labels[i] for i in find_isolated_roots(d)]
    if args.classify:
        comps = [classify_subdiagram(d, c) for c in d.components(d.vertices)]
        payload["components"] = [str(c) for c in comps]
    if args.volume:
        payload["finite_volume"] = vinberg.finite_volume_check(d, poly.dim)
    _emit(args, payload)
    if args.dot:
        write_output(args.dot, to_dot(d), args.force)
    _say(f"{d.size} vertices, {len(d.edges)} edges, isolated {payload['isolated']}")
    return EXIT_OK


def cmd_arith(args) -> int:
    poly = load_polyhedron(args.polyhedron)
    try:
        v = arith.verdict(poly)
    except arith.UnsupportedField as err:
        raise InputError(str(err)) from None
    if v.arithmetic and not v.quasi_arithmetic:
        raise InvariantViolation("arithmetic verdict without quasi-arithmeticity")
    _emit(args, v.to_json(poly.labels))
    _say(f"field {v.field}: quasi_arithmetic={v.quasi_arithmetic}, arithmetic={v.arithmetic}")
    return EXIT_OK


def cmd_clusters(args) -> int:
    poly = load_polyhedron(args.polyhedron)
    d = build_diagram(poly)
    parts = find_clusters(d)
    lab = poly.labels
    payload = {"isolated": [lab[i] for i in find_isolated_roots(d)],
               "partitions": [{"cluster": [lab[i] for i in p.cluster],
                               "cocluster": [lab[i] for i in p.cocluster]} for p in parts]}
    _emit(args, payload)
    _say(f"{len(parts)} cluster partition(s)")
    return EXIT_OK


def cmd_pack(args) -> int:
    poly = load_polyhedron(args.polyhedron)
    cl = [resolve_vertex(poly, t) for t in args.cluster.split(",")]
    if args.superpacking:
        recs = packing.superpacking(poly, cl, args.depth)
        gens = list(range(len(poly)))
    else:
        gens = [i for i in range(len(poly)) if i not in cl]
        try:
            recs = packing.orbit([poly.roots[i].coords for i in cl], [poly.roots[i].coords for i in gens],
                                 poly.space, args.depth)
        except ValueError as err:
            raise InputError(f"not a cluster: {err}") from None
    for r in recs:
        if r.sphere.self_product() != 1:
            raise InvariantViolation(f"sphere with <v,v> = {r.sphere.self_product()}")
    if not args.superpacking:
        bad = packing.audit_disjoint([r for r in recs if r.depth <= min(args.depth, 3)])
        if bad:
            raise InvariantViolation(f"overlapping spheres {bad[0][:2]}")
    scan = packing.integrality_scan(recs)
    labels = [poly.labels[i] for i in gens]
    payload = {"cluster": [poly.labels[i] for i in cl], "generators": labels, "depth": args.depth,
               "integrality": scan.to_json(), "records": [r.to_json(labels) for r in recs]}
    _emit(args, payload)
    if args.svg:
        vp = tuple(float(x) for x in args.viewport.split(","))
        try:
            svg = packing.render_svg(recs, vp)
        except ValueError as err:
            raise InputError(str(err)) from None
        write_output(args.svg, svg, args.force)
    _say(f"{len(recs)} spheres, integral={scan.integral} (scale {scan.rescale})")
    return EXIT_OK


def cmd_double(args) -> int:
    poly = load_polyhedron(args.polyhedron)
    f = resolve_vertex(poly, args.facet)
    try:
        if args.orthogonalize:
            tr = doubling.orthogonalize(poly, f, check_volume=args.check_volume)
            payload = tr.to_json()
            _say(f"{len(tr.steps)} doubling step(s); distinguished facet {tr.final.labels[tr.facet]}")
        else:
            out = doubling.double(poly, f, check_volume=args.check_volume)
            payload = out.to_json()
            _say(f"double has {len(out)} facets")
    except doubling.DoublingError as err:
        raise InputError(str(err)) from None
    _emit(args, payload)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.export:
        os.makedirs(args.export, exist_ok=True)
        for name in FIXTURES:
            write_output(os.path.join(args.export, f"{name}.json"), dumps(fixture(name)), args.force)
        _say(f"wrote {len(FIXTURES)} fixtures to {args.export}")
        return EXIT_OK
    if args.show:
        _emit(args, fixture(args.show))
        return EXIT_OK
    rows = suite.run_all(None if args.all else args.check)
    width = max(len(r["check"]) for r in rows)
    for r in rows:
        _say(f"{'PASS' if r['ok'] else 'FAIL'}  {r['check']:<{width}}  {r['detail']}  ({r['seconds']} s)")
    _emit(args, {"checks": [{k: r[k] for k in ("check", "ok", "detail")} for r in rows]})
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_INVARIANT


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reflekt", description=__doc__.splitlines()[0])
    p.add_argument("--workers", type=_positive(), help="worker threads (sets REFLEKT_WORKERS)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        if out:
            sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.add_argument("--force", action="store_true", help="overwrite existing output files")

    sp = sub.add_parser("vinberg", help="fundamental roots of an integral Lorentzian form")
    sp.add_argument("--form", required=True, help="JSON file, @fixture, or diag,a,b,...")
    sp.add_argument("--basepoint", type=_vector, help="comma-separated integer vector")
    sp.add_argument("--direction", type=_vector, help="generic vector selecting the stabilizer chamber")
    sp.add_argument("--max-roots", type=_positive(), default=200)
    sp.add_argument("--max-distance", type=_positive(Fraction))
    sp.add_argument("--no-volume-check", action="store_true")
    sp.add_argument("--with-diagram", action="store_true")
    sp.add_argument("--no-roots", action="store_true", help="search for a congruence certificate instead")
    sp.add_argument("--modulus-bound", type=_positive(), default=10**5)
    sp.add_argument("--dot", help="write the diagram as DOT")
    common(sp)
    sp.set_defaults(fn=cmd_vinberg)

    sp = sub.add_parser("diagram", help="Coxeter-Vinberg diagram of a polyhedron")
    sp.add_argument("--polyhedron", required=True)
    sp.add_argument("--dot")
    sp.add_argument("--classify", action="store_true", help="type of each connected component")
    sp.add_argument("--volume", action="store_true", help="run the finite-volume test")
    common(sp)
    sp.set_defaults(fn=cmd_diagram)

    sp = sub.add_parser("arith", help="arithmeticity verdict")
    sp.add_argument("--polyhedron", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_arith)

    sp = sub.add_parser("clusters", help="isolated roots and cluster partitions")
    sp.add_argument("--polyhedron", required=True)
    common(sp)
    sp.set_defaults(fn=cmd_clusters)

    sp = sub.add_parser("pack", help="packing orbit of a cluster")
    sp.add_argument("--polyhedron", required=True)
    sp.add_argument("--cluster", required=True, help="comma-separated facet labels")
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--superpacking", action="store_true", help="use every reflection of the polyhedron")
    sp.add_argument("--svg")
    sp.add_argument("--viewport", default="-2,-2,2,2", help="xmin,ymin,xmax,ymax")
    common(sp)
    sp.set_defaults(fn=cmd_pack)

    sp = sub.add_parser("double", help="double along a facet")
    sp.add_argument("--polyhedron", required=True)
    sp.add_argument("--facet", required=True)
    sp.add_argument("--orthogonalize", action="store_true")
    sp.add_argument("--check-volume", action="store_true")
    common(sp)
    sp.set_defaults(fn=cmd_double)

    sp = sub.add_parser("fixtures", help="run or export the bundled fixture suite")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true", help="run every check (default)")
    g.add_argument("--check", action="append", choices=[n for n, _ in suite.CHECKS])
    g.add_argument("--show", choices=FIXTURES)
    g.add_argument("--export", metavar="DIR")
    common(sp)
    sp.set_defaults(fn=cmd_fixtures)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; remap to 1
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.workers:
        os.environ["REFLEKT_WORKERS"] = str(args.workers)
    if getattr(args, "depth", 0) < 0:
        _say("error: depth must be non-negative")
        return EXIT_INPUT
    try:
        return args.fn(args)
    except (InputError, DiagramError) as err:
        _say(f"error: {err}")
        return EXIT_INPUT
    except InvariantViolation as err:
        _say(f"invariant violated: {err}")
        return EXIT_INVARIANT
    except ValueError as err:
        _say(f"error: {err}")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
