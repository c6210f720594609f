"""Doubling a Coxeter polyhedron along a facet, and restriction to a facet."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagram import Diagram, DiagramError, build_diagram, find_isolated_roots
from .exact import ExactMatrix, nullspace, vec
from .qspace import Polyhedron, QuadraticSpace, reflect


class DoublingError(ValueError):
    def __init__(self, msg: str, pair: tuple | None = None, stage: int | None = None):
        super().__init__(msg if stage is None else f"stage {stage}: {msg}")
        self.pair = pair
        self.stage = stage


def _power_of_two(m: int) -> bool:
    return m >= 2 and m & (m - 1) == 0


def _check_even_facet(diag: Diagram, f: int):
    for j in diag.neighbors(f):
        k = diag.edge(f, j)
        if k.kind == "simple" and not _power_of_two(k.m):
            raise DoublingError(f"facet {diag.labels[f]} meets {diag.labels[j]} at pi/{k.m}", (f, j))


def _validate(poly: Polyhedron, stage: int | None = None) -> Diagram:
    try:
        return build_diagram(poly)
    except DiagramError as err:
        raise DoublingError(f"result is not a Coxeter polyhedron: {err}", err.pair, stage) from err


def double(poly: Polyhedron, f: int, check_volume: bool = False) -> Polyhedron:
    """Glue ``poly`` to its mirror image across facet ``f``.

    Roots orthogonal to ``f`` are their own images; ``f`` becomes interior.
    The result keeps the surviving roots in order, followed by the new images
    in the order of their preimages; labels get a trailing ``'``.
    """
    diag = build_diagram(poly)
    _check_even_facet(diag, f)
    space = poly.space
    mirror = poly.roots[f].coords
    keep = [i for i in range(len(poly)) if i != f]
    roots = [poly.roots[i].coords for i in keep]
    labels = [poly.labels[i] for i in keep]
    seen = set(roots)
    halved = []   # (preimage, image) pairs whose angle must double
    for i in keep:
        e = poly.roots[i].coords
        if not space.inner(e, mirror):
            continue
        img = reflect(space, mirror, e)
        if img not in seen:
            seen.add(img)
            roots.append(img)
            labels.append(poly.labels[i] + "'")
            if diag.edge(f, i).kind == "simple":
                halved.append((keep.index(i), len(roots) - 1, diag.edge(f, i).m))
    out = Polyhedron(space, roots, labels)
    d = _validate(out)
    for a, b, m in halved:
        k = d.edge(a, b)
        got = 2 if k.kind == "none" else k.m
        if got != m // 2:
            raise DoublingError(f"angle law violated: pi/{m} became pi/{got}", (a, b))
    for i, j in out.check_acute():
        raise DoublingError("double is not acute-angled", (i, j))
    if check_volume:
        from .vinberg import finite_volume_check
        if not finite_volume_check(d, out.dim):
            raise DoublingError("double failed the finite-volume check")
    return out


def _quarter_neighbors(diag: Diagram, v: int) -> list[int]:
    return [j for j in diag.neighbors(v) if diag.edge(v, j).kind == "simple" and diag.edge(v, j).m == 4]


@dataclass
class DoublingTrace:
    steps: list = field(default_factory=list)   # (polyhedron, doubled facet index)
    final: Polyhedron | None = None
    facet: int = 0

    def to_json(self) -> dict:
        return {
            "steps": [{"polyhedron": p.to_json(), "facet": i} for p, i in self.steps],
            "final": self.final.to_json(),
            "facet": self.facet,
        }


def orthogonalize(poly: Polyhedron, p0: int, check_volume: bool = False) -> DoublingTrace:
    """Double repeatedly until facet ``p0`` (carried along by the reflections)
    is orthogonal to every neighbor it actually meets.

    At each stage the first remaining ``pi/4`` neighbor ``F`` of the tracked
    facet ``D`` is doubled away and ``D`` is replaced by ``R_F(D)``.
    """
    diag = build_diagram(poly)
    for j in diag.neighbors(p0):
        k = diag.edge(p0, j)
        if k.kind == "simple" and k.m != 4:
            raise DoublingError(f"facet meets {poly.labels[j]} at pi/{k.m}", (p0, j), 0)
    k0 = len(_quarter_neighbors(diag, p0))
    trace = DoublingTrace()
    cur, d, d_diag = poly, poly.roots[p0].coords, diag
    for stage in range(1, k0 + 1):
        di = _index(cur, d)
        quarter = _quarter_neighbors(d_diag, di)
        if not quarter:
            raise DoublingError("ran out of pi/4 neighbors early", stage=stage)
        f = quarter[0]
        try:
            nxt = double(cur, f, check_volume)
        except DoublingError as err:
            raise DoublingError(str(err), err.pair, stage) from err
        trace.steps.append((cur, f))
        d = reflect(cur.space, cur.roots[f].coords, d)
        cur = nxt
        d_diag = build_diagram(cur)
        if len(_quarter_neighbors(d_diag, _index(cur, d))) != k0 - stage:
            raise DoublingError("pi/4 count did not drop by one", stage=stage)
    trace.final = cur
    trace.facet = _index(cur, d)
    if trace.facet not in find_isolated_roots(d_diag):
        raise DoublingError("distinguished facet is not isolated", stage=k0)
    return trace


def _index(poly: Polyhedron, e) -> int:
    e = vec(e)
    for i, r in enumerate(poly.roots):
        if r.coords == e:
            return i
    raise DoublingError("tracked facet vanished")


def facet_polyhedron(poly: Polyhedron, i: int) -> Polyhedron:
    """The facet ``P_i`` as a polyhedron in the hyperplane ``e_i^perp``.

    Walls are the projections of the roots whose facets meet ``P_i`` along a
    ridge (finite angle or orthogonal, i.e. an elliptic pair).  For an
    integral form and root, coordinates refer to an integral basis of
    ``{x in Z^n : (x, e_i) = 0}``; otherwise to an exact kernel basis.
    """
    space = poly.space
    e0 = poly.roots[i].coords
    n0 = space.norm(e0)
    diag = build_diagram(poly)
    walls = [j for j in range(len(poly)) if j != i and diag.edge(i, j).kind in ("none", "simple")]
    cov = space.matrix @ e0
    if space.is_integral and all(x.is_integer() for x in e0):
        from .intlat import hyperplane_section
        _, _, kern = hyperplane_section([int(x) for x in cov])
        basis = [vec(k) for k in kern]
    else:
        basis = nullspace([cov])
    bm = ExactMatrix(basis)                       # rows are basis vectors
    form = bm @ space.matrix @ bm.T
    sub = QuadraticSpace(form)
    # coordinates of x in the basis: solve G c = B M x with G the restricted form
    ginv = form.inverse()
    roots, labels = [], []
    for j in walls:
        e = poly.roots[j].coords
        c = space.inner(e, e0) / n0
        proj = tuple(a - c * b for a, b in zip(e, e0))
        coords = ginv @ (bm @ (space.matrix @ proj))
        roots.append(tuple(coords))
        labels.append(poly.labels[j])
    out = Polyhedron(sub, roots, labels)
    return out
