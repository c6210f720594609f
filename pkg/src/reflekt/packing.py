"""Sphere packings from clusters: inversive coordinates, orbits, bends, congruences, SVG.

Conventions
-----------
A root ``e`` of norm 1 determines an oriented sphere.  Its inversive vector is
``v = (b(e), bhat(e), b_1(e), ..., b_n(e))`` for a frame of covectors, and
``<v, w> = -(b_v bhat_w + bhat_v b_w)/2 + sum x_i y_i`` equals ``(e, f)``.
Two spheres have disjoint interiors iff ``<v, w> <= -1`` (tangent at ``-1``).
Matrices act on row vectors on the right: ``e R`` is the image of ``e``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Iterable, Sequence

from .exact import ExactMatrix, ExactScalar, ONE, ZERO, format_scalar, scalar, vec
from .qspace import QuadraticSpace, reflect


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class InversiveFrame:
    b: tuple
    bhat: tuple
    basis: tuple  # tuple of covectors

    def apply(self, e: Sequence) -> "InversiveSphere":
        e = vec(e)

        def ev(c):
            return sum((x * y for x, y in zip(c, e)), ZERO)

        return InversiveSphere(ev(self.b), ev(self.bhat), tuple(ev(c) for c in self.basis))

    def gram(self, space: QuadraticSpace) -> list[list[ExactScalar]]:
        """Gram matrix of ``(b, bhat, b_1, ...)`` under the dual form."""
        inv = space.matrix.inverse()
        cov = [self.b, self.bhat, *self.basis]
        return [[sum((x * y for x, y in zip(c, inv @ vec(d))), ZERO) for d in cov] for c in cov]

    def to_json(self) -> dict:
        f = lambda c: [format_scalar(x) for x in c]
        return {"b": f(self.b), "bhat": f(self.bhat), "basis": [f(c) for c in self.basis]}

    @classmethod
    def from_json(cls, data: dict) -> "InversiveFrame":
        return cls(vec(data["b"]), vec(data["bhat"]), tuple(vec(c) for c in data["basis"]))


def _unit(i: int, n: int) -> tuple:
    return tuple(ONE if j == i else ZERO for j in range(n))


def _is_split_form(m: ExactMatrix) -> bool:
    """``[[0, -1/2], [-1/2, 0]]`` followed by an identity block."""
    n = m.shape[0]
    half = scalar(Fraction(-1, 2))
    for i in range(n):
        for j in range(n):
            if {i, j} == {0, 1}:
                want = half
            else:
                want = ONE if (i == j and i >= 2) else ZERO
            if m[i, j] != want:
                return False
    return n >= 3


def inversive_frame(space: QuadraticSpace) -> InversiveFrame:
    """A deterministic frame for the dual form.

    For ``H + I`` (coordinates ``(x0, x1, ...)`` with ``(x, x) = -x0 x1 + ...``)
    the bend is ``x1`` and the co-bend ``x0``.  Otherwise the dual form is
    orthogonalized in coordinate order and the first negative and first
    positive unit covectors ``t, s`` give ``b = t + s``, ``bhat = t - s``.
    When the dual form has a small rational isotropic vector the frame is moved
    (rotation in the positive part, then a boost) so that ``b`` is that vector,
    which keeps bends rational.
    """
    n = space.dim
    if _is_split_form(space.matrix):
        return InversiveFrame(_unit(1, n), _unit(0, n), tuple(_unit(i, n) for i in range(2, n)))
    inv = space.matrix.inverse()

    def f(u, v):
        return sum((x * y for x, y in zip(u, inv @ vec(v))), ZERO)

    # Gram-Schmidt with a hyperbolic-pair fallback when the next pivot is isotropic
    pending = [_unit(i, n) for i in range(n)]
    ortho: list[tuple[tuple, ExactScalar]] = []
    while pending:
        u = pending.pop(0)
        for w, dw in ortho:
            c = f(u, w) / dw
            u = tuple(a - c * b for a, b in zip(u, w))
        if not any(u):
            continue
        du = f(u, u)
        if not du:
            partner = next((p for p in pending if f(u, p)), None)
            if partner is None:
                raise FrameError("degenerate dual form")
            pending.remove(partner)
            pending.insert(0, u)
            u = tuple(a + b for a, b in zip(u, partner))
            for w, dw in ortho:
                c = f(u, w) / dw
                u = tuple(a - c * b for a, b in zip(u, w))
            du = f(u, u)
            if not du:
                u = tuple(a - 2 * b for a, b in zip(u, partner))
                du = f(u, u)
        ortho.append((u, du))
    units = []
    for u, du in ortho:
        q = du if du.sign() > 0 else -du
        if not q.is_rational():
            raise FrameError(f"cannot normalize a covector of norm {du} within radical scalars")
        s = ExactScalar.sqrt(q.rational_part())
        units.append((tuple(x / s for x in u), du.sign()))
    neg = [u for u, sg in units if sg < 0]
    pos = [u for u, sg in units if sg > 0]
    if len(neg) != 1:
        raise FrameError("dual form is not Lorentzian")
    t, s0 = neg[0], pos[0]
    rest = pos[1:]
    b0 = _rational_isotropic(inv) if inv.is_rational() and n <= 7 else None
    if b0 is not None:
        # rotate s0 onto the spatial direction of b0, then boost so that b = b0 exactly
        alpha = -f(b0, t)
        if alpha.sign() < 0:
            b0, alpha = tuple(-x for x in b0), -alpha
        sigma = tuple(x / alpha - y for x, y in zip(b0, t))
        w = tuple(x - y for x, y in zip(s0, sigma))
        if any(w):
            dw = f(w, w)
            rest = tuple(tuple(a - (2 * f(u, w) / dw) * c for a, c in zip(u, w)) for u in rest)
        b = b0
        bhat = tuple((x - y) / alpha for x, y in zip(t, sigma))
        return InversiveFrame(b, bhat, tuple(rest))
    b = tuple(x + y for x, y in zip(t, s0))
    bhat = tuple(x - y for x, y in zip(t, s0))
    return InversiveFrame(b, bhat, tuple(rest))


def _rational_isotropic(inv: ExactMatrix, box: int = 3) -> tuple | None:
    """Smallest nonzero integer vector isotropic for ``inv`` (sup norm, then lexicographic)."""
    import numpy as np
    fr = inv.to_fractions()
    n = len(fr)
    den = 1
    for row in fr:
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
    m = np.array([[int(x * den) for x in row] for row in fr], dtype=np.int64)
    r = np.arange(-box, box + 1)
    pts = np.array(np.meshgrid(*([r] * n), indexing="ij")).reshape(n, -1).T
    q = np.einsum("ki,ij,kj->k", pts, m, pts)
    hits = pts[(q == 0) & np.any(pts != 0, axis=1)]
    if not len(hits):
        return None
    best = min((int(np.abs(h).max()), tuple(int(x) for x in h)) for h in hits)[1]
    return tuple(scalar(x) for x in best)


@dataclass(frozen=True)
class InversiveSphere:
    bend: ExactScalar
    cobend: ExactScalar
    x: tuple

    @property
    def coords(self) -> tuple:
        return (self.bend, self.cobend, *self.x)

    def center(self):
        if not self.bend:
            return None
        return tuple(c / self.bend for c in self.x)

    def unit_normal(self):
        """For a bend-zero sphere (a hyperplane): its unit normal."""
        return self.x if not self.bend else None

    def self_product(self) -> ExactScalar:
        return inversive_product(self, self)

    def to_json(self) -> dict:
        c = self.center()
        return {"bend": format_scalar(self.bend), "cobend": format_scalar(self.cobend),
                "x": [format_scalar(v) for v in self.x],
                "center": None if c is None else [format_scalar(v) for v in c]}


def inversive_product(v: InversiveSphere, w: InversiveSphere) -> ExactScalar:
    s = sum((a * b for a, b in zip(v.x, w.x)), ZERO)
    return s - (v.bend * w.cobend + v.cobend * w.bend) / 2


# -- orbits -------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitRecord:
    root: tuple
    sphere: InversiveSphere
    word: tuple   # generator indices, applied left to right
    depth: int

    def to_json(self, labels=None) -> dict:
        d = self.sphere.to_json()
        d["root"] = [format_scalar(x) for x in self.root]
        d["word"] = [labels[i] if labels else i for i in self.word]
        d["depth"] = self.depth
        return d


def unit_root(space: QuadraticSpace, e: Sequence) -> tuple:
    e = vec(e)
    n = space.norm(e)
    if n.sign() <= 0:
        raise ValueError("root is not space-like")
    if n == ONE:
        return e
    if not n.is_rational():
        raise ValueError("root norm is irrational")
    s = ExactScalar.sqrt(n.rational_part())
    return tuple(x / s for x in e)


def _dedup_key(e: tuple) -> tuple:
    lead = next(x for x in e if x)
    a = lead if lead.sign() > 0 else -lead
    return tuple(x / a for x in e)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("REFLEKT_WORKERS", "1")))
    except ValueError:
        return 1


def orbit(cluster: Sequence, cocluster: Sequence, space: QuadraticSpace, depth: int,
          frame: InversiveFrame | None = None, check_partition: bool = True) -> list[OrbitRecord]:
    """Breadth-first closure of the cluster spheres under the cocluster reflections.

    ``cluster`` and ``cocluster`` are root vectors; words index into ``cocluster``.
    Records are ordered by depth, then word; each sphere keeps its first word.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    frame = frame or inversive_frame(space)
    gens = [vec(c) for c in cocluster]
    seeds = [unit_root(space, e) for e in cluster]
    if check_partition:
        _check_cluster(space, seeds, gens)
    seen = {}
    layer = []
    for i, e in enumerate(seeds):
        k = _dedup_key(e)
        if k not in seen:
            seen[k] = True
            layer.append((e, ()))
    out = [OrbitRecord(e, frame.apply(e), w, 0) for e, w in layer]

    def expand(item):
        e, w = item
        return [(reflect(space, g, e), w + (j,)) for j, g in enumerate(gens) if not w or w[-1] != j]

    pool = ThreadPoolExecutor(_workers()) if _workers() > 1 else None
    try:
        for d in range(1, depth + 1):
            children = pool.map(expand, layer) if pool else map(expand, layer)
            nxt = []
            for batch in children:     # map preserves order: merge is deterministic
                for e, w in batch:
                    k = _dedup_key(e)
                    if k in seen:
                        continue
                    seen[k] = True
                    nxt.append((e, w))
            nxt.sort(key=lambda t: t[1])
            out.extend(OrbitRecord(e, frame.apply(e), w, d) for e, w in nxt)
            layer = nxt
    finally:
        if pool:
            pool.shutdown()
    return out


def _check_cluster(space, seeds, gens):
    for i, a in enumerate(seeds):
        for b in seeds[i + 1:]:
            if space.inner(a, b) > -1:
                raise ValueError("cluster spheres overlap: inner product > -1")
        for g in gens:
            p = space.inner(a, g)
            if p:
                q = p * p / space.norm(g)
                if q < 1:
                    raise ValueError("a cluster root meets a cocluster wall at a finite non-right angle")


def audit_disjoint(records: Sequence[OrbitRecord]) -> list[tuple[int, int, ExactScalar]]:
    """Pairs of distinct spheres whose inversive product exceeds ``-1``."""
    bad = []
    for i, a in enumerate(records):
        for j in range(i + 1, len(records)):
            p = inversive_product(a.sphere, records[j].sphere)
            if p > -1:
                bad.append((i, j, p))
    return bad


def apply_word(poly, e: Sequence, word: Sequence[str]) -> tuple:
    """``e R_{w_1} R_{w_2} ...`` with reflections named by facet labels."""
    out = vec(e)
    for w in word:
        out = reflect(poly.space, poly.roots[poly.labels.index(w)].coords, out)
    return out


def gram_of_orbit(vs: Sequence[Sequence], space: QuadraticSpace) -> ExactMatrix:
    return ExactMatrix([[space.inner(a, b) for b in vs] for a in vs])


def conjugated_generators(vs: Sequence[Sequence], cocluster: Sequence[Sequence],
                          space: QuadraticSpace) -> list[ExactMatrix]:
    """``V R_i V^{-1}`` for the row-vector action, one matrix per cocluster root."""
    v = ExactMatrix([vec(r) for r in vs])
    if v.shape[0] != v.shape[1]:
        raise ValueError("V must be square")
    if not v.det():
        raise ValueError("V is singular")
    vinv = v.inverse()
    out = []
    for g in cocluster:
        vr = ExactMatrix([reflect(space, g, r) for r in v.rows])
        out.append(vr @ vinv)
    return out


# -- bends ------------------------------------------------------------------------------

def _as_fraction_matrix(a) -> list[list[Fraction]]:
    if isinstance(a, ExactMatrix):
        if not a.is_rational():
            raise ValueError("bend matrices must be rational")
        return a.to_fractions()
    return [[Fraction(x) for x in r] for r in a]


def bend_orbit(initial: Sequence, generators: Sequence, depth: int) -> list[tuple[Fraction, ...]]:
    """Closure of ``initial`` under the left action of the matrices, to word length ``depth``.

    Returned in discovery order (breadth first, generators in order).
    """
    mats = [_as_fraction_matrix(a) for a in generators]
    start = tuple(Fraction(x) for x in initial)
    seen = {start}
    out = [start]
    layer = [start]
    for _ in range(depth):
        nxt = []
        for x in layer:
            for a in mats:
                y = tuple(sum((r * v for r, v in zip(row, x)), Fraction(0)) for row in a)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    out.append(y)
        layer = nxt
    return out


def _invariant(c, m, mats) -> bool:
    """Is ``{x in Z^n : c.x = 0 mod m}`` mapped into itself by every matrix?"""
    basis = _congruence_basis(c, m)
    if basis is None:
        return False
    for a in mats:
        for x in basis:
            y = [sum(r * v for r, v in zip(row, x)) for row in a]
            if any(Fraction(t).denominator != 1 for t in y):
                return False
            if sum(ci * int(t) for ci, t in zip(c, y)) % m:
                return False
    return True


def _congruence_basis(c, m):
    from .intlat import congruence_lattice
    return congruence_lattice([list(c)], m)


def _candidate_key(c):
    return (sum(1 for x in c if x), tuple(-x for x in c))


def find_bend_congruence(generators: Sequence, initial: Sequence, modulus_bound: int = 8):
    """Smallest ``m`` and a coefficient vector ``c`` with ``c . x = 0 (mod m)`` on the orbit.

    The sublattice ``{x : c . x = 0 mod m}`` must contain ``initial`` and be
    mapped into itself by every generator.  This allows generators with
    denominators, which a plain residue test ``c A = lambda c (mod m)`` cannot
    handle.  Among valid ``c`` the one with fewest nonzero entries wins, ties
    broken towards larger leading entries; ``c`` is reported with its first
    nonzero entry scaled to 1 when that is possible.
    """
    mats = [_as_fraction_matrix(a) for a in generators]
    init = [Fraction(x) for x in initial]
    if any(x.denominator != 1 for x in init):
        raise ValueError("initial bends must be integers")
    init = [int(x) for x in init]
    n = len(init)
    for m in range(2, modulus_bound + 1):
        found = []
        for c in product(range(m), repeat=n):
            if not any(c) or gcd(m, *c) != 1:
                continue
            if sum(a * b for a, b in zip(c, init)) % m:
                continue
            if _invariant(c, m, mats):
                found.append(_unit_normalize(c, m))
        if found:
            found = sorted(set(found), key=_candidate_key)
            return found[0], m
    return None


def _unit_normalize(c, m):
    lead = next(x for x in c if x)
    for u in range(1, m):
        if gcd(u, m) == 1 and (u * lead) % m == gcd(lead, m):
            return tuple((u * x) % m for x in c)
    return tuple(c)


@dataclass
class IntegralityReport:
    integral: bool
    rescale: ExactScalar
    witness: tuple | None = None   # (record index, bend / rescale)

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            w = {"index": self.witness[0], "ratio": format_scalar(self.witness[1])}
        return {"integral": self.integral, "rescale": format_scalar(self.rescale), "witness": w}


def _rational_gcd(xs: Iterable[Fraction]) -> Fraction:
    fr = [Fraction(x) for x in xs]
    if not fr:
        return Fraction(1)
    g = Fraction(0)
    for x in fr:
        a = g.numerator * x.denominator
        b = x.numerator * g.denominator
        g = Fraction(gcd(a, b), g.denominator * x.denominator)
    return abs(g)


def integrality_scan(records: Sequence, depth: int | None = None,
                     base_depth: int = 0) -> IntegralityReport:
    """Look for a scale ``t > 0`` making every bend up to ``depth`` an integer multiple of ``t``.

    ``t`` is fixed from the records of depth ``<= base_depth`` (the cluster
    itself by default): it is the positive generator of their bends, which must
    share one radical ``sqrt(s)``.  The report carries the first record whose
    ratio ``bend / t`` is not an integer.
    """
    recs = [r for r in records if depth is None or r.depth <= depth]
    bends = [r.sphere.bend for r in recs]
    base = [r.sphere.bend for r in recs if r.depth <= base_depth and r.sphere.bend]
    if not base:
        base = [b for b in bends if b]
    if not base:
        return IntegralityReport(True, ONE)
    rads = {b.radicands() for b in base}
    if len(rads) != 1 or len(next(iter(rads))) > 1:
        raise ValueError("base bends do not share a single radical")
    rad = next(iter(rads))
    s = rad[0] if rad else 1
    unit = ExactScalar.sqrt(s) if s != 1 else ONE
    coeffs = [(b / unit).rational_part() for b in base]
    t = unit * _rational_gcd(coeffs)
    for i, b in enumerate(bends):
        q = b / t
        if not q.is_integer():
            return IntegralityReport(False, t, (i, q))
    return IntegralityReport(True, t)


def superpacking(poly, cluster_idx: Sequence[int], depth: int, frame: InversiveFrame | None = None):
    """Orbit of the cluster under every reflection of the polyhedron."""
    roots = [r.coords for r in poly.roots]
    return orbit([roots[i] for i in cluster_idx], roots, poly.space, depth, frame, check_partition=False)


# -- SVG ------------------------------------------------------------------------------

def _clip_line(nx_, ny_, d, box):
    """Segment of ``{nx*x + ny*y = d}`` inside ``box = (x0, y0, x1, y1)``."""
    x0, y0, x1, y1 = box
    pts = []
    if abs(ny_) > 1e-15:
        for x in (x0, x1):
            y = (d - nx_ * x) / ny_
            if y0 - 1e-12 <= y <= y1 + 1e-12:
                pts.append((x, y))
    if abs(nx_) > 1e-15:
        for y in (y0, y1):
            x = (d - ny_ * y) / nx_
            if x0 - 1e-12 <= x <= x1 + 1e-12:
                pts.append((x, y))
    pts = sorted(set((round(a, 12), round(b, 12)) for a, b in pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def _num(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def render_svg(spheres: Sequence, viewport=(-2.0, -2.0, 2.0, 2.0), stroke: str = "#1f4fbf") -> str:
    """Plain SVG 1.1 drawing of circles (and bend-zero lines) in the plane.

    The y axis points up in the model and down in SVG, so y is negated.
    """
    sph = [s.sphere if isinstance(s, OrbitRecord) else s for s in spheres]
    for s in sph:
        if len(s.x) != 2:
            raise ValueError(f"SVG output needs circles in the plane, got dimension {len(s.x)}")
    x0, y0, x1, y1 = (float(v) for v in viewport)
    w, h = x1 - x0, y1 - y0
    lw = max(w, h) / 800
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'viewBox="{_num(x0)} {_num(-y1)} {_num(w)} {_num(h)}" width="800" height="{_num(800 * h / w)}">',
             f'<g fill="none" stroke="{stroke}" stroke-width="{_num(lw)}">']
    for s in sph:
        b = float(s.bend)
        if s.bend:
            cx, cy = (float(c) / b for c in s.x)
            r = 1 / abs(b)
            lines.append(f'<circle cx="{_num(cx)}" cy="{_num(-cy)}" r="{_num(r)}"/>')
        else:
            nx_, ny_ = (float(c) for c in s.x)
            seg = _clip_line(nx_, ny_, float(s.cobend) / 2, (x0, y0, x1, y1))
            if seg:
                (ax, ay), (bx, by) = seg
                lines.append(f'<line x1="{_num(ax)}" y1="{_num(-ay)}" x2="{_num(bx)}" y2="{_num(-by)}"/>')
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"
