"""Vinberg's algorithm over Z for integral Lorentzian forms.

Roots are enumerated in order of the distance ``(e, v0)^2 / (e, e)`` from a
basepoint ``v0``.  For a norm ``k`` the admissible roots lie in the lattice
``L_k = {e : 2 M e = 0 mod k}``; writing ``t = -(e, v0)`` the slice of ``L_k``
at level ``t`` is ``m p_k + span(U_k)`` with ``t = m g_k``.

Two kinds of basepoint are supported:

* time-like ``(v0, v0) < 0``: the slice is an ellipsoid (Fincke-Pohst);
* isotropic ``(v0, v0) = 0`` (a cusp): the slice is cut down to a polytope by
  the affine chamber of the cusp stabilizer, and the coordinate along ``v0``
  is forced by the norm equation.  Ties are broken as for the perturbed
  basepoint ``v0 + eps * w``.
"""

from __future__ import annotations

import heapq
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd, isqrt
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .diagram import Diagram
from .exact import ExactMatrix
from .intlat import (complete_basis, congruence_lattice, hyperplane_section, integer_kernel,
                     lll_reduce, solve_rational, vgcd)
from .qspace import Polyhedron, QuadraticSpace


FINITE_VOLUME = "FiniteVolume"
BUDGET_EXHAUSTED = "BudgetExhausted"


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("REFLEKT_WORKERS", "1")))
    except ValueError:
        return 1


def _qf(m, u, v) -> int:
    return int(np.asarray(u, dtype=object) @ np.asarray(m, dtype=object) @ np.asarray(v, dtype=object))


def candidate_norms(space: QuadraticSpace) -> list[int]:
    """Divisors of ``2 * lam`` where ``lam`` is the exponent of ``M^{-1}`` modulo ``Z``."""
    inv = space.matrix.inverse().to_fractions()  # raises on singular input
    lam = 1
    for r in inv:
        for x in r:
            lam = lam * x.denominator // gcd(lam, x.denominator)
    return _divisors(2 * lam)


def default_basepoint(space: QuadraticSpace) -> tuple[int, ...]:
    if not space.is_diagonal():
        raise ValueError("basepoint required for non-diagonal forms")
    m = space.int_matrix
    negs = [i for i in range(space.dim) if m[i][i] < 0]
    return tuple(int(i == negs[0]) for i in range(space.dim))


# -- per-norm slice data --------------------------------------------------------------

@dataclass
class _NormClass:
    k: int
    g: int                      # (L_k, v0) = g Z
    p: tuple[int, ...]          # (p, v0) = -g
    u: list[tuple[int, ...]]    # lattice directions complementary to p (and to v0 at a cusp)
    a: np.ndarray               # Gram of u
    up: np.ndarray              # (u_j, p)
    pp: int                     # (p, p)
    c: int = 0                  # cusp only: c v0 generates L_k along v0
    box: tuple | None = None    # cusp only: float bounds of the unit polytope


def _norm_class(m: list[list[int]], v0: Sequence[int], k: int, cusp: bool) -> _NormClass:
    n = len(m)
    basis = congruence_lattice([[2 * x for x in r] for r in m], k)
    mv0 = [sum(m[i][j] * v0[j] for j in range(n)) for i in range(n)]
    wk = [sum(b[i] * mv0[i] for i in range(n)) for b in basis]
    g, x0, ker = hyperplane_section(wk)

    def lift(x):
        return tuple(sum(x[i] * basis[i][j] for i in range(n)) for j in range(n))

    p = tuple(-c for c in lift(x0))
    u = [lift(x) for x in ker]
    c = 0
    if cusp:
        g2 = vgcd([2 * x for x in mv0])
        c = k // gcd(k, g2)
        q = solve_rational(u, [c * x for x in v0])
        if any(x.denominator != 1 for x in q):
            raise ArithmeticError("multiple of the cusp vector is not in the slice lattice")
        rows = complete_basis([int(x) for x in q])
        u = [tuple(sum(r[i] * u[i][j] for i in range(len(u))) for j in range(n)) for r in rows[1:]]
    if u:
        u = lll_reduce(u, gram=m)
    a = np.array([[_qf(m, x, y) for y in u] for x in u], dtype=np.int64).reshape(len(u), len(u))
    up = np.array([_qf(m, x, p) for x in u], dtype=np.int64)
    return _NormClass(k, g, p, u, a, up, _qf(m, p, p), c)


@dataclass(frozen=True)
class Candidate:
    coords: tuple[int, ...]
    norm: int
    distance: Fraction
    key: tuple = ()


@dataclass
class VinbergState:
    """Mutable state of one run: form, basepoint, accepted roots."""

    space: QuadraticSpace
    v0: tuple[int, ...]
    accepted: list[tuple[int, ...]] = field(default_factory=list)
    accepted_norms: list[int] = field(default_factory=list)
    distances: list[Fraction] = field(default_factory=list)
    w: tuple[int, ...] | None = None
    cone_size: int = 0

    def __post_init__(self):
        if not self.space.is_integral:
            raise ValueError("Vinberg's algorithm needs an integral form")
        self.m = self.space.int_matrix
        self.n = self.space.dim
        if len(self.v0) != self.n:
            raise ValueError(f"basepoint has {len(self.v0)} coordinates, form has {self.n}")
        self.v0 = tuple(int(x) for x in self.v0)
        self.v0_norm = _qf(self.m, self.v0, self.v0)
        if self.v0_norm > 0:
            raise ValueError("basepoint must be time-like or isotropic")
        self.cusp = self.v0_norm == 0
        if self.cusp:
            g = vgcd(self.v0)
            self.v0 = tuple(x // g for x in self.v0)
        self.mv0 = tuple(int(x) for x in np.asarray(self.m, dtype=object) @ np.asarray(self.v0, dtype=object))
        self.norms = candidate_norms(self.space)
        self.classes = {k: _norm_class(self.m, self.v0, k, self.cusp) for k in self.norms}
        self._mat = np.asarray(self.m, dtype=np.int64)
        self._acc_m = np.zeros((0, self.n), dtype=np.int64)  # rows e_i M of accepted roots

    def inner(self, u, v) -> int:
        return _qf(self.m, u, v)

    def distance(self, e) -> Fraction:
        return Fraction(self.inner(e, self.v0) ** 2, self.inner(e, e))

    def _push(self, e, k, d):
        self.accepted.append(tuple(e))
        self.accepted_norms.append(k)
        self.distances.append(d)
        row = np.asarray(e, dtype=np.int64) @ self._mat
        self._acc_m = np.vstack([self._acc_m, row])

    def polyhedron(self) -> Polyhedron:
        return Polyhedron(self.space, [list(e) for e in self.accepted])


def accept(state: VinbergState, e: Sequence[int]) -> bool:
    """Append ``e`` iff it makes a non-obtuse angle with every accepted root."""
    e = tuple(int(x) for x in e)
    if len(state.accepted):
        prods = state._acc_m @ np.asarray(e, dtype=np.int64)
        if np.any(prods > 0):
            return False
    k = state.inner(e, e)
    state._push(e, k, state.distance(e))
    return True


# -- stabilizer of the basepoint ----------------------------------------------------

def _primitive(e) -> bool:
    return vgcd(e) == 1


def _level_zero_timelike(state: VinbergState) -> list[tuple[tuple[int, ...], int]]:
    out = set()
    for k, cl in state.classes.items():
        if not cl.u:
            continue
        pts = _kernels.ellipsoid_points(cl.a, np.zeros(len(cl.u)), k)
        for y in pts:
            if int(y @ cl.a @ y) != k:
                continue
            e = tuple(int(sum(int(y[j]) * cl.u[j][i] for j in range(len(y)))) for i in range(state.n))
            if _primitive(e):
                out.add((max(e, tuple(-x for x in e)), k))
    return sorted(out)


def _generic_direction(state: VinbergState, roots, base) -> tuple[int, ...]:
    """Deterministic ``w`` in ``base[0] + span(base[1:])`` avoiding every mirror in ``roots``."""
    ker = base[1:]
    for K in range(2, 10_000):
        coeff = [K ** (j + 1) + j for j in range(len(ker))]
        w = tuple(base[0][i] + sum(c * v[i] for c, v in zip(coeff, ker)) for i in range(state.n))
        if all(state.inner(e, w) != 0 for e in roots):
            return w
    raise RuntimeError("no generic direction found")


def stabilizer_cone(space: QuadraticSpace, v0: Sequence[int]) -> list[tuple[int, ...]]:
    """Simple roots of the reflection subgroup fixing a time-like ``v0``."""
    state = VinbergState(space, tuple(v0))
    if state.cusp:
        raise ValueError("stabilizer_cone needs a time-like basepoint; cusps use cusp_chamber")
    return _cone_timelike(state)


def _cone_timelike(state: VinbergState) -> list[tuple[int, ...]]:
    roots = _level_zero_timelike(state)
    perp = integer_kernel([list(state.mv0)])
    if not perp:
        return []
    if state.w is None:
        state.w = _generic_direction(state, [e for e, _ in roots], [tuple([0] * state.n)] + perp)
    w = state.w
    oriented = []
    for e, k in roots:
        s = state.inner(e, w)
        if s > 0:
            e, s = tuple(-x for x in e), -s
        oriented.append((Fraction(s * s, k), e, k))
    oriented.sort()
    chosen: list[tuple[int, ...]] = []
    for _, e, k in oriented:
        if all(state.inner(e, f) <= 0 for f in chosen):
            chosen.append(e)
    return chosen


def _cusp_level_zero(state: VinbergState, bound: Fraction):
    """Roots ``e`` in ``v0^perp`` with ``0 < -(e, w)`` and ``(e, w)^2 / k <= bound``."""
    w = state.w
    v0w = state.inner(state.v0, w)
    out = []
    on_mirror = 0
    for k, cl in state.classes.items():
        if not cl.u:
            continue
        step = cl.c * v0w  # (e, w) changes by this when a increases by one
        lim = bound * k
        pts = _kernels.ellipsoid_points(cl.a, np.zeros(len(cl.u)), k)
        for y in pts:
            if int(y @ cl.a @ y) != k:
                continue
            base = tuple(int(sum(int(y[j]) * cl.u[j][i] for j in range(len(y)))) for i in range(state.n))
            s0 = state.inner(base, w)
            # all integers a with 0 < -(s0 + a*step) and (s0 + a*step)^2 <= lim
            r = isqrt(int(lim)) + 1
            ends = ((-r - s0) / step, (r - s0) / step)
            lo = int(np.floor(min(ends))) - 1
            hi = int(np.ceil(max(ends))) + 1
            for a in range(lo, hi + 1):
                s = s0 + a * step
                if s == 0:
                    on_mirror += 1
                if s >= 0 or s * s > lim:
                    continue
                e = tuple(base[i] + a * cl.c * state.v0[i] for i in range(state.n))
                if _primitive(e):
                    out.append((Fraction(s * s, k), e, k))
    out.sort()
    return out, on_mirror


def cusp_chamber(state: VinbergState, max_rounds: int = 40) -> list[tuple[int, ...]]:
    """Walls of the affine chamber of the cusp stabilizer containing the direction ``w``.

    ``w`` satisfies ``(w, v0) < 0``; seen from the cusp it is a point of the
    horosphere, and the chamber is found by the Euclidean version of the
    algorithm with that point as basepoint.  A ``w`` lying on a mirror is
    replaced by the next one in a fixed sequence.
    """
    from .diagram import classify_subdiagram  # local: avoids import cycle at module load

    g, x0, _ = hyperplane_section(list(state.mv0))
    base0 = tuple(-x for x in x0)  # (base0, v0) = -g < 0
    perp = integer_kernel([list(state.mv0)])
    target_rank = state.n - 2
    fixed = state.w is not None
    for w in ([state.w] if fixed else _direction_sequence(base0, perp)):
        state.w = w
        bound = Fraction(1)
        for _ in range(max_rounds):
            cands, on_mirror = _cusp_level_zero(state, bound)
            if on_mirror:
                if fixed:
                    raise ValueError("supplied direction lies on a mirror of the cusp stabilizer")
                break
            chosen: list[tuple[int, ...]] = []
            for _, e, k in cands:
                if all(state.inner(e, f) <= 0 for f in chosen):
                    chosen.append(e)
            if len(chosen) >= 2:
                d = Diagram([[state.inner(a, b) for b in chosen] for a in chosen])
                cls = classify_subdiagram(d, range(len(chosen)))
                if cls.kind == "parabolic" and cls.rank == target_rank:
                    return chosen
            bound *= 4
        else:
            raise RuntimeError("cusp stabilizer chamber is not compact (or the search bound was reached)")
    raise RuntimeError("no generic direction found")


def _direction_sequence(base0, perp):
    # N base0 + small kernel part: seen from the cusp this is a point with
    # denominator N, so it avoids the special points of the affine group
    n = len(base0)
    for K in range(1, 10_000):
        big = 1009 + 2 * K
        coeff = [(j + 1) * (K + 1) + j * j for j in range(len(perp))]
        yield tuple(big * base0[i] + sum(c * v[i] for c, v in zip(coeff, perp)) for i in range(n))


# -- level enumeration ------------------------------------------------------------

def _level_timelike(state: VinbergState, cl: _NormClass, mult: int) -> list[Candidate]:
    k, n = cl.k, state.n
    t = mult * cl.g
    d = len(cl.u)
    p = np.asarray(cl.p, dtype=object)
    if d == 0:
        e = tuple(int(mult * x) for x in cl.p)
        return [Candidate(e, k, Fraction(t * t, k), (e,))] if state.inner(e, e) == k and _primitive(e) else []
    a_fr = ExactMatrix([[int(x) for x in r] for r in cl.a]).to_fractions()
    a_inv = ExactMatrix(a_fr).inverse().to_fractions()
    b = [Fraction(int(x)) for x in cl.up]
    ainv_b = [sum(a_inv[i][j] * b[j] for j in range(d)) for i in range(d)]
    center = [-mult * x for x in ainv_b]
    r2 = k - mult * mult * (cl.pp - sum(b[i] * ainv_b[i] for i in range(d)))
    if r2 < 0:
        return []
    pts = _kernels.ellipsoid_points(cl.a, np.array([float(x) for x in center]), float(r2))
    out = []
    umat = np.asarray(cl.u, dtype=object)
    for y in pts:
        e = tuple(int(x) for x in mult * p + np.asarray(y, dtype=object) @ umat)
        if state.inner(e, e) == k and _primitive(e):
            out.append(Candidate(e, k, Fraction(t * t, k), (e,)))
    return out


def _unit_polytope(state: VinbergState, cl: _NormClass, chamber):
    """Coordinate box of ``{z : (p + U z, f) <= 0 for f in chamber}``."""
    from scipy.optimize import linprog

    d = len(cl.u)
    g = np.array([[state.inner(u, f) for u in cl.u] for f in chamber], dtype=float)
    h = np.array([-state.inner(cl.p, f) for f in chamber], dtype=float)
    lo, hi = [], []
    for j in range(d):
        c = np.zeros(d)
        c[j] = 1.0
        r1 = linprog(c, A_ub=g, b_ub=h, bounds=[(None, None)] * d, method="highs")
        r2 = linprog(-c, A_ub=g, b_ub=h, bounds=[(None, None)] * d, method="highs")
        if r1.status != 0 or r2.status != 0:
            raise RuntimeError(f"cusp polytope LP failed for norm {cl.k}: {r1.message} / {r2.message}")
        lo.append(r1.fun)
        hi.append(-r2.fun)
    gi = np.array([[state.inner(u, f) for u in cl.u] for f in chamber], dtype=np.int64)
    hp = np.array([-state.inner(cl.p, f) for f in chamber], dtype=np.int64)
    return np.array(lo), np.array(hi), gi, hp


def _level_cusp(state: VinbergState, cl: _NormClass, mult: int, chamber) -> list[Candidate]:
    k, n = cl.k, state.n
    t = mult * cl.g
    if cl.box is None:
        cl.box = _unit_polytope(state, cl, chamber)
    lo_f, hi_f, gi, hp = cl.box
    lo = np.floor(mult * lo_f - 1e-7).astype(np.int64)
    hi = np.ceil(mult * hi_f + 1e-7).astype(np.int64)
    modulus = 2 * cl.c * mult * cl.g
    c0 = mult * mult * cl.pp
    pts = _kernels.polytope_points(lo, hi, gi, mult * hp, cl.a, mult * cl.up, c0, k, modulus)
    out = []
    umat = np.asarray(cl.u, dtype=object)
    p = np.asarray(cl.p, dtype=object)
    v0 = np.asarray(state.v0, dtype=object)
    w = state.w
    for y in pts:
        base = mult * p + np.asarray(y, dtype=object) @ umat
        qv = state.inner(base, base)
        a, rem = divmod(qv - k, modulus)
        if rem:
            continue
        e = tuple(int(x) for x in base + a * cl.c * v0)
        if state.inner(e, e) != k or not _primitive(e):
            continue
        tie = Fraction(-t * state.inner(e, w), k)
        out.append(Candidate(e, k, Fraction(t * t, k), (tie, e)))
    return out


def enumerate_roots(state: VinbergState, max_distance: Fraction | None = None,
                    chamber=None) -> Iterator[Candidate]:
    """Candidate roots with ``(e, v0) < 0`` in non-decreasing distance.

    Ties are resolved lexicographically (time-like basepoint) or by the
    perturbed distance and then lexicographically (cusp).  Different norm
    classes at the same distance are evaluated on ``REFLEKT_WORKERS`` threads
    and merged deterministically.
    """
    if state.cusp and chamber is None:
        raise ValueError("cusp enumeration needs the stabilizer chamber")
    heap = [(Fraction(cl.g * cl.g, k), k, 1) for k, cl in state.classes.items()]
    heapq.heapify(heap)
    nworkers = _workers()
    pool = ThreadPoolExecutor(nworkers) if nworkers > 1 else None

    def level(item):
        _, k, mult = item
        cl = state.classes[k]
        if state.cusp:
            return _level_cusp(state, cl, mult, chamber)
        return _level_timelike(state, cl, mult)

    try:
        while heap:
            dist = heap[0][0]
            if max_distance is not None and dist > max_distance:
                return
            batch = []
            while heap and heap[0][0] == dist:
                item = heapq.heappop(heap)
                batch.append(item)
                _, k, mult = item
                cl = state.classes[k]
                heapq.heappush(heap, (Fraction((mult + 1) ** 2 * cl.g * cl.g, k), k, mult + 1))
            results = list(pool.map(level, batch)) if pool else [level(b) for b in batch]
            cands = sorted((c for r in results for c in r), key=lambda c: c.key)
            yield from cands
    finally:
        if pool:
            pool.shutdown()


# -- finite volume -------------------------------------------------------------------

def _elliptic_sets(diag: Diagram, max_size: int) -> list[set]:
    bad_pair = {(i, j) for (i, j), k in diag.edges.items() if k.kind in ("bold", "dotted")}
    levels: list[set] = [{()}]
    for size in range(1, max_size + 1):
        nxt = set()
        for s in levels[-1]:
            start = s[-1] + 1 if s else 0
            for v in range(start, diag.size):
                if any((u, v) in bad_pair for u in s):
                    continue
                t = s + (v,)
                if size <= 1 or diag.is_elliptic(t):
                    nxt.add(t)
        levels.append(nxt)
    return levels


def _parabolic_completions(diag: Diagram, s: tuple[int, ...]) -> int:
    comps = diag.components(s)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    sset = set(s)
    completers = []
    for v in range(diag.size):
        if v in sset:
            continue
        touched = frozenset(comp_of[u] for u in s if diag.edge(u, v).kind != "none")
        if not touched:
            continue
        vs = [u for i in touched for u in comps[i]] + [v]
        if diag.is_affine_component(vs):
            completers.append((v, touched))
    full = frozenset(range(len(comps)))
    count = 0

    def cover(remaining, start, used):
        nonlocal count
        if not remaining:
            count += 1
            return
        first = min(remaining)
        for idx in range(start, len(completers)):
            v, t = completers[idx]
            if first in t and t <= remaining and all(diag.edge(v, u).kind == "none" for u in used):
                cover(remaining - t, 0, used + [v])

    cover(full, 0, [])
    return count


def vertex_census(diag: Diagram, dim: int) -> dict:
    """Counts used by the finite-volume criterion in hyperbolic dimension ``dim``."""
    levels = _elliptic_sets(diag, dim)
    faces = levels[dim - 1]
    proper = levels[dim]
    report = {"edges": len(faces), "proper_vertices": len(proper), "bad_edges": []}
    for s in sorted(faces):
        ext = sum(1 for v in range(diag.size) if v not in s and tuple(sorted(s + (v,))) in proper)
        ext += _parabolic_completions(diag, s)
        if ext != 2:
            report["bad_edges"].append((s, ext))
    return report


def finite_volume_check(poly, dim: int | None = None) -> bool:
    """Subdiagram criterion: every elliptic subdiagram of rank ``dim - 1`` extends
    in exactly two ways to an elliptic subdiagram of rank ``dim`` or a parabolic
    subdiagram of rank ``dim - 1``."""
    if isinstance(poly, Diagram):
        if dim is None:
            raise ValueError("dimension required for a bare diagram")
        diag = poly
    else:
        diag = Diagram.from_polyhedron(poly)
        dim = poly.dim if dim is None else dim
    if diag.size < dim + 1:
        return False
    census = vertex_census(diag, dim)
    return census["edges"] > 0 and not census["bad_edges"]


# -- full run --------------------------------------------------------------------------

@dataclass
class RunReport:
    status: str
    roots: list[tuple[int, ...]]
    norms: list[int]
    distances: list[Fraction]
    basepoint: tuple[int, ...]
    cusp: bool
    elapsed: float
    candidates: int
    cone: int

    def polyhedron(self, space: QuadraticSpace) -> Polyhedron:
        return Polyhedron(space, [list(e) for e in self.roots])

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "basepoint": list(self.basepoint),
            "cusp": self.cusp,
            "roots": [list(e) for e in self.roots],
            "norms": self.norms,
            "distances": [str(d) for d in self.distances],
            "stabilizer_roots": self.cone,
            "candidates_examined": self.candidates,
        }


def run_vinberg(space: QuadraticSpace, v0: Sequence[int] | None = None, max_roots: int = 200,
                max_distance: Fraction | int | None = None, check_volume: bool = True,
                stop_at: int | None = None, direction: Sequence[int] | None = None) -> RunReport:
    """Run the algorithm until the polyhedron has finite volume or a budget runs out.

    ``stop_at`` truncates the run after that many accepted roots (status
    BudgetExhausted unless the truncated polyhedron already has finite volume).
    ``direction`` fixes the generic vector ``w`` that selects the stabilizer
    chamber; by default a deterministic one is chosen.
    """
    t0 = time.perf_counter()
    if v0 is None:
        v0 = default_basepoint(space)
    state = VinbergState(space, tuple(v0))
    if direction is not None:
        state.w = tuple(int(x) for x in direction)
    if max_distance is not None:
        max_distance = Fraction(max_distance)
    if state.cusp:
        chamber = cusp_chamber(state)
    else:
        chamber = _cone_timelike(state)
    for e in chamber:
        accept(state, e)
    state.cone_size = len(chamber)
    dim = space.dim - 1
    cap = max_roots if stop_at is None else min(max_roots, stop_at)
    seen = 0
    status = BUDGET_EXHAUSTED
    pending_check = False
    last = None

    def done() -> bool:
        return check_volume and finite_volume_check(state.polyhedron(), dim)

    if len(state.accepted) > dim and done():
        status = FINITE_VOLUME
    else:
        for cand in enumerate_roots(state, max_distance, chamber if state.cusp else None):
            if last is not None and cand.distance != last and pending_check:
                pending_check = False
                if done():
                    status = FINITE_VOLUME
                    break
            last = cand.distance
            seen += 1
            if accept(state, cand.coords):
                pending_check = True
                if len(state.accepted) >= cap:
                    break
        else:
            if pending_check and done():
                status = FINITE_VOLUME
        if status != FINITE_VOLUME and pending_check and len(state.accepted) >= cap and done():
            status = FINITE_VOLUME
    return RunReport(status, list(state.accepted), list(state.accepted_norms), list(state.distances),
                     state.v0, state.cusp, time.perf_counter() - t0, seen, state.cone_size)


# -- infinite symmetry certificate -----------------------------------------------------------

@dataclass
class SymmetryCertificate:
    preserves_form: bool
    direction: str | None          # "S" if S e_src = e_dst, "S^-1" if S^-1 e_src = e_dst
    charpoly_factors: list[str]
    non_cyclotomic: str | None

    def __bool__(self):
        return self.preserves_form and self.direction is not None and self.non_cyclotomic is not None

    def to_json(self) -> dict:
        return {"valid": bool(self), "preserves_form": self.preserves_form, "direction": self.direction,
                "charpoly_factors": self.charpoly_factors, "non_cyclotomic_factor": self.non_cyclotomic}


def verify_infinite_symmetry(space: QuadraticSpace, s, src: Sequence[Sequence[int]],
                             dst: Sequence[Sequence[int]]) -> SymmetryCertificate:
    import sympy

    m = sympy.Matrix(space.int_matrix)
    sm = sympy.Matrix([[int(x) for x in r] for r in s])
    if sm.shape != m.shape:
        raise ValueError(f"matrix shape {sm.shape} does not match form {m.shape}")
    if len(src) != len(dst):
        raise ValueError("root correspondence needs equally many sources and destinations")
    preserves = sm.T * m * sm == m
    direction = None
    if preserves and abs(sm.det()) == 1:
        inv = sm.inv()
        for name, op in (("S", sm), ("S^-1", inv)):
            if all(list(op * sympy.Matrix(a)) == list(b) for a, b in zip(src, dst)):
                direction = name
                break
    x = sympy.Symbol("x")
    poly = sm.charpoly(x)
    factors = [f for f, _ in sympy.factor_list(poly.as_expr(), x)[1]]
    witness = None
    for f in factors:
        if not sympy.Poly(f, x).is_cyclotomic:
            witness = str(f)
            break
    return SymmetryCertificate(bool(preserves), direction, [str(f) for f in factors], witness)


# -- local obstruction to roots --------------------------------------------------------

def _prime_divisors(n: int) -> list[int]:
    out, p = [], 2
    n = abs(n)
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _form_content(a: list[list[int]]) -> int:
    """gcd of all values of ``x^T A x`` over integer ``x``."""
    c = 0
    for i in range(len(a)):
        c = gcd(c, a[i][i])
        for j in range(i + 1, len(a)):
            c = gcd(c, 2 * a[i][j])
    return c


def _lift_empty(a: np.ndarray, b: np.ndarray, k: int, c: int, p: int, bound: int,
                max_states: int) -> int | None:
    """Smallest ``p^j <= bound`` such that no ``x mod p^j`` has ``x^T A x = k``
    mod ``c p^j`` with ``B x`` nonzero mod ``p``; ``None`` if not found.

    ``A = B^T M B`` is the form on the sublattice of vectors with ``2 M e = 0 mod k``
    and ``c`` its content, so the test depends only on ``x mod p^j``.
    """
    n = a.shape[0]
    digits = np.array(list(product(range(p), repeat=n)), dtype=object)
    level = digits[np.any((digits @ b.T) % p != 0, axis=1)]
    pj = p
    while pj <= bound:
        q = np.einsum("ni,ij,nj->n", level, a, level)
        level = level[(q - k) % (c * pj) == 0]
        if len(level) == 0:
            return pj
        if pj * p > bound or len(level) * len(digits) > max_states:
            return None
        level = (level[:, None, :] + pj * digits[None, :, :]).reshape(-1, n)
        pj *= p
    return None


def no_roots_obstruction(space: QuadraticSpace, modulus_bound: int = 10**5,
                         max_states: int = 200_000) -> dict | None:
    """Per-norm congruence certificates that the form has no crystallographic roots.

    A root of norm ``k`` lies in ``L_k = {e : 2 M e = 0 mod k}``.  For each candidate
    norm the restricted form either has a content not dividing ``k`` (certificate
    modulus ``1``) or the equation ``Q(e) = k`` with ``e`` primitive has no solution
    modulo some prime power.  Returns ``{k: {"prime", "modulus", "content"}}``
    or ``None`` when some norm could not be excluded.
    """
    m = space.int_matrix
    det = int(space.matrix.det().rational_part())
    cert = {}
    for k in candidate_norms(space):
        basis = congruence_lattice([[2 * x for x in r] for r in m], k)
        b = np.asarray(basis, dtype=object).T
        a_int = [[_qf(m, u, v) for v in basis] for u in basis]
        c = _form_content(a_int)
        if k % c:
            cert[k] = {"prime": None, "modulus": 1, "content": c}
            continue
        a = np.asarray(a_int, dtype=object)
        found = None
        for p in _prime_divisors(2 * det * k):
            mod = _lift_empty(a, b, k, c, p, modulus_bound, max_states)
            if mod is not None:
                found = {"prime": p, "modulus": mod, "content": c}
                break
        if found is None:
            return None
        cert[k] = found
    return cert
