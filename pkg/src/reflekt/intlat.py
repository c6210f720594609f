"""Integer lattice utilities: unimodular column reduction, kernels, bases."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def vgcd(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = vgcd(v)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(int(x) // g for x in v)


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b):
    return [[sum(x * y for x, y in zip(r, c)) for c in zip(*b)] for r in a]


def matvec(a, v):
    return tuple(sum(x * y for x, y in zip(r, v)) for r in a)


def transpose(a):
    return [list(c) for c in zip(*a)]


def column_echelon(a: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Unimodular column reduction.

    Returns ``(h, u, rank)`` with ``h == a @ u`` in column echelon form and
    ``u`` unimodular; the last ``ncols - rank`` columns of ``u`` span the
    integer kernel of ``a``.
    """
    h = [list(map(int, r)) for r in a]
    m = len(h)
    n = len(h[0]) if m else 0
    u = identity(n)

    def colop(j, k, p, q, r, s):
        # (col_j, col_k) <- (p*col_j + q*col_k, r*col_j + s*col_k)
        for mat in (h, u):
            for row in mat:
                x, y = row[j], row[k]
                row[j], row[k] = p * x + q * y, r * x + s * y

    pos = 0
    for i in range(m):
        if pos >= n:
            break
        for k in range(pos + 1, n):
            a_, b_ = h[i][pos], h[i][k]
            if b_ == 0:
                continue
            g, x, y = ext_gcd(a_, b_)
            colop(pos, k, x, y, -b_ // g, a_ // g)
        if h[i][pos] != 0:
            if h[i][pos] < 0:
                for mat in (h, u):
                    for row in mat:
                        row[pos] = -row[pos]
            pos += 1
    return h, u, pos


def integer_kernel(a: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Z-basis of ``{x in Z^n : a x = 0}``."""
    _, u, rank = column_echelon(a)
    n = len(u)
    return [tuple(u[r][c] for r in range(n)) for c in range(rank, n)]


def hyperplane_section(w: Sequence[int]) -> tuple[int, tuple[int, ...], list[tuple[int, ...]]]:
    """Solve ``w . x = g`` over Z.

    Returns ``(g, x0, kernel)`` where ``g = gcd(w)``, ``w . x0 == g`` and
    ``kernel`` is a Z-basis of ``{x : w . x = 0}``.
    """
    h, u, rank = column_echelon([list(w)])
    n = len(u)
    if rank == 0:
        raise ValueError("zero linear form")
    g = h[0][0]
    x0 = tuple(u[r][0] for r in range(n))
    kernel = [tuple(u[r][c] for r in range(n)) for c in range(1, n)]
    return g, x0, kernel


def complete_basis(v: Sequence[int]) -> list[tuple[int, ...]]:
    """Extend a primitive vector to a Z-basis; ``v`` is returned first."""
    v = tuple(int(x) for x in v)
    if vgcd(v) != 1:
        raise ValueError(f"{v} is not primitive")
    _, u, _ = column_echelon([list(v)])
    # v^T u = e_1^T, so the first row of u^{-1} is v
    return [tuple(r) for r in integer_inverse(u)]


def integer_inverse(u: Sequence[Sequence[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix."""
    n = len(u)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(u)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    out = []
    for r in a:
        row = r[n:]
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append([int(x) for x in row])
    return out


def solve_unimodular(basis: Sequence[Sequence[int]], v: Sequence[int]) -> tuple[int, ...]:
    """Coordinates of ``v`` in a Z-basis given as a list of vectors."""
    cols = transpose([list(b) for b in basis])
    inv = integer_inverse(cols)
    return matvec(inv, v)


def solve_rational(cols: Sequence[Sequence], v: Sequence) -> tuple[Fraction, ...]:
    """Least-squares-free exact solve of ``B y = v`` where B has the given columns
    (full column rank); raises if inconsistent."""
    n = len(v)
    k = len(cols)
    a = [[Fraction(cols[j][i]) for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, n) if a[i][c] != 0), None)
        if piv is None:
            raise ValueError("columns are dependent")
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(n):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
    if any(a[i][k] != 0 for i in range(r, n)):
        raise ValueError("vector not in the span")
    return tuple(a[i][k] for i in range(k))


def congruence_lattice(a: Sequence[Sequence[int]], k: int) -> list[tuple[int, ...]]:
    """Z-basis of ``{x in Z^n : a x == 0 (mod k)}``."""
    m = len(a)
    n = len(a[0])
    big = [list(map(int, a[i])) + [k * int(i == j) for j in range(m)] for i in range(m)]
    ker = integer_kernel(big)
    basis = [tuple(v[:n]) for v in ker]
    return lll_reduce(basis)


def lll_reduce(basis: Sequence[Sequence[int]], gram=None, delta=Fraction(3, 4)) -> list[tuple[int, ...]]:
    """LLL-reduce a lattice basis w.r.t. a positive definite Gram form
    (Euclidean by default).  Exact rational arithmetic; small dimensions only."""
    b = [list(map(int, v)) for v in basis]
    k_ = len(b)
    if k_ <= 1:
        return [tuple(v) for v in b]
    n = len(b[0])
    if gram is None:
        gram = identity(n)

    def ip(u, v):
        return sum(u[i] * gram[i][j] * v[j] for i in range(n) for j in range(n) if gram[i][j])

    def gso():
        bstar, mu, norms = [], [[Fraction(0)] * k_ for _ in range(k_)], []
        for i in range(k_):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(ip(b[i], bstar[j])) / norms[j] if norms[j] else Fraction(0)
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
            norms.append(ip(v, v))
        return mu, norms

    mu, norms = gso()
    i = 1
    while i < k_:
        for j in range(i - 1, -1, -1):
            q = round(mu[i][j])
            if q:
                b[i] = [x - q * y for x, y in zip(b[i], b[j])]
                mu, norms = gso()
        if norms[i] >= (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            mu, norms = gso()
            i = max(i - 1, 1)
    return [tuple(v) for v in b]
