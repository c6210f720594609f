"""Exact arithmetic over rational multiples of square-free radicals.

An :class:`ExactScalar` is a finite sum ``sum(r_s * sqrt(s))`` with rational
``r_s`` and distinct square-free ``s >= 1``.  The set of such sums is closed
under ``+``, ``-``, ``*`` and division by nonzero elements (it is the union of
all multiquadratic fields), so every geometric quantity in this package is
computed exactly.

Matrices are plain tuples of tuples wrapped in :class:`ExactMatrix`; vectors
are tuples of scalars.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]


@lru_cache(maxsize=4096)
def squarefree_split(s: int) -> tuple[int, int]:
    """Return ``(a, b)`` with ``s == a*a*b`` and ``b`` square-free."""
    if s < 1:
        raise ValueError(f"radicand must be positive, got {s}")
    a, b = 1, 1
    p = 2
    while p * p <= s:
        e = 0
        while s % p == 0:
            s //= p
            e += 1
        a *= p ** (e // 2)
        if e % 2:
            b *= p
        p += 1 if p == 2 else 2
    return a, b * s


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


class ExactScalar:
    """Immutable value ``sum(coef * sqrt(radicand))`` in normal form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, value: Union[Rational, "ExactScalar", str] = 0):
        if isinstance(value, ExactScalar):
            self._terms = value._terms
        elif isinstance(value, str):
            self._terms = parse_scalar(value)._terms
        else:
            q = _frac(value)
            self._terms = ((1, q),) if q else ()
        self._hash = None

    @classmethod
    def _from_dict(cls, d: dict) -> "ExactScalar":
        obj = cls.__new__(cls)
        obj._terms = tuple(sorted((s, c) for s, c in d.items() if c))
        obj._hash = None
        return obj

    @classmethod
    def sqrt(cls, q: Union[Rational, "ExactScalar"]) -> "ExactScalar":
        """Square root of a non-negative rational."""
        if isinstance(q, ExactScalar):
            if not q.is_rational():
                raise ValueError(f"sqrt of non-rational value {q} leaves the scalar class")
            q = q.rational_part()
        q = _frac(q)
        if q < 0:
            raise ValueError(f"sqrt of negative value {q}")
        if q == 0:
            return ZERO
        return normalize(Fraction(1, q.denominator), q.numerator * q.denominator)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == 1)

    def is_integer(self) -> bool:
        return self.is_rational() and self.rational_part().denominator == 1

    def rational_part(self) -> Fraction:
        for s, c in self._terms:
            if s == 1:
                return c
        return Fraction(0)

    def radicands(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self._terms if s != 1)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        d = dict(self._terms)
        for s, c in other._terms:
            d[s] = d.get(s, 0) + c
        return ExactScalar._from_dict(d)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar._from_dict({s: -c for s, c in self._terms})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return ZERO
        d: dict = {}
        for s1, c1 in self._terms:
            for s2, c2 in other._terms:
                g = gcd(s1, s2)
                # sqrt(s1)*sqrt(s2) = g*sqrt(s1*s2/g^2), radicand stays square-free
                s = (s1 // g) * (s2 // g)
                d[s] = d.get(s, 0) + c1 * c2 * g
        return ExactScalar._from_dict(d)

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if not self._terms:
            raise ZeroDivisionError("inverse of zero")
        if len(self._terms) == 1:
            s, c = self._terms[0]
            return ExactScalar._from_dict({s: 1 / (c * s)})
        # rationalize one prime at a time: 1/(x + y*sqrt(p)) = (x - y*sqrt(p)) / (x^2 - p*y^2)
        p = _smallest_prime_factor(max(self.radicands()))
        conj = self.conjugate(p)
        denom = self * conj
        return conj * denom.inverse()

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_rational():
            q = other.rational_part()
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return ExactScalar._from_dict({s: c / q for s, c in self._terms})
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self, p: int) -> "ExactScalar":
        """Apply the field automorphism ``sqrt(p) -> -sqrt(p)`` for a prime ``p``.

        For ``p`` composite (a square-free ``d``), negates the terms whose
        radicand is divisible by an odd number of the primes of ``d``, which
        is the automorphism sending ``sqrt(q) -> -sqrt(q)`` for every prime
        ``q | d``.
        """
        primes = _prime_factors(p)
        d = {}
        for s, c in self._terms:
            flips = sum(1 for q in primes if s % q == 0)
            d[s] = -c if flips % 2 else c
        return ExactScalar._from_dict(d)

    # -- ordering ---------------------------------------------------------
    def sign(self) -> int:
        if not self._terms:
            return 0
        if len(self._terms) == 1:
            return 1 if self._terms[0][1] > 0 else -1
        # the radicals are linearly independent over Q, so a nonzero normal
        # form has nonzero value and interval refinement terminates
        k = 8
        while True:
            lo, hi = self._bounds(k)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            k *= 2

    def _bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        scale = 1 << bits
        lo = hi = Fraction(0)
        for s, c in self._terms:
            if s == 1:
                lo += c
                hi += c
                continue
            r = isqrt(s * scale * scale)
            a, b = Fraction(r, scale), Fraction(r + 1, scale)
            if c > 0:
                lo += c * a
                hi += c * b
            else:
                lo += c * b
                hi += c * a
        return lo, hi

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rational_part()) if self.is_rational() else hash(self._terms)
        return self._hash

    def __int__(self):
        if not self.is_integer():
            raise ValueError(f"{self} is not an integer")
        return int(self.rational_part())

    def __float__(self):
        return float(sum(float(c) * (s ** 0.5) for s, c in self._terms))

    def __repr__(self):
        return f"ExactScalar('{self}')"

    def __str__(self):
        return format_scalar(self)


def _coerce(x):
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactScalar(x)
    return NotImplemented


@lru_cache(maxsize=1024)
def _prime_factors(n: int) -> tuple[int, ...]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return tuple(out)


def _smallest_prime_factor(n: int) -> int:
    return _prime_factors(n)[0]


ZERO = ExactScalar(0)
ONE = ExactScalar(1)


def normalize(r: Rational, s: int) -> ExactScalar:
    """Return ``r*sqrt(s)`` with the radicand reduced to square-free form."""
    r = _frac(r)
    if s < 1:
        raise ValueError(f"radicand must be >= 1, got {s}")
    if r == 0:
        return ZERO
    a, b = squarefree_split(int(s))
    return ExactScalar._from_dict({b: r * a})


def scalar(x) -> ExactScalar:
    """Coerce ints, Fractions, strings and scalars to :class:`ExactScalar`."""
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    return ExactScalar(x)


def sign(x) -> int:
    if isinstance(x, ExactScalar):
        return x.sign()
    return (x > 0) - (x < 0)


# -- text form ----------------------------------------------------------------

def format_scalar(x: ExactScalar) -> str:
    if not x._terms:
        return "0"
    parts = []
    for s, c in x._terms:
        if s == 1:
            parts.append(str(c))
        elif c == 1:
            parts.append(f"sqrt({s})")
        elif c == -1:
            parts.append(f"-sqrt({s})")
        else:
            parts.append(f"{c}*sqrt({s})")
    return " + ".join(parts)


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>\d+(?:/\d+)?)\s*(?P<star>\*)?)?\s*
        (?:sqrt\(\s*(?P<rad>\d+(?:/\d+)?)\s*\))?\s*""",
    re.VERBOSE,
)


def parse_scalar(text: str) -> ExactScalar:
    """Parse ``"1/2 + -3/4*sqrt(2) - sqrt(8/7)"`` style sums."""
    src = text.strip()
    if not src:
        raise ValueError("empty scalar")
    pos, total, first = 0, ZERO, True
    while pos < len(src):
        m = _TERM.match(src, pos)
        if not m or m.end() == pos or (m.group("coef") is None and m.group("rad") is None):
            raise ValueError(f"cannot parse scalar {text!r} at offset {pos}")
        if not first and m.group("sign") is None:
            raise ValueError(f"missing operator in {text!r} at offset {pos}")
        if m.group("star") and m.group("rad") is None:
            raise ValueError(f"dangling '*' in {text!r}")
        sgn = -1 if m.group("sign") == "-" else 1
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        term = ExactScalar(sgn * coef)
        if m.group("rad"):
            term = term * ExactScalar.sqrt(Fraction(m.group("rad")))
        total = total + term
        pos, first = m.end(), False
        # "a + -b" is allowed: swallow a lone '+' before a signed term
        if pos < len(src) and src[pos] == "+" and pos + 1 < len(src):
            rest = src[pos + 1:].lstrip()
            if rest[:1] == "-":
                pos = len(src) - len(rest)
    return total


# -- vectors and matrices ------------------------------------------------------

Vector = tuple


def vec(xs: Iterable) -> tuple:
    return tuple(scalar(x) for x in xs)


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    acc = ZERO
    for a, b in zip(u, v):
        if a and b:
            acc = acc + a * b
    return acc


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, u):
    return tuple(c * a for a in u)


class ExactMatrix:
    """Dense matrix of :class:`ExactScalar` entries."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(scalar(x) for x in r) for r in rows)
        if self.rows and len({len(r) for r in self.rows}) != 1:
            raise ValueError("ragged matrix")

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, entries: Sequence) -> "ExactMatrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(zip(*self.rows)) if self.rows else ExactMatrix([])

    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            if self.shape[1] != other.shape[0]:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = list(zip(*other.rows))
            return ExactMatrix([[dot(r, c) for c in cols] for r in self.rows])
        v = tuple(other)
        return tuple(dot(r, v) for r in self.rows)

    def __rmatmul__(self, v):
        # row vector times matrix
        v = tuple(v)
        cols = zip(*self.rows)
        return tuple(dot(v, c) for c in cols)

    def __mul__(self, c):
        c = scalar(c)
        return ExactMatrix([[c * x for x in r] for r in self.rows])

    __rmul__ = __mul__

    def __add__(self, other: "ExactMatrix"):
        return ExactMatrix([vadd(a, b) for a, b in zip(self.rows, other.rows)])

    def __sub__(self, other: "ExactMatrix"):
        return ExactMatrix([vsub(a, b) for a, b in zip(self.rows, other.rows)])

    def __neg__(self):
        return self * -1

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            try:
                other = ExactMatrix(other)
            except (TypeError, ValueError):
                return False
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def is_symmetric(self) -> bool:
        n, m = self.shape
        return n == m and all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i))

    def is_rational(self) -> bool:
        return all(x.is_rational() for r in self.rows for x in r)

    def is_integer(self) -> bool:
        return all(x.is_integer() for r in self.rows for x in r)

    def to_fractions(self) -> list[list[Fraction]]:
        if not self.is_rational():
            raise ValueError("matrix has irrational entries")
        return [[x.rational_part() for x in r] for r in self.rows]

    def to_ints(self) -> list[list[int]]:
        if not self.is_integer():
            raise ValueError("matrix has non-integer entries")
        return [[int(x.rational_part()) for x in r] for r in self.rows]

    def inverse(self) -> "ExactMatrix":
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of non-square matrix")
        a = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col]), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            inv = a[col][col].inverse()
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return ExactMatrix([row[n:] for row in a])

    def det(self) -> ExactScalar:
        n, m = self.shape
        if n != m:
            raise ValueError("det of non-square matrix")
        a = [list(r) for r in self.rows]
        d = ONE
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col]), None)
            if piv is None:
                return ZERO
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                d = -d
            d = d * a[col][col]
            inv = a[col][col].inverse()
            for r in range(col + 1, n):
                if a[r][col]:
                    f = a[r][col] * inv
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return d

    def tolist(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.rows]

    def __repr__(self):
        return f"ExactMatrix({self.tolist()})"


def nullspace(rows: Sequence[Sequence]) -> list[tuple]:
    """Basis of the right kernel of a matrix over the scalar field."""
    a = [list(map(scalar, r)) for r in rows]
    ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [ZERO] * ncols
        v[fcol] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fcol]
        basis.append(tuple(v))
    return basis


def inertia(gram: Sequence[Sequence]) -> tuple[int, int, int]:
    """Return ``(pos, neg, zero)`` counts of a symmetric matrix (Sylvester).

    Works over any ordered field whose elements support ``+ - * /`` and
    :func:`sign`: Fractions or :class:`ExactScalar`.
    """
    a = [[Fraction(x) if isinstance(x, int) else x for x in r] for r in gram]
    n = len(a)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if sign(a[i][i]) != 0), None)
        if piv is None:
            # zero diagonal: combine two rows to create a nonzero pivot
            pair = next(((i, j) for i in active for j in active if i < j and sign(a[i][j]) != 0), None)
            if pair is None:
                break
            i, j = pair
            for k in range(n):
                a[i][k] = a[i][k] + a[j][k]
            for k in range(n):
                a[k][i] = a[k][i] + a[k][j]
            piv = i
        d = a[piv][piv]
        if sign(d) > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            if sign(a[i][piv]) != 0:
                f = a[i][piv] / d
                for k in active:
                    a[i][k] = a[i][k] - f * a[piv][k]
        for i in active:
            a[piv][i] = a[i][piv] = a[piv][i] * 0
    return pos, neg, n - pos - neg
