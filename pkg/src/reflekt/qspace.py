"""Quadratic spaces of signature (n, 1), roots, reflections and polyhedra."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .exact import ExactMatrix, ExactScalar, ONE, ZERO, dot, inertia, scalar, vec


class QuadraticSpace:
    """A real vector space with a symmetric bilinear form given by ``matrix``.

    The form is ``(x, y) = x^T M y``.  By default the signature must be
    Lorentzian, ``(dim - 1, 1)``.
    """

    def __init__(self, matrix, lorentzian: bool = True):
        m = matrix if isinstance(matrix, ExactMatrix) else ExactMatrix(matrix)
        if not m.is_symmetric():
            raise ValueError("form matrix is not symmetric")
        self.matrix = m
        self.dim = m.shape[0]
        self.signature = inertia(m.rows)[:2]
        if lorentzian and self.signature != (self.dim - 1, 1):
            raise ValueError(f"signature {self.signature} is not ({self.dim - 1}, 1)")
        self._ints = m.to_ints() if m.is_integer() else None

    @classmethod
    def diagonal(cls, *entries, lorentzian: bool = True) -> "QuadraticSpace":
        return cls(ExactMatrix.diag([scalar(e) for e in entries]), lorentzian=lorentzian)

    @property
    def is_integral(self) -> bool:
        return self._ints is not None

    @property
    def int_matrix(self) -> list[list[int]]:
        if self._ints is None:
            raise ValueError("form is not integral")
        return self._ints

    def is_diagonal(self) -> bool:
        return all(not self.matrix[i, j] for i in range(self.dim) for j in range(self.dim) if i != j)

    def inner(self, u: Sequence, v: Sequence) -> ExactScalar:
        if len(u) != self.dim or len(v) != self.dim:
            raise ValueError(f"dimension mismatch: {len(u)}, {len(v)} in a {self.dim}-dimensional space")
        if self._ints is not None and _all_int(u) and _all_int(v):
            m = self._ints
            return ExactScalar(sum(int(u[i]) * m[i][j] * int(v[j])
                                   for i in range(self.dim) for j in range(self.dim) if m[i][j]))
        return dot(vec(u), self.matrix @ vec(v))

    def norm(self, u: Sequence) -> ExactScalar:
        return self.inner(u, u)

    def root(self, coords: Sequence) -> "Root":
        c = vec(coords)
        n = self.norm(c)
        if n.sign() <= 0:
            raise ValueError(f"{[str(x) for x in c]} is not space-like (norm {n})")
        return Root(c, n)

    def to_json(self) -> dict:
        return {"dim": self.dim, "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "QuadraticSpace":
        space = cls(ExactMatrix(data["matrix"]))
        if "dim" in data and data["dim"] != space.dim:
            raise ValueError(f"dim {data['dim']} does not match matrix size {space.dim}")
        return space

    def __eq__(self, other):
        return isinstance(other, QuadraticSpace) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"QuadraticSpace({self.matrix.tolist()})"


def _all_int(v) -> bool:
    for x in v:
        if isinstance(x, int):
            continue
        if isinstance(x, ExactScalar) and x.is_integer():
            continue
        if isinstance(x, Fraction) and x.denominator == 1:
            continue
        return False
    return True


@dataclass(frozen=True)
class Root:
    """A space-like vector with its cached norm ``(e, e) > 0``."""

    coords: tuple
    norm: ExactScalar

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def int_coords(self) -> tuple[int, ...]:
        if not all(x.is_integer() for x in self.coords):
            raise ValueError("root has non-integer coordinates")
        return tuple(int(x.rational_part()) for x in self.coords)


def _coords(e) -> tuple:
    return e.coords if isinstance(e, Root) else vec(e)


def reflect(space: QuadraticSpace, e, x: Sequence) -> tuple:
    """``R_e(x) = x - 2 (e, x) / (e, e) e``."""
    e = _coords(e)
    x = vec(x)
    ee = space.norm(e)
    if not ee:
        raise ValueError("isotropic mirror vector")
    c = 2 * space.inner(e, x) / ee
    if not c:
        return x
    return tuple(a - c * b for a, b in zip(x, e))


def reflection_matrix(space: QuadraticSpace, e) -> ExactMatrix:
    """Matrix of ``R_e`` acting on column vectors."""
    n = space.dim
    cols = [reflect(space, e, [ONE if i == j else ZERO for i in range(n)]) for j in range(n)]
    return ExactMatrix(cols).T


def is_crystallographic_root(space: QuadraticSpace, e: Sequence[int]) -> bool:
    """True iff ``R_e`` preserves ``Z^n``: ``2 (e, b_i)`` divisible by ``(e, e)``."""
    m = space.int_matrix
    try:
        e = [int(x) if not isinstance(x, ExactScalar) else _as_int(x) for x in e]
    except ValueError:
        raise ValueError("crystallographic test needs an integer vector") from None
    if gcd(*e) != 1:
        raise ValueError(f"{tuple(e)} is not primitive")
    me = [sum(m[i][j] * e[j] for j in range(len(e))) for i in range(len(e))]
    ee = sum(a * b for a, b in zip(e, me))
    if ee <= 0:
        raise ValueError(f"{tuple(e)} is not space-like")
    return all((2 * x) % ee == 0 for x in me)


def _as_int(x: ExactScalar) -> int:
    if not x.is_integer():
        raise ValueError(f"{x} is not an integer")
    return int(x.rational_part())


def rescale_to_integral(space_or_matrix) -> tuple[QuadraticSpace, Fraction]:
    """Scale a rational form to the primitive integral multiple of signature ``(n, 1)``.

    Returns ``(integral_space, scale)`` with ``integral = scale * input``;
    ``scale`` is negative when the sign had to be flipped.
    """
    m = space_or_matrix.matrix if isinstance(space_or_matrix, QuadraticSpace) else ExactMatrix(space_or_matrix)
    fr = m.to_fractions()
    entries = [x for r in fr for x in r if x]
    if not entries:
        raise ValueError("zero matrix")
    den = lcm(*(x.denominator for x in entries))
    num = gcd(*(int(x * den) for x in entries))
    c = Fraction(den, num)
    scaled = [[x * c for x in r] for r in fr]
    pos, neg, _ = inertia(scaled)
    n = len(fr)
    if (pos, neg) == (1, n - 1) and n > 2:
        c = -c
        scaled = [[-x for x in r] for r in scaled]
    elif (pos, neg) != (n - 1, 1):
        raise ValueError(f"signature {(pos, neg)} cannot be made Lorentzian by scaling")
    return QuadraticSpace(ExactMatrix(scaled)), c


@dataclass
class Polyhedron:
    """``P = {x : (x, e_i) <= 0 for all roots e_i}`` in a Lorentzian space."""

    space: QuadraticSpace
    roots: list = field(default_factory=list)
    labels: list | None = None

    def __post_init__(self):
        self.roots = [r if isinstance(r, Root) else self.space.root(r) for r in self.roots]
        if self.labels is None:
            self.labels = [str(i + 1) for i in range(len(self.roots))]
        if len(self.labels) != len(self.roots):
            raise ValueError("one label per root required")

    def __len__(self):
        return len(self.roots)

    @property
    def dim(self) -> int:
        """Dimension of the hyperbolic space (one less than the vector space)."""
        return self.space.dim - 1

    def gram(self) -> list[list[ExactScalar]]:
        rs = self.roots
        return [[self.space.inner(a.coords, b.coords) for b in rs] for a in rs]

    def is_integral(self) -> bool:
        return self.space.is_integral and all(x.is_integer() for r in self.roots for x in r.coords)

    def check_acute(self) -> list[tuple[int, int]]:
        """Pairs with positive inner product (empty for an acute-angled polyhedron)."""
        g = self.gram()
        return [(i, j) for i in range(len(g)) for j in range(i + 1, len(g)) if g[i][j].sign() > 0]

    def to_json(self) -> dict:
        d = self.space.to_json()
        d["roots"] = [[str(x) for x in r.coords] for r in self.roots]
        if self.labels != [str(i + 1) for i in range(len(self.roots))]:
            d["labels"] = list(self.labels)
        return d

    @classmethod
    def from_json(cls, data: dict) -> "Polyhedron":
        space = QuadraticSpace.from_json(data)
        return cls(space, [vec(r) for r in data["roots"]], labels=data.get("labels"))

    def subset(self, indices: Iterable[int]) -> "Polyhedron":
        idx = list(indices)
        return Polyhedron(self.space, [self.roots[i] for i in idx], [self.labels[i] for i in idx])
