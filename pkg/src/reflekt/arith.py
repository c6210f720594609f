"""Arithmeticity test for reflection groups from the Gram matrix of a Coxeter polyhedron.

The three conditions checked are: the entries generate a totally real field
(automatic for real radical scalars), the Galois conjugates of a rescaled
Gram matrix are positive semi-definite, and the cyclic products of ``2G``
are algebraic integers of the ground field ``k``.  Over ``k = Q`` only the
last one carries information.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .diagram import Diagram, build_diagram
from .exact import ExactScalar, ONE, format_scalar, inertia, scalar


class UnsupportedField(ValueError):
    """Cyclic products generate a field that is neither Q nor real quadratic."""

    def __init__(self, witnesses):
        super().__init__("ground field is not Q or a real quadratic field: "
                         + ", ".join(format_scalar(w) for w in witnesses))
        self.witnesses = list(witnesses)


@dataclass(frozen=True)
class FieldDescription:
    kind: str  # "Rational" | "RealQuadratic" | "Unsupported"
    d: int = 1
    generators: tuple = ()

    def __str__(self):
        if self.kind == "RealQuadratic":
            return f"Q(sqrt({self.d}))"
        return "Q" if self.kind == "Rational" else "unsupported"


@dataclass
class ArithmeticityVerdict:
    quasi_arithmetic: bool
    arithmetic: bool
    field: FieldDescription
    failing_cycle: tuple | None = None   # (vertex tuple, value)
    products: list = field(default_factory=list)

    def to_json(self, labels: Sequence[str] | None = None) -> dict:
        def name(c):
            return [labels[i] if labels else i for i in c]

        out = {
            "quasi_arithmetic": self.quasi_arithmetic,
            "arithmetic": self.arithmetic,
            "field": str(self.field),
            "failing_cycle": None,
            "products": [{"cycle": name(c), "value": format_scalar(v)} for c, v in self.products],
        }
        if self.failing_cycle is not None:
            c, v = self.failing_cycle
            out["failing_cycle"] = {"cycle": name(c), "value": format_scalar(v)}
        return out


def _graph(diag: Diagram) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(diag.size))
    g.add_edges_from(diag.edges)
    return g


def cycle_basis(diag: Diagram | nx.Graph, root: int | None = None) -> list[tuple[int, ...]]:
    """Fundamental cycles of a spanning forest of the non-orthogonality graph."""
    g = diag if isinstance(diag, nx.Graph) else _graph(diag)
    if root is None:
        cycles = nx.cycle_basis(g)
    else:
        # networkx only takes a root for the first component; rotate the node order instead
        order = list(g.nodes)
        k = order.index(root)
        h = nx.Graph()
        h.add_nodes_from(order[k:] + order[:k])
        h.add_edges_from(g.edges)
        cycles = nx.cycle_basis(h, root)
    return [_canonical_cycle(c) for c in cycles]


def _canonical_cycle(c: Sequence[int]) -> tuple[int, ...]:
    """Rotate so the smallest vertex is first, and pick the smaller direction."""
    c = list(c)
    k = c.index(min(c))
    c = c[k:] + c[:k]
    rev = [c[0]] + c[1:][::-1]
    return tuple(min(c, rev))


def cycle_product(gram: Sequence[Sequence[ExactScalar]], cycle: Sequence[int]) -> ExactScalar:
    out = ONE
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        out = out * (2 * gram[a][b])
    return out


def cyclic_products(gram: Sequence[Sequence], cycles: Sequence[Sequence[int]]) -> list[tuple[tuple, ExactScalar]]:
    """Products of ``2G`` around each cycle, followed by every back-and-forth ``(2 g_ij)^2``."""
    g = [[scalar(x) for x in r] for r in gram]
    out = [(tuple(c), cycle_product(g, c)) for c in cycles]
    n = len(g)
    for i in range(n):
        for j in range(i + 1, n):
            if g[i][j]:
                out.append(((i, j), (2 * g[i][j]) ** 2))
    return out


def ground_field(values: Sequence[ExactScalar]) -> FieldDescription:
    rads = sorted({s for v in values for s in scalar(v).radicands() if s != 1})
    if not rads:
        return FieldDescription("Rational")
    if len(rads) == 1:
        return FieldDescription("RealQuadratic", rads[0], tuple(values))
    return FieldDescription("Unsupported", 0, tuple(v for v in values if set(scalar(v).radicands()) - {1}))


def is_algebraic_integer(x: ExactScalar, fld: FieldDescription) -> bool:
    """Integrality of ``x`` in the ring of integers of ``fld``."""
    x = scalar(x)
    if fld.kind == "Rational":
        return x.is_integer()
    d = fld.d
    t = dict(x.terms)
    a = Fraction(t.get(1, 0))
    b = Fraction(t.get(d, 0))
    if set(t) - {1, d}:
        return False
    if d % 4 == 1:
        a2, b2 = 2 * a, 2 * b
        return a2.denominator == 1 and b2.denominator == 1 and (a2 - b2) % 2 == 0
    return a.denominator == 1 and b.denominator == 1


def _tree_rescaled(gram: Sequence[Sequence[ExactScalar]], g: nx.Graph) -> list[list[ExactScalar]]:
    """``D G D`` with ``D_i`` the product of ``2 g`` along a spanning-tree path.

    Every entry becomes a closed-walk product, so it lies in the ground field.
    """
    n = len(gram)
    d = [ONE] * n
    for comp in nx.connected_components(g):
        root = min(comp)
        for u, v in nx.bfs_edges(g, root):
            d[v] = d[u] * 2 * gram[u][v]
    return [[d[i] * gram[i][j] * d[j] for j in range(n)] for i in range(n)]


def verdict(poly_or_diagram) -> ArithmeticityVerdict:
    diag = poly_or_diagram if isinstance(poly_or_diagram, Diagram) else build_diagram(poly_or_diagram)
    gram = diag.gram
    g = _graph(diag)
    prods = cyclic_products(gram, cycle_basis(g))
    fld = ground_field([v for _, v in prods])
    if fld.kind == "Unsupported":
        raise UnsupportedField(fld.generators)
    quasi = True
    if fld.kind == "RealQuadratic":
        conj = [[x.conjugate(fld.d) for x in r] for r in _tree_rescaled(gram, g)]
        quasi = inertia(conj)[1] == 0
    failing = next(((c, v) for c, v in prods if not is_algebraic_integer(v, fld)), None)
    return ArithmeticityVerdict(quasi, quasi and failing is None, fld, failing, prods)
