"""Coxeter-Vinberg diagrams: edge classification, subdiagram types, clusters, DOT/JSON export."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from .exact import ExactScalar, ONE, ZERO, format_scalar, inertia, scalar

# g^2 -> m for finite angles pi/m
_ANGLES = {Fraction(1, 4): 3, Fraction(1, 2): 4, Fraction(3, 4): 6}


class DiagramError(ValueError):
    """A Gram entry that is not a Coxeter angle, a parallel pair or a divergent pair."""

    def __init__(self, i: int, j: int, value, msg: str):
        super().__init__(f"pair ({i}, {j}): {msg} (g = {value})")
        self.pair = (i, j)
        self.value = value


@dataclass(frozen=True)
class EdgeKind:
    kind: str  # "none" | "simple" | "bold" | "dotted"
    m: int | None = None
    weight: ExactScalar | None = None

    def __str__(self):
        if self.kind == "simple":
            return f"m={self.m}"
        if self.kind == "dotted":
            return f"dotted({self.weight})"
        return self.kind

    @property
    def is_coxeter(self) -> bool:
        """True for orthogonal or finite-angle pairs."""
        return self.kind in ("none", "simple")


NONE = EdgeKind("none")
BOLD = EdgeKind("bold")


def classify_entry(g: ExactScalar, pair=(0, 0)) -> EdgeKind:
    """Edge kind of a normalized off-diagonal Gram entry ``g``."""
    s = g.sign()
    if s == 0:
        return NONE
    if s > 0:
        raise DiagramError(*pair, g, "positive off-diagonal entry, chamber is not acute-angled")
    if g == -1:
        return BOLD
    if g < -1:
        return EdgeKind("dotted", weight=-g)
    g2 = g * g
    if g2.is_rational() and g2.rational_part() in _ANGLES:
        return EdgeKind("simple", m=_ANGLES[g2.rational_part()])
    raise DiagramError(*pair, g, f"unrecognized angle, g^2 = {g2}")


def normalized_gram(raw: Sequence[Sequence[ExactScalar]]) -> list[list[ExactScalar]]:
    n = len(raw)
    inv = []
    for i in range(n):
        d = scalar(raw[i][i])
        if d.sign() <= 0:
            raise ValueError(f"root {i} is not space-like")
        inv.append(d)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = ONE
        for j in range(i + 1, n):
            x = scalar(raw[i][j])
            if x:
                p = inv[i] * inv[j]
                if not p.is_rational():
                    raise ValueError(f"norm product of roots {i}, {j} is irrational")
                x = x / ExactScalar.sqrt(p.rational_part())
            out[i][j] = out[j][i] = x
    return out


class Diagram:
    """Coxeter-Vinberg diagram of a finite set of roots.

    ``raw`` is the unnormalized Gram matrix (used for definiteness tests, which
    are scale-invariant and cheaper on rational entries); ``gram`` has unit
    diagonal.
    """

    def __init__(self, raw: Sequence[Sequence], labels: Sequence[str] | None = None):
        self.raw = [[scalar(x) for x in r] for r in raw]
        n = len(self.raw)
        self.size = n
        self.labels = list(labels) if labels is not None else [str(i + 1) for i in range(n)]
        self.gram = normalized_gram(self.raw)
        self.edges: dict[tuple[int, int], EdgeKind] = {}
        for i in range(n):
            for j in range(i + 1, n):
                k = classify_entry(self.gram[i][j], (i, j))
                if k.kind != "none":
                    self.edges[(i, j)] = k
        self._rat = None
        if all(x.is_rational() for r in self.raw for x in r):
            self._rat = [[x.rational_part() for x in r] for r in self.raw]
        self._def_cache: dict[frozenset, tuple[int, int, int]] = {}

    @classmethod
    def from_polyhedron(cls, poly) -> "Diagram":
        return cls(poly.gram(), poly.labels)

    @property
    def vertices(self) -> list[int]:
        return list(range(self.size))

    def edge(self, i: int, j: int) -> EdgeKind:
        if i == j:
            raise ValueError("no edge from a vertex to itself")
        return self.edges.get((min(i, j), max(i, j)), NONE)

    def neighbors(self, i: int) -> list[int]:
        return [j for j in range(self.size) if j != i and self.edge(i, j).kind != "none"]

    def graph(self, vertices: Iterable[int] | None = None) -> nx.Graph:
        vs = list(range(self.size)) if vertices is None else sorted(vertices)
        g = nx.Graph()
        g.add_nodes_from(vs)
        vset = set(vs)
        for (i, j), k in self.edges.items():
            if i in vset and j in vset:
                g.add_edge(i, j, kind=k.kind, m=k.m, weight=k.weight)
        return g

    def inertia(self, vertices: Iterable[int]) -> tuple[int, int, int]:
        key = frozenset(vertices)
        hit = self._def_cache.get(key)
        if hit is None:
            vs = sorted(key)
            src = self._rat if self._rat is not None else self.raw
            hit = inertia([[src[i][j] for j in vs] for i in vs])
            self._def_cache[key] = hit
        return hit

    def is_elliptic(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return self.inertia(vs) == (len(vs), 0, 0)

    def is_affine_component(self, vertices: Iterable[int]) -> bool:
        """Connected, positive semi-definite with one-dimensional kernel."""
        vs = list(vertices)
        if len(vs) < 2 or not nx.is_connected(self.graph(vs)):
            return False
        return self.inertia(vs) == (len(vs) - 1, 0, 1)

    def components(self, vertices: Iterable[int]) -> list[list[int]]:
        return sorted(sorted(c) for c in nx.connected_components(self.graph(vertices)))

    def to_json(self) -> dict:
        edges = []
        for (i, j), k in sorted(self.edges.items()):
            rec = {"i": i, "j": j, "kind": k.kind}
            if k.m is not None:
                rec["m"] = k.m
            if k.weight is not None:
                rec["weight"] = format_scalar(k.weight)
            edges.append(rec)
        return {"vertices": list(self.labels), "edges": edges}

    def __repr__(self):
        return f"Diagram({self.size} vertices, {len(self.edges)} edges)"


def build_diagram(poly) -> Diagram:
    return Diagram.from_polyhedron(poly)


# -- connected Coxeter types ---------------------------------------------------

def _path(n, ms=None):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i in range(n - 1):
        g.add_edge(i, i + 1, m=(ms or {}).get(i, 3), kind="simple")
    return g


def _branch(arms):
    # centre vertex 0 with arms of the given lengths
    g = nx.Graph()
    g.add_node(0)
    nxt = 1
    for a in arms:
        prev = 0
        for _ in range(a):
            g.add_edge(prev, nxt, m=3, kind="simple")
            prev, nxt = nxt, nxt + 1
    return g


@lru_cache(maxsize=None)
def _type_tables(max_rank: int = 12):
    ell, aff = [], []
    for r in range(1, max_rank + 1):
        ell.append((f"A{r}", _path(r)))
        if r >= 2:
            ell.append((f"B{r}", _path(r, {r - 2: 4})))
        if r >= 4:
            ell.append((f"D{r}", _branch((1, 1, r - 3))))
    ell += [("E6", _branch((1, 2, 2))), ("E7", _branch((1, 2, 3))), ("E8", _branch((1, 2, 4))),
            ("F4", _path(4, {1: 4})), ("G2", _path(2, {0: 6}))]
    a1 = nx.Graph()
    a1.add_edge(0, 1, kind="bold", m=None)
    aff.append(("~A1", a1))
    for r in range(2, max_rank + 1):
        c = nx.cycle_graph(r + 1)
        nx.set_edge_attributes(c, 3, "m")
        nx.set_edge_attributes(c, "simple", "kind")
        aff.append((f"~A{r}", c))
        aff.append((f"~C{r}", _path(r + 1, {0: 4, r - 1: 4})))
        if r >= 3:
            b = _branch((1, 1, r - 2))
            # the end of the long arm carries the m=4 edge
            end = max(b.nodes)
            nx.set_edge_attributes(b, {e: 4 for e in b.edges if end in e}, "m")
            aff.append((f"~B{r}", b))
        if r == 4:
            aff.append(("~D4", _branch((1, 1, 1, 1))))
        elif r >= 5:
            d = _branch((1, 1, r - 4))
            far = max(d.nodes)
            d.add_edge(far, far + 1, m=3, kind="simple")
            d.add_edge(far, far + 2, m=3, kind="simple")
            aff.append((f"~D{r}", d))
    aff += [("~E6", _branch((2, 2, 2))), ("~E7", _branch((1, 3, 3))), ("~E8", _branch((1, 2, 5))),
            ("~F4", _path(5, {2: 4})), ("~G2", _path(3, {1: 6}))]
    for _, g in ell + aff:
        for u, v, d in g.edges(data=True):
            d.setdefault("kind", "simple")
    return ell, aff


def _edge_match(a, b):
    return a.get("kind") == b.get("kind") and a.get("m") == b.get("m")


def component_type(diagram: Diagram, comp: Sequence[int], affine: bool) -> str:
    g = diagram.graph(comp)
    ell, aff = _type_tables()
    for name, ref in (aff if affine else ell):
        if ref.number_of_nodes() == g.number_of_nodes() and ref.number_of_edges() == g.number_of_edges():
            if nx.is_isomorphic(g, ref, edge_match=_edge_match):
                return name
    return "?"


@dataclass(frozen=True)
class SubdiagramClass:
    kind: str  # "elliptic" | "parabolic" | "other"
    rank: int
    label: str = ""

    def __str__(self):
        if not self.label:
            return f"{self.kind}(rank {self.rank})"
        return f"{self.kind}({self.label}, rank {self.rank})"


def classify_subdiagram(diagram: Diagram, vertices: Iterable[int]) -> SubdiagramClass:
    vs = sorted(set(vertices))
    if not vs:
        return SubdiagramClass("elliptic", 0, "")
    comps = diagram.components(vs)
    if diagram.is_elliptic(vs):
        label = "+".join(component_type(diagram, c, False) for c in comps)
        return SubdiagramClass("elliptic", len(vs), label)
    if all(diagram.is_affine_component(c) for c in comps):
        label = "+".join(component_type(diagram, c, True) for c in comps)
        return SubdiagramClass("parabolic", len(vs) - len(comps), label)
    return SubdiagramClass("other", diagram.inertia(vs)[0])


# -- isolated roots and clusters -------------------------------------------------

def find_isolated_roots(diagram: Diagram) -> list[int]:
    """Vertices with only orthogonal, bold or dotted incidences."""
    bad = set()
    for (i, j), k in diagram.edges.items():
        if k.kind == "simple":
            bad.update((i, j))
    return [v for v in range(diagram.size) if v not in bad]


@dataclass(frozen=True)
class ClusterPartition:
    cluster: tuple[int, ...]
    cocluster: tuple[int, ...]


def find_clusters(diagram: Diagram) -> list[ClusterPartition]:
    """All cluster/cocluster partitions, ordered by cluster size then lexicographically.

    A cluster consists of isolated roots that pairwise meet in bold or dotted
    edges; it is a clique of the bold/dotted graph on the isolated roots.
    """
    iso = find_isolated_roots(diagram)
    g = nx.Graph()
    g.add_nodes_from(iso)
    for i, j in combinations(iso, 2):
        if diagram.edge(i, j).kind in ("bold", "dotted"):
            g.add_edge(i, j)
    cliques = sorted((tuple(sorted(c)) for c in nx.enumerate_all_cliques(g)), key=lambda c: (len(c), c))
    everything = range(diagram.size)
    return [ClusterPartition(c, tuple(v for v in everything if v not in c)) for c in cliques]


# -- export and comparison -----------------------------------------------------------

def to_dot(diagram: Diagram, name: str = "coxeter") -> str:
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in range(diagram.size):
        lines.append(f'  v{v} [label="{diagram.labels[v]}"];')
    for (i, j), k in sorted(diagram.edges.items()):
        if k.kind == "simple":
            attr = f' [label="{k.m}"]' if k.m != 3 else ""
        elif k.kind == "bold":
            attr = " [penwidth=4]"
        else:
            attr = f' [style=dashed, label="{format_scalar(k.weight)}"]'
        lines.append(f"  v{i} -- v{j}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _iso_graph(d: Diagram) -> nx.Graph:
    g = d.graph()
    for _, _, data in g.edges(data=True):
        data["key"] = (data["kind"], data["m"], data["weight"])
    return g


def diagrams_isomorphic(a: Diagram, b: Diagram) -> bool:
    if a.size != b.size or len(a.edges) != len(b.edges):
        return False
    return nx.is_isomorphic(_iso_graph(a), _iso_graph(b), edge_match=lambda x, y: x["key"] == y["key"])
