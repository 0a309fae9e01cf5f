"""Labelled multigraphs with stable edge ids, minors and a spanning-tree oracle.

Edge ids are fixed when a graph is built and are never renumbered, so a minor
``G \\ D // C`` still talks about the parent's edge labels.  Vertices are
relabelled ``1..V`` after every operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import Disconnected, EmptyGraph, InactiveEdge, TadpoleEdge, UnknownName

Edge = Tuple[int, int, int]  # (source, target, edge id)

G8_EDGES = "34,14,13,12,27,25,58,78,89,59,49,47,35,36,67,69"


@dataclass(frozen=True)
class Graph:
    """Immutable multigraph.

    ``edges`` holds the active edges as ``(source, target, id)`` sorted by id.
    ``removed`` maps inactive ids to how they left: ``"deleted"``,
    ``"contracted"`` or ``"tadpole"`` (a loop dropped after a contraction).
    """

    num_vertices: int
    edges: Tuple[Edge, ...]
    removed: Tuple[Tuple[int, str], ...] = ()
    name: str = field(default="", compare=False)

    @property
    def edge_ids(self) -> Tuple[int, ...]:
        return tuple(e for _, _, e in self.edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def tadpoles(self) -> Tuple[int, ...]:
        return tuple(e for e, how in self.removed if how == "tadpole")

    @property
    def vertices(self) -> range:
        return range(1, self.num_vertices + 1)

    def edge(self, edge_id: int) -> Edge:
        for e in self.edges:
            if e[2] == edge_id:
                return e
        raise InactiveEdge(edge_id)

    def components(self) -> int:
        parent = list(range(self.num_vertices + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        count = self.num_vertices
        for u, v, _ in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                count -= 1
        return count

    def is_connected(self) -> bool:
        return self.components() == 1

    @property
    def loop_number(self) -> int:
        return self.num_edges - self.num_vertices + self.components()

    def degree(self, vertex: int) -> int:
        return sum((u == vertex) + (v == vertex) for u, v, _ in self.edges)

    def incident(self, vertex: int) -> Tuple[int, ...]:
        return tuple(e for u, v, e in self.edges if vertex in (u, v))

    def flipped(self, edge_id: int) -> "Graph":
        """Same graph with the orientation of one edge reversed."""
        self.edge(edge_id)
        edges = tuple((v, u, e) if e == edge_id else (u, v, e) for u, v, e in self.edges)
        return Graph(self.num_vertices, edges, self.removed, self.name)

    def pairs(self) -> List[Tuple[int, int]]:
        return [(u, v) for u, v, _ in self.edges]


def _relabel(edges: Iterable[Tuple[int, int, int]], vertex_order: Sequence[int]) -> Tuple[int, Tuple[Edge, ...]]:
    labels: Dict[int, int] = {}
    for v in vertex_order:
        if v not in labels:
            labels[v] = len(labels) + 1
    out = tuple(sorted(((labels[u], labels[v], e) for u, v, e in edges), key=lambda t: t[2]))
    return len(labels), out


def build_graph(edge_pairs: Sequence[Tuple[int, int]], name: str = "") -> Graph:
    """Graph with edges ``1..N`` in input order.

    Vertices are relabelled ``1..V`` in order of first appearance.
    """
    if not edge_pairs:
        raise EmptyGraph("a graph needs at least one edge")
    order = []
    for u, v in edge_pairs:
        if u == v:
            raise TadpoleEdge(u)
        order.extend((u, v))
    edges = [(u, v, i + 1) for i, (u, v) in enumerate(edge_pairs)]
    nv, out = _relabel(edges, order)
    return Graph(nv, out, (), name)


def minor(g: Graph, delete: Iterable[int] = (), contract: Iterable[int] = ()) -> Graph:
    """``g`` with ``delete`` removed and ``contract`` contracted.

    Edges that become loops are dropped and recorded as tadpoles; an edge in
    ``contract`` that is already a loop when its turn comes is recorded the
    same way.
    """
    delete = list(delete)
    contract = list(contract)
    active = set(g.edge_ids)
    for e in delete + contract:
        if e not in active:
            raise InactiveEdge(e)
    overlap = set(delete) & set(contract)
    if overlap:
        raise ValueError(f"edges {sorted(overlap)} both deleted and contracted")

    removed = dict(g.removed)
    for e in delete:
        removed[e] = "deleted"
    edges = {e: (u, v) for u, v, e in g.edges if e not in set(delete)}

    # union-find over vertices; contracted edges merge their endpoints
    parent = list(range(g.num_vertices + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in contract:
        u, v = edges.pop(e)
        ru, rv = find(u), find(v)
        if ru == rv:
            removed[e] = "tadpole"
            continue
        lo, hi = min(ru, rv), max(ru, rv)
        parent[hi] = lo
        removed[e] = "contracted"

    kept = []
    for e in sorted(edges):
        u, v = edges[e]
        fu, fv = find(u), find(v)
        if fu == fv:
            removed[e] = "tadpole"
        else:
            kept.append((fu, fv, e))
    roots = sorted({find(v) for v in g.vertices})
    nv, out = _relabel(kept, roots)
    return Graph(nv, out, tuple(sorted(removed.items())), g.name)


def spanning_trees(g: Graph) -> List[FrozenSet[int]]:
    """Every spanning tree of ``g`` as a set of edge ids (exhaustive backtracking)."""
    if not g.is_connected():
        raise Disconnected("spanning trees need a connected graph")
    need = g.num_vertices - 1
    edges = list(g.edges)
    trees: List[FrozenSet[int]] = []

    def search(i: int, chosen: List[int], comp: Tuple[int, ...]):
        if len(chosen) == need:
            trees.append(frozenset(chosen))
            return
        if len(edges) - i < need - len(chosen):
            return
        u, v, e = edges[i]
        cu, cv = comp[u], comp[v]
        if cu != cv:
            merged = tuple(cu if c == cv else c for c in comp)
            chosen.append(e)
            search(i + 1, chosen, merged)
            chosen.pop()
        search(i + 1, chosen, comp)

    search(0, [], tuple(range(g.num_vertices + 1)))
    return trees


def incidence_matrix(g: Graph) -> np.ndarray:
    """Signed incidence matrix with the last vertex column deleted.

    Row ``i`` is the ``i``-th active edge (ascending id); entry ``+1`` at the
    source and ``-1`` at the target.
    """
    if not g.is_connected():
        raise Disconnected("incidence matrix needs a connected graph")
    return full_incidence(g)[:, : g.num_vertices - 1]


def full_incidence(g: Graph) -> np.ndarray:
    mat = np.zeros((g.num_edges, g.num_vertices), dtype=np.int64)
    for row, (u, v, _) in enumerate(g.edges):
        mat[row, u - 1] = 1
        mat[row, v - 1] = -1
    return mat


def wheel(n: int) -> Graph:
    """Wheel with ``n`` spokes: hub 1, rim ``2..n+1``; spokes first, then rim."""
    if n < 3:
        raise ValueError("a wheel needs at least 3 spokes")
    spokes = [(1, i) for i in range(2, n + 2)]
    rim = [(i, i + 1) for i in range(2, n + 1)] + [(n + 1, 2)]
    return build_graph(spokes + rim, name=f"wheel({n})")


def cycle(n: int) -> Graph:
    if n < 2:
        raise ValueError("a cycle needs at least 2 edges")
    return build_graph([(i, i % n + 1) for i in range(1, n + 1)], name=f"cycle({n})")


def g8() -> Graph:
    return build_graph(parse_two_digit(G8_EDGES), name="g8")


def catalog(name: str, n: Optional[int] = None) -> Graph:
    name = name.lower()
    if name == "wheel":
        return wheel(3 if n is None else n)
    if name == "cycle":
        return cycle(3 if n is None else n)
    if name == "g8":
        return g8()
    raise UnknownName(f"no catalog graph called {name!r}")


def parse_two_digit(text: str) -> List[Tuple[int, int]]:
    tokens = [t for t in text.replace(",", " ").split() if t]
    pairs = []
    for t in tokens:
        if len(t) != 2 or not t.isdigit():
            raise ValueError(f"two-digit edge token expected, got {t!r}")
        pairs.append((int(t[0]), int(t[1])))
    return pairs


def parse_graph_text(text: str, two_digit: bool = False) -> Graph:
    """Read ``u v`` lines (or two-digit tokens when ``two_digit``)."""
    pairs: List[Tuple[int, int]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if two_digit:
            pairs.extend(parse_two_digit(line))
        else:
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"expected 'u v', got {raw!r}")
            pairs.append((int(parts[0]), int(parts[1])))
    return build_graph(pairs)


def format_graph_text(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v, _ in g.edges)


def iter_graphs(max_edges: int, max_vertices: Optional[int] = None) -> Iterator[Graph]:
    """All connected tadpole-free multigraphs up to ``max_edges`` edges.

    Enumerates edge sequences over canonical vertex labels (each new vertex is
    the next unused label), so every labelled multigraph shape appears at least
    once; isomorphic copies are not removed.
    """
    for n_edges in range(1, max_edges + 1):
        limit = n_edges + 1 if max_vertices is None else min(n_edges + 1, max_vertices)

        def grow(pairs, used):
            if len(pairs) == n_edges:
                g = build_graph(pairs)
                if g.is_connected():
                    yield g
                return
            last = pairs[-1] if pairs else (0, 0)
            for u in range(1, used + 1):
                for v in range(u + 1, min(used + 1, limit) + 1):
                    if (u, v) < last:
                        continue
                    yield from grow(pairs + [(u, v)], max(used, v))

        yield from grow([], 1)
