"""Graph matrix, graph polynomial and Dodgson polynomials.

The graph matrix of a connected graph is::

    M = ( diag(a_e) |  E )
        (   -E^T    |  0 )

with ``E`` the incidence matrix (last vertex column deleted).  Every
``a_e`` sits only at ``(e, e)``, so ``det M(I, J)_K`` is multilinear and
expands as a sum over sets ``S`` of edge variables that are kept::

    sum_S  a^S * det E[E - (I u S)] * det E[E - (J u S)]

Only row sets of size ``V - 1`` contribute, and each integer incidence
determinant is computed once per graph by fraction-free elimination and
cached.

Signs.  Index sets are ordered sequences.  With ``p(e)`` the row position
of an edge and ``sgn(I)`` the sign of the permutation sorting ``I``::

    Psi^{I,J}_K = (-1) ** (sum p(I) + sum p(J)) * sgn(I) * sgn(J) * det M(I, J)_K

This is the complementary-minor sign, i.e. ``Psi^{I,J} = det M * det W[J, I]``
for ``W = M^{-1}``.  Appending an edge to both sequences gives the
coefficient of its variable exactly, and the three-term Dodgson relation
holds with no further signs when ``x``, ``a``, ``b`` are appended last.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import BadKey, Disconnected, NotThreeValent
from .graph import Graph, incidence_matrix, minor
from .poly import Poly, _shift, divide_exact


def bareiss_det(matrix: Sequence[Sequence]) -> object:
    """Fraction-free determinant of a square matrix of ints or :class:`Poly`.

    Each division in the elimination is exact, so integer input stays integral
    and polynomial input goes through :func:`divide_exact`.
    """
    n = len(matrix)
    if n == 0:
        return 1
    a = [list(row) for row in matrix]
    poly = any(isinstance(x, Poly) for row in a for x in row)

    def is_zero(x):
        return not x

    def div(x, y):
        if poly:
            x = x if isinstance(x, Poly) else Poly.constant(x)
            y = y if isinstance(y, Poly) else Poly.constant(y)
            return divide_exact(x, y)
        q, r = divmod(x, y)
        assert r == 0, "Bareiss division is exact"
        return q

    sign = 1
    prev = 1
    for k in range(n - 1):
        if is_zero(a[k][k]):
            for r in range(k + 1, n):
                if not is_zero(a[r][k]):
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Poly.zero() if poly else 0
        piv = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = div(a[i][j] * piv - a[i][k] * a[k][j], prev)
        prev = piv
    det = a[n - 1][n - 1]
    return det * sign if sign < 0 else det


class _LRU:
    """Bounded mapping with least-recently-used eviction, safe across threads."""

    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._data: "OrderedDict" = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return None

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def __len__(self):
        return len(self._data)


@dataclass(frozen=True)
class DodgsonKey:
    I: Tuple[int, ...]
    J: Tuple[int, ...]
    K: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, I: Iterable[int] = (), J: Iterable[int] = (), K: Iterable[int] = ()) -> "DodgsonKey":
        return cls(tuple(I), tuple(J), frozenset(K))


def _perm_parity(seq: Sequence[int]) -> int:
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j]) & 1


class GraphMatrix:
    """The frozen matrix ``M_G`` of a graph, plus a cache of its minors.

    Rows ``0..N-1`` are the active edges in ascending id order, rows
    ``N..N+V-2`` the kept vertices.
    """

    def __init__(self, g: Graph, cache_size: int = 200_000, threadsafe: bool = True):
        if not g.is_connected():
            raise Disconnected("graph matrix needs a connected graph")
        self.graph = g
        self.edge_ids: Tuple[int, ...] = g.edge_ids
        self.position: Dict[int, int] = {e: i for i, e in enumerate(self.edge_ids)}
        self.incidence = incidence_matrix(g)
        self._rows = [tuple(int(x) for x in row) for row in self.incidence]
        self._det_cache = _LRU(cache_size)
        self._poly_cache = _LRU(max(1, cache_size // 100))
        self.threadsafe = threadsafe

    @property
    def size(self) -> int:
        return self.graph.num_edges + self.graph.num_vertices - 1

    def entries(self) -> List[List[Poly]]:
        """The symbolic matrix, entry ``(e, e)`` being ``a_e``."""
        n, r = self.graph.num_edges, self.graph.num_vertices - 1
        zero = Poly.zero()
        rows = [[zero] * (n + r) for _ in range(n + r)]
        for i, e in enumerate(self.edge_ids):
            rows[i][i] = Poly.var(e)
            for j in range(r):
                val = self._rows[i][j]
                if val:
                    rows[i][n + j] = Poly.constant(val)
                    rows[n + j][i] = Poly.constant(-val)
        return rows

    def incidence_det(self, rows: FrozenSet[int]) -> int:
        """``det E[rows]`` for a set of ``V - 1`` row positions (cached)."""
        key = rows
        hit = self._det_cache.get(key)
        if hit is not None:
            return hit
        mat = [self._rows[i] for i in sorted(rows)]
        val = bareiss_det(mat)
        self._det_cache.put(key, val)
        return val

    def check_key(self, key: DodgsonKey) -> None:
        if len(key.I) != len(key.J):
            raise BadKey(f"|I| = {len(key.I)} differs from |J| = {len(key.J)}")
        if len(set(key.I)) != len(key.I) or len(set(key.J)) != len(key.J):
            raise BadKey("repeated edge in an index sequence")
        if (set(key.I) | set(key.J)) & key.K:
            raise BadKey("K must be disjoint from I and J")
        for e in set(key.I) | set(key.J) | key.K:
            if e not in self.position:
                raise BadKey(f"edge {e} is not an edge of the graph")

    def dodgson(self, key: DodgsonKey) -> Poly:
        self.check_key(key)
        pos = self.position
        pi = [pos[e] for e in key.I]
        pj = [pos[e] for e in key.J]
        base = self._unordered(frozenset(pi), frozenset(pj), frozenset(pos[e] for e in key.K))
        flip = _perm_parity(pi) ^ _perm_parity(pj)
        set_i, set_j = frozenset(pi), frozenset(pj)
        sym = set_i ^ set_j
        for c in set_i & set_j:
            flip ^= sum(1 for x in sym if x < c) & 1
        return -base if flip else base

    def _unordered(self, I: FrozenSet[int], J: FrozenSet[int], K: FrozenSet[int]) -> Poly:
        # sum over kept variables; the per-term sign is the set convention
        # (-1)^(sum I + sum J + crossings), corrected to the ordered one by the caller
        key = (I, J, K)
        hit = self._poly_cache.get(key)
        if hit is not None:
            return hit
        n = self.graph.num_edges
        rank = self.graph.num_vertices - 1
        free = [i for i in range(n) if i not in I and i not in J and i not in K]
        size = n - len(I) - rank
        terms: Dict[int, int] = {}
        if 0 <= size <= len(free):
            all_rows = frozenset(range(n))
            off_i = all_rows - I
            off_j = all_rows - J
            edge_of = self.edge_ids
            for chosen in combinations(free, size):
                s = frozenset(chosen)
                d1 = self.incidence_det(off_i - s)
                if not d1:
                    continue
                d2 = d1 if I == J else self.incidence_det(off_j - s)
                if not d2:
                    continue
                sgn = self._sigma_pos(I | s, J | s)
                mono = 0
                for i in chosen:
                    mono += 1 << _shift(edge_of[i])
                terms[mono] = terms.get(mono, 0) + sgn * d1 * d2
        result = Poly(terms)
        self._poly_cache.put(key, result)
        return result

    def _sigma_pos(self, I: FrozenSet[int], J: FrozenSet[int]) -> int:
        parity = sum(I) + sum(J)
        if I != J:
            sym = I ^ J
            for c in I & J:
                for x in sym:
                    if x < c:
                        parity += 1
        return -1 if parity % 2 else 1


_MATRICES: "OrderedDict[Graph, GraphMatrix]" = OrderedDict()
_MATRICES_LOCK = threading.Lock()


def graph_matrix(g: Graph) -> GraphMatrix:
    """The cached :class:`GraphMatrix` of ``g`` (one frozen matrix per graph)."""
    with _MATRICES_LOCK:
        gm = _MATRICES.get(g)
        if gm is not None:
            _MATRICES.move_to_end(g)
            return gm
    gm = GraphMatrix(g)
    with _MATRICES_LOCK:
        gm = _MATRICES.setdefault(g, gm)
        while len(_MATRICES) > 64:
            _MATRICES.popitem(last=False)
    return gm


def psi(g: Graph) -> Poly:
    """Graph polynomial ``det M_G``."""
    return graph_matrix(g).dodgson(DodgsonKey.of())


def psi_or_zero(g: Graph) -> Poly:
    """Graph polynomial, with the zero polynomial for disconnected graphs."""
    if not g.is_connected():
        return Poly.zero()
    return psi(g)


def dodgson(g: Graph, I: Iterable[int] = (), J: Iterable[int] = (), K: Iterable[int] = ()) -> Poly:
    """``Psi^{I,J}_{G,K}`` in the frozen sign convention of ``graph_matrix(g)``."""
    key = I if isinstance(I, DodgsonKey) else DodgsonKey.of(I, J, K)
    return graph_matrix(g).dodgson(key)


def psi_from_trees(g: Graph) -> Poly:
    """Oracle: sum over spanning trees of the product of the edges not in the tree."""
    from .graph import spanning_trees

    ids = g.edge_ids
    terms: Dict[int, int] = {}
    for tree in spanning_trees(g):
        mono = 0
        for e in ids:
            if e not in tree:
                mono += 1 << _shift(e)
        terms[mono] = terms.get(mono, 0) + 1
    return Poly(terms)


def psi_bareiss(g: Graph) -> Poly:
    """Oracle for small graphs: fraction-free elimination on the symbolic ``M_G``."""
    return bareiss_det(graph_matrix(g).entries())


@dataclass(frozen=True)
class VertexData:
    """The five polynomials attached to a 3-valent vertex with edges ``e1, e2, e3``."""

    edges: Tuple[int, int, int]
    f0: Poly
    f1: Poly
    f2: Poly
    f3: Poly
    f123: Poly

    def psi_structure(self) -> Poly:
        a1, a2, a3 = (Poly.var(e) for e in self.edges)
        return (
            self.f0 * (a1 * a2 + a1 * a3 + a2 * a3)
            + (self.f1 + self.f2) * a3
            + (self.f2 + self.f3) * a1
            + (self.f1 + self.f3) * a2
            + self.f123
        )


def three_valent_data(g: Graph, vertex: int, edges: Optional[Sequence[int]] = None) -> VertexData:
    """``(f0, f1, f2, f3, f123)`` at a 3-valent ``vertex``.

    ``edges`` fixes which incident edge plays the role of 1, 2, 3 (default:
    ascending id).  The ``f_i`` are the Dodgsons ``Psi^{j,k}_{G,i}`` with the
    sign that makes the structure formula for ``Psi_G`` hold; both that
    formula and ``f0*f123 = f1*f2 + f1*f3 + f2*f3`` are asserted.
    """
    incident = g.incident(vertex)
    if len(incident) != 3 or g.degree(vertex) != 3:
        raise NotThreeValent(f"vertex {vertex} has degree {g.degree(vertex)}")
    if edges is None:
        edges = tuple(sorted(incident))
    if sorted(edges) != sorted(incident):
        raise NotThreeValent(f"edges {edges} are not the edges at vertex {vertex}")
    e1, e2, e3 = edges
    gm = graph_matrix(g)
    f0 = gm.dodgson(DodgsonKey.of((e1, e2), (e1, e2), (e3,)))
    f123 = gm.dodgson(DodgsonKey.of((), (), (e1, e2, e3)))
    # Psi restricted to one surviving variable a_i gives f_j + f_k
    s1 = gm.dodgson(DodgsonKey.of((e1,), (e1,), (e2, e3)))  # f2 + f3
    s2 = gm.dodgson(DodgsonKey.of((e2,), (e2,), (e1, e3)))  # f1 + f3
    s3 = gm.dodgson(DodgsonKey.of((e3,), (e3,), (e1, e2)))  # f1 + f2
    f = []
    for i, (j, k) in ((e1, (e2, e3)), (e2, (e1, e3)), (e3, (e1, e2))):
        d = gm.dodgson(DodgsonKey.of((j,), (k,), (i,)))
        f.append(d)
    target = [(s2 + s3 - s1).div_int(2), (s1 + s3 - s2).div_int(2), (s1 + s2 - s3).div_int(2)]
    signed = []
    for d, t in zip(f, target):
        if d == t:
            signed.append(d)
        elif d == -t:
            signed.append(-d)
        else:
            raise AssertionError("Dodgson f_i disagrees with the structure of Psi_G")
    data = VertexData((e1, e2, e3), f0, signed[0], signed[1], signed[2], f123)
    psi_g = gm.dodgson(DodgsonKey.of())
    assert data.psi_structure() == psi_g, "structure formula for Psi_G fails"
    f1, f2, f3 = signed
    assert f0 * f123 == f1 * f2 + f1 * f3 + f2 * f3, "vertex identity fails"
    return data


def minor_dodgson(g: Graph, delete: Iterable[int], contract: Iterable[int], I=(), J=(), K=()) -> Poly:
    """Dodgson polynomial of the minor ``g \\ delete // contract``.

    Tadpoles created by the contraction multiply the result by their variable.
    """
    m = minor(g, delete, contract)
    if not m.is_connected():
        return Poly.zero()
    p = dodgson(m, I, J, K)
    for t in m.tadpoles:
        if t not in set(K):
            p = p * Poly.var(t)
        else:
            return Poly.zero()
    return p
