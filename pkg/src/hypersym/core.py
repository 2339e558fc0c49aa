"""Sparse hypergraph container and the basic structural operations on it.

A hypergraph is stored only through the nonzeros of its star expansion
matrix: a CSR-style index from hyperedges to their members and the transposed
index from vertices to incident hyperedges.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components as _cc

log = logging.getLogger(__name__)


class HypergraphError(ValueError):
    """Raised for malformed hypergraph input."""

    def __init__(self, message: str, edge_index: int | None = None, edge=None):
        super().__init__(message)
        self.edge_index = edge_index
        self.edge = edge


class DisconnectedError(ValueError):
    """An operation that needs a connected hypergraph received a disconnected one."""


def _csr_from_lists(lists: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(x) for x in lists), dtype=np.int64, count=len(lists))
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    if ptr[-1]:
        flat = np.fromiter((v for x in lists for v in x), dtype=np.int64, count=int(ptr[-1]))
    else:
        flat = np.zeros(0, dtype=np.int64)
    return ptr, flat


class Hypergraph:
    """Immutable hypergraph on vertices ``0..n-1``.

    ``edges`` holds sorted vertex tuples, unique as sets and of size >= 2.
    Use :func:`build` to ingest raw data; the constructor assumes canonical
    edges and only re-checks cheap invariants.
    """

    __slots__ = (
        "n", "edges", "edge_ptr", "edge_members", "vertex_ptr", "vertex_edges",
        "_edge_index", "dropped_small", "dropped_duplicates",
    )

    def __init__(self, n: int, edges: Sequence[tuple[int, ...]],
                 dropped_small: int = 0, dropped_duplicates: int = 0):
        self.n = int(n)
        self.edges: tuple[tuple[int, ...], ...] = tuple(edges)
        self.dropped_small = dropped_small
        self.dropped_duplicates = dropped_duplicates
        self.edge_ptr, self.edge_members = _csr_from_lists(self.edges)
        if self.edge_members.size and (self.edge_members.min() < 0 or self.edge_members.max() >= self.n):
            raise HypergraphError("vertex id out of range")
        m = len(self.edges)
        edge_ids = np.repeat(np.arange(m, dtype=np.int64), np.diff(self.edge_ptr))
        # stable sort by vertex keeps each vertex's incident edge ids ascending
        order = np.argsort(self.edge_members, kind="stable")
        self.vertex_edges = edge_ids[order]
        counts = np.bincount(self.edge_members, minlength=self.n) if self.n else np.zeros(0, np.int64)
        self.vertex_ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.vertex_ptr[1:])
        self._edge_index: dict[tuple[int, ...], int] | None = None
        for arr in (self.edge_ptr, self.edge_members, self.vertex_ptr, self.vertex_edges):
            arr.setflags(write=False)

    # -- basic sizes -------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def nnz(self) -> int:
        return int(self.edge_members.size)

    @property
    def edge_sizes(self) -> np.ndarray:
        return np.diff(self.edge_ptr)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.vertex_ptr)

    @property
    def vertex_incidence(self) -> list[list[int]]:
        ve = self.vertex_edges.tolist()
        ptr = self.vertex_ptr.tolist()
        return [ve[ptr[v]:ptr[v + 1]] for v in range(self.n)]

    def incident(self, v: int) -> np.ndarray:
        return self.vertex_edges[self.vertex_ptr[v]:self.vertex_ptr[v + 1]]

    def edge_index(self, edge: Iterable[int]) -> int | None:
        """Id of the hyperedge equal to ``edge`` as a set, or None."""
        if self._edge_index is None:
            self._edge_index = {e: i for i, e in enumerate(self.edges)}
        return self._edge_index.get(tuple(sorted(set(edge))))

    def edge_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self.n == other.n and self.edge_set() == other.edge_set()

    def __hash__(self) -> int:
        return hash((self.n, self.edge_set()))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, m={self.m}, nnz={self.nnz})"

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


def build(n: int, raw_edges: Iterable[Iterable[int]]) -> Hypergraph:
    """Canonicalize raw hyperedges into a :class:`Hypergraph`.

    Members are sorted and de-duplicated, empty and singleton hyperedges are
    dropped, and repeated hyperedges collapse to one. Both drop counts are kept
    on the result.
    """
    seen: dict[tuple[int, ...], None] = {}
    small = dup = 0
    for idx, raw in enumerate(raw_edges):
        e = tuple(sorted(set(int(v) for v in raw)))
        if e and (e[0] < 0 or e[-1] >= n):
            raise HypergraphError(
                f"hyperedge {idx} {list(raw)} has a vertex outside [0, {n})", idx, list(raw))
        if len(e) < 2:
            small += 1
            continue
        if e in seen:
            dup += 1
            continue
        seen[e] = None
    if small or dup:
        log.info("build: dropped %d empty/singleton and %d duplicate hyperedges", small, dup)
    return Hypergraph(n, list(seen), dropped_small=small, dropped_duplicates=dup)


def empty(n: int = 0) -> Hypergraph:
    return Hypergraph(n, [])


def disjoint_union(*hs: Hypergraph) -> tuple[Hypergraph, list[int]]:
    """Disjoint union and the vertex offset of each operand."""
    offsets, edges, off = [], [], 0
    for h in hs:
        offsets.append(off)
        edges.extend(tuple(v + off for v in e) for e in h.edges)
        off += h.n
    return Hypergraph(off, edges), offsets


def _check_vertex(h: Hypergraph, v: int) -> None:
    if not 0 <= v < h.n:
        raise IndexError(f"vertex {v} outside [0, {h.n})")


def degree(h: Hypergraph, v: int) -> int:
    _check_vertex(h, v)
    return int(h.vertex_ptr[v + 1] - h.vertex_ptr[v])


def volume(h: Hypergraph, v: int) -> int:
    """Sum of the sizes of the hyperedges containing ``v``."""
    _check_vertex(h, v)
    return int(h.edge_sizes[h.incident(v)].sum())


# -- expansions ------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteGraph:
    """Star expansion: red nodes ``0..left-1`` are vertices, blue nodes
    ``left..left+right-1`` are hyperedges."""

    left: int
    right: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple = field(default=())

    @property
    def num_nodes(self) -> int:
        return self.left + self.right

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def is_red(self, node: int) -> bool:
        return node < self.left


def star_expansion(h: Hypergraph, labels: Sequence | None = None) -> BipartiteGraph:
    adj: list[tuple[int, ...]] = [tuple(int(h.n + e) for e in h.incident(v)) for v in range(h.n)]
    adj.extend(e for e in h.edges)
    lab = tuple(labels) if labels is not None else (0,) * h.n
    if len(lab) != h.n:
        raise ValueError("labels must have one entry per vertex")
    return BipartiteGraph(h.n, h.m, tuple(adj), lab)


def incidence_matrix(h: Hypergraph) -> sparse.csr_matrix:
    """The n x m 0-1 star expansion matrix as a scipy sparse matrix."""
    m = h.m
    rows = h.edge_members
    cols = np.repeat(np.arange(m), h.edge_sizes)
    return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(h.n, m))


def clique_expansion(h: Hypergraph) -> sparse.csr_matrix:
    """Weighted adjacency ``H D_e^{-1} H^T`` (diagonal included)."""
    H = incidence_matrix(h)
    sizes = h.edge_sizes.astype(float)
    inv = sparse.diags(1.0 / sizes) if h.m else sparse.csr_matrix((0, 0))
    return (H @ inv @ H.T).tocsr()


def induced_subhypergraph(h: Hypergraph, w: Iterable[int]) -> tuple[Hypergraph, list[int], dict[int, int]]:
    """Hypergraph induced on ``w``: exactly the hyperedges contained in ``w``.

    Returns the relabelled subhypergraph, ``new_to_old`` and ``old_to_new``.
    """
    new_to_old = sorted(set(int(v) for v in w))
    for v in new_to_old:
        _check_vertex(h, v)
    old_to_new = {v: i for i, v in enumerate(new_to_old)}
    inside = np.zeros(h.n, dtype=bool)
    inside[new_to_old] = True
    cand = set()
    for v in new_to_old:
        cand.update(h.incident(v).tolist())
    edges = [tuple(old_to_new[u] for u in h.edges[e]) for e in sorted(cand)
             if inside[list(h.edges[e])].all()]
    return Hypergraph(len(new_to_old), edges), new_to_old, old_to_new


# -- components -----------------------------------------------------------

@dataclass(frozen=True)
class Components:
    """Vertex partition into connected components plus hyperedge assignment.

    Component ids are ordered by smallest contained vertex.
    """

    labels: np.ndarray      # component id per vertex
    edge_labels: np.ndarray  # component id per hyperedge

    @property
    def count(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def vertex_sets(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for v, c in enumerate(self.labels.tolist()):
            out[c].append(v)
        return out

    def edge_sets(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for e, c in enumerate(self.edge_labels.tolist()):
            out[c].append(e)
        return out


def _canonical_labels(raw: np.ndarray) -> np.ndarray:
    # relabel dense ids 0..k-1 so they follow each component's smallest vertex
    if raw.size == 0:
        return raw.astype(np.int64)
    uniq, first = np.unique(raw, return_index=True)
    remap = np.empty(uniq.size, dtype=np.int64)
    remap[np.argsort(first)] = np.arange(uniq.size)
    return remap[np.searchsorted(uniq, raw)]


def component_labels(n: int, edge_ptr: np.ndarray, edge_members: np.ndarray,
                     keep_edges: np.ndarray | None = None) -> np.ndarray:
    """Vertex component labels of the star expansion restricted to ``keep_edges``."""
    m = edge_ptr.size - 1
    edge_ids = np.repeat(np.arange(m), np.diff(edge_ptr))
    verts = edge_members
    if keep_edges is not None:
        mask = keep_edges[edge_ids]
        edge_ids, verts = edge_ids[mask], verts[mask]
    g = sparse.csr_matrix((np.ones(verts.size, dtype=np.int8), (verts, n + edge_ids)),
                          shape=(n + m, n + m))
    _, lab = _cc(g, directed=False)
    return _canonical_labels(lab[:n])


def connected_components(h: Hypergraph) -> Components:
    """Components of the star expansion; isolated vertices are singletons."""
    lab = component_labels(h.n, h.edge_ptr, h.edge_members)
    if h.m:
        edge_lab = lab[h.edge_members[h.edge_ptr[:-1]]]
    else:
        edge_lab = np.zeros(0, dtype=np.int64)
    return Components(lab, edge_lab)


def connected_components_bfs(h: Hypergraph) -> list[list[int]]:
    """Plain BFS over the star expansion; used to cross-check the sparse route."""
    seen = [False] * h.n
    out = []
    inc = h.vertex_incidence
    for s in range(h.n):
        if seen[s]:
            continue
        seen[s] = True
        comp, q = [s], deque([s])
        while q:
            v = q.popleft()
            for e in inc[v]:
                for u in h.edges[e]:
                    if not seen[u]:
                        seen[u] = True
                        comp.append(u)
                        q.append(u)
        out.append(sorted(comp))
    return out


def is_connected(h: Hypergraph) -> bool:
    return h.n > 0 and connected_components(h).count == 1


# -- permutations ------------------------------------------------------------

class Permutation:
    """Bijection on ``0..n-1``; ``p[v]`` is the image of ``v``."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: Sequence[int]):
        arr = np.asarray(mapping, dtype=np.int64)
        if arr.ndim != 1 or not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError("mapping is not a bijection on 0..n-1")
        arr.setflags(write=False)
        self.mapping = arr

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    def __len__(self) -> int:
        return self.mapping.size

    def __getitem__(self, v: int) -> int:
        return int(self.mapping[v])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    def __hash__(self) -> int:
        return hash(self.mapping.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.mapping.tolist()})"

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.mapping.size)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        return Permutation(self.mapping[other.mapping])

    def apply_set(self, s: Iterable[int]) -> tuple[int, ...]:
        return tuple(sorted(int(self.mapping[v]) for v in s))


def apply_permutation(h: Hypergraph, p: Permutation) -> Hypergraph:
    """Relabel every vertex ``v`` as ``p[v]``.

    Hyperedge ids follow the input order, so ``out.edges[i]`` is the image of
    ``h.edges[i]``.
    """
    if len(p) != h.n:
        raise ValueError(f"permutation of size {len(p)} applied to hypergraph with n={h.n}")
    mp = p.mapping.tolist()
    return Hypergraph(h.n, [tuple(sorted(mp[v] for v in e)) for e in h.edges])


def is_stabilizer(h: Hypergraph, p: Permutation) -> bool:
    if len(p) != h.n:
        return False
    return apply_permutation(h, p).edge_set() == h.edge_set()


# -- random walk -------------------------------------------------------------

@dataclass(frozen=True)
class StationaryDistribution:
    probs: np.ndarray

    def __getitem__(self, v: int) -> float:
        return float(self.probs[v])


def transition_matrix(h: Hypergraph) -> np.ndarray:
    """Dense ``P[u, v] = sum_{e ⊇ {u,v}} 1 / (deg(u) |e|)`` (uniform hyperedge weights).

    Rows of isolated vertices are left at zero.
    """
    P = clique_expansion(h).toarray()
    deg = h.degrees.astype(float)
    nz = deg > 0
    P[nz] /= deg[nz, None]
    return P


def stationary_distribution(h: Hypergraph, allow_disconnected: bool = False) -> StationaryDistribution:
    """Closed form ``deg(v) / sum_u deg(u)``.

    The closed form is the unique stationary distribution only for connected
    hypergraphs, so disconnected input is refused unless explicitly allowed.
    """
    if h.m == 0:
        raise ValueError("stationary distribution needs at least one hyperedge")
    if not allow_disconnected and not is_connected(h):
        raise DisconnectedError("hypergraph is disconnected; stationary distribution is not unique")
    deg = h.degrees.astype(float)
    return StationaryDistribution(deg / deg.sum())


def power_iteration(h: Hypergraph, tol: float = 1e-13, max_iter: int = 100000) -> np.ndarray:
    """Fixed point of ``pi P = pi`` by (lazy) power iteration."""
    P = transition_matrix(h)
    # lazy walk: same fixed point, no periodicity issues on bipartite-like inputs
    P = 0.5 * (P + np.eye(h.n))
    pi = np.full(h.n, 1.0 / h.n)
    for _ in range(max_iter):
        nxt = pi @ P
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    return pi
