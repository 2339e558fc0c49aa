"""Exact, deliberately naive oracles for small instances.

* depth-bounded unrolling of the star expansion into its 2-coloured universal
  cover, with AHU-style canonical codes;
* brute-force automorphism enumeration over the full symmetric group;
* brute-force neighbourhood isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .core import (BipartiteGraph, DisconnectedError, Hypergraph, Permutation, disjoint_union,
                   is_connected, star_expansion)
from .refine import gwl1

RED, BLUE = "red", "blue"
DEFAULT_CAP = 8


class OracleCapError(ValueError):
    """Input too large for exhaustive enumeration."""


# -- universal cover -------------------------------------------------------------

@dataclass
class RootedColoredTree:
    """Explicit rooted tree; node ``i`` has ``colors[i]``, ``labels[i]`` and
    ``children[i]``. Node 0 is the root."""

    colors: list[str] = field(default_factory=list)
    labels: list[Hashable] = field(default_factory=list)
    children: list[list[int]] = field(default_factory=list)
    depth: int = 0

    def add(self, color: str, label: Hashable) -> int:
        self.colors.append(color)
        self.labels.append(label)
        self.children.append([])
        return len(self.colors) - 1

    @property
    def size(self) -> int:
        return len(self.colors)


def _color_and_label(b: BipartiteGraph, node: int) -> tuple[str, Hashable]:
    if b.is_red(node):
        return RED, (b.labels[node] if b.labels else 0)
    return BLUE, None


def unroll(b: BipartiteGraph, root: int, depth: int) -> RootedColoredTree:
    """The depth-``depth`` ball of the universal cover around a lift of ``root``.

    Each tree node is a walk from the root; children extend the walk by every
    neighbour except the node it just came from.
    """
    if not 0 <= root < b.num_nodes:
        raise IndexError(f"node {root} not in bipartite graph")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    t = RootedColoredTree(depth=depth)
    t.add(*_color_and_label(b, root))
    frontier = [(0, root, -1)]
    for _ in range(depth):
        nxt = []
        for tid, src, parent in frontier:
            for y in b.adjacency[src]:
                if y == parent:
                    continue
                cid = t.add(*_color_and_label(b, y))
                t.children[tid].append(cid)
                nxt.append((cid, y, src))
        frontier = nxt
    return t


def canonical_code(t: RootedColoredTree, node: int = 0) -> tuple:
    """``(colour, label, sorted child codes)``; equal iff rooted 2-coloured isomorphic."""
    kids = sorted((canonical_code(t, c) for c in t.children[node]), key=repr)
    return (t.colors[node], repr(t.labels[node]), tuple(kids))


def rooted_isomorphic(t1: RootedColoredTree, t2: RootedColoredTree, a: int = 0, b: int = 0) -> bool:
    """Backtracking rooted, colour- and label-preserving tree isomorphism test.

    Independent of :func:`canonical_code`: tries every child matching.
    """
    if t1.colors[a] != t2.colors[b] or t1.labels[a] != t2.labels[b]:
        return False
    ca, cb = t1.children[a], t2.children[b]
    if len(ca) != len(cb):
        return False
    used = [False] * len(cb)

    def match(i: int) -> bool:
        if i == len(ca):
            return True
        for j in range(len(cb)):
            if not used[j] and rooted_isomorphic(t1, t2, ca[i], cb[j]):
                used[j] = True
                if match(i + 1):
                    return True
                used[j] = False
        return False

    return match(0)


class CoverCodes:
    """Memoised canonical codes of universal-cover balls, interned to ints.

    The subtree below a walk depends only on (current node, previous node,
    remaining depth), so caching on that triple gives the same codes as
    ``canonical_code(unroll(...))`` without materialising the tree. One table
    may serve several bipartite graphs, making codes comparable across them.
    """

    def __init__(self):
        self._table: dict[tuple, int] = {}
        self._memo: dict[tuple, int] = {}
        self._pinned: dict[int, BipartiteGraph] = {}

    def code(self, b: BipartiteGraph, node: int, depth: int, parent: int = -1) -> int:
        self._pinned.setdefault(id(b), b)
        key = (id(b), node, parent, depth)
        got = self._memo.get(key)
        if got is not None:
            return got
        color, label = _color_and_label(b, node)
        if depth == 0:
            kids: tuple[int, ...] = ()
        else:
            kids = tuple(sorted(self.code(b, y, depth - 1, node) for y in b.adjacency[node] if y != parent))
        sig = (color, repr(label), kids)
        cid = self._table.setdefault(sig, len(self._table))
        self._memo[key] = cid
        return cid


@dataclass(frozen=True)
class DualityVerdict:
    passed: bool
    iteration: int
    node_pairs: int = 0
    node_pairs_equal: int = 0          # cross pairs (one vertex from each input) with equal colour
    cross_node_pairs: int = 0
    edge_classes: int = 0
    counterexample: dict | None = None


def _first_violation(colors: Sequence[int], codes: Sequence[int]) -> tuple[int, int] | None:
    by_color: dict[int, int] = {}
    by_code: dict[int, int] = {}
    for i, (c, k) in enumerate(zip(colors, codes)):
        j = by_color.setdefault(c, i)
        if codes[j] != k:
            return j, i
        j = by_code.setdefault(k, i)
        if colors[j] != c:
            return j, i
    return None


def verify_duality(h1: Hypergraph, h2: Hypergraph, i: int,
                   x1: Sequence[Hashable] | None = None, x2: Sequence[Hashable] | None = None) -> DualityVerdict:
    """Check that ``i``-GWL-1 colours match universal-cover codes.

    Vertex colours are compared with depth ``2i`` codes rooted at vertices and
    hyperedge colours with depth ``2i-1`` codes rooted at hyperedges, over all
    pairs of the disjoint union of the two inputs.
    """
    if i < 1:
        raise ValueError("iteration must be >= 1")
    for h in (h1, h2):
        if not is_connected(h):
            raise DisconnectedError("verify_duality expects connected hypergraphs")
    u, offsets = disjoint_union(h1, h2)
    x = None
    if x1 is not None or x2 is not None:
        x = list(x1 if x1 is not None else [0] * h1.n) + list(x2 if x2 is not None else [0] * h2.n)
    ch = gwl1(u, x, i)
    b = star_expansion(u, ch.node_colors[0].tolist())
    table = CoverCodes()
    hv = ch.nodes(i).tolist()
    fe = ch.edges(i).tolist()
    vcodes = [table.code(b, v, 2 * i) for v in range(u.n)]
    ecodes = [table.code(b, u.n + e, 2 * i - 1) for e in range(u.m)]

    bad = _first_violation(hv, vcodes)
    bad_e = _first_violation(fe, ecodes) if bad is None else None
    n1 = h1.n
    cross = h1.n * h2.n
    equal = sum(1 for a in range(n1) for c in range(n1, u.n) if hv[a] == hv[c])
    if bad is not None:
        a, c = bad
        cex = {"kind": "vertex", "pair": [a, c], "colors": [hv[a], hv[c]], "codes": [vcodes[a], vcodes[c]]}
        return DualityVerdict(False, i, u.n * (u.n - 1) // 2, equal, cross, counterexample=cex)
    if bad_e is not None:
        a, c = bad_e
        cex = {"kind": "hyperedge", "pair": [a, c], "edges": [list(u.edges[a]), list(u.edges[c])],
               "colors": [fe[a], fe[c]], "codes": [ecodes[a], ecodes[c]]}
        return DualityVerdict(False, i, u.n * (u.n - 1) // 2, equal, cross, counterexample=cex)
    return DualityVerdict(True, i, u.n * (u.n - 1) // 2, equal, cross, len(set(fe)))


# -- automorphisms -----------------------------------------------------------------

@dataclass(frozen=True)
class OrbitPartition:
    orbits: tuple[tuple[int, ...], ...]
    group_size: int
    automorphisms: np.ndarray   # one row per automorphism, row[v] = image of v

    def orbit_of(self, v: int) -> tuple[int, ...]:
        for o in self.orbits:
            if v in o:
                return o
        raise KeyError(v)

    def labels(self) -> list[int]:
        out = [0] * sum(len(o) for o in self.orbits)
        for i, o in enumerate(self.orbits):
            for v in o:
                out[v] = i
        return out


def _edge_masks(edges: Iterable[Sequence[int]]) -> np.ndarray:
    return np.array([sum(1 << v for v in e) for e in edges], dtype=np.int64)


def _stabilizers(n: int, edges: Sequence[Sequence[int]], chunk: int = 40320) -> np.ndarray:
    """All rows ``p`` of Sym(n) with ``{p(e)} == edges``."""
    target = _edge_masks(edges)
    found = []
    perms = itertools.permutations(range(n))
    while True:
        block = np.array(list(itertools.islice(perms, chunk)), dtype=np.int64).reshape(-1, n)
        if block.shape[0] == 0:
            break
        pow2 = np.left_shift(np.int64(1), block)
        ok = np.ones(block.shape[0], dtype=bool)
        for e in edges:
            img = pow2[:, list(e)].sum(axis=1)
            ok &= np.isin(img, target)
        found.append(block[ok])
        if block.shape[0] < chunk:
            break
    return np.concatenate(found) if found else np.zeros((0, n), dtype=np.int64)


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise OracleCapError(f"n={n} exceeds the brute-force cap {cap} ({n}! permutations)")


def automorphisms(h: Hypergraph, cap: int = DEFAULT_CAP, x: Sequence[Hashable] | None = None) -> OrbitPartition:
    """Enumerate Sym(V) and keep the permutations that fix the edge set.

    Distinct hyperedges map to distinct images under a bijection, so the
    image set equals the edge set iff every image is an edge. With ``x`` the
    permutations must also preserve node attributes.
    """
    _check_cap(h.n, cap)
    auts = _stabilizers(h.n, h.edges) if h.n else np.zeros((1, 0), dtype=np.int64)
    if x is not None and auts.size:
        xa = np.array([hash(a) for a in x])
        auts = auts[(xa[auts] == xa[None, :]).all(axis=1)]
    seen = [False] * h.n
    orbits = []
    for v in range(h.n):
        if seen[v]:
            continue
        orb = sorted(set(auts[:, v].tolist()))
        for u in orb:
            seen[u] = True
        orbits.append(tuple(orb))
    return OrbitPartition(tuple(orbits), int(auts.shape[0]), auts)


def k_set_isomorphic(h: Hypergraph, s: Iterable[int], t: Iterable[int], cap: int = DEFAULT_CAP,
                     orbits: OrbitPartition | None = None) -> bool:
    """True iff some automorphism maps ``s`` onto ``t`` and ``t`` onto ``s``."""
    s, t = frozenset(s), frozenset(t)
    if len(s) != len(t):
        raise ValueError("vertex sets must have equal size")
    _check_cap(h.n, cap)
    if s == t:
        return True
    auts = (orbits or automorphisms(h, cap)).automorphisms
    for row in auts:
        if frozenset(row[list(s)].tolist()) == t and frozenset(row[list(t)].tolist()) == s:
            return True
    return False


# -- neighbourhood regularity --------------------------------------------------------

def neighborhood(h: Hypergraph, v: int) -> tuple[list[int], list[tuple[int, ...]]]:
    """Vertices and hyperedges of the subhypergraph formed by the hyperedges containing ``v``."""
    inc = [h.edges[e] for e in h.incident(v).tolist()]
    verts = sorted({u for e in inc for u in e} | {v})
    return verts, inc


def rooted_hypergraph_isomorphic(ea: Sequence[Sequence[int]], ra: int,
                                 eb: Sequence[Sequence[int]], rb: int) -> bool:
    """Is there a bijection of the vertex sets mapping root to root and the
    edge set of ``ea`` onto that of ``eb``? Exhaustive."""
    va = sorted({u for e in ea for u in e} | {ra})
    vb = sorted({u for e in eb for u in e} | {rb})
    if len(va) != len(vb) or len(ea) != len(eb):
        return False
    if sorted(len(e) for e in ea) != sorted(len(e) for e in eb):
        return False
    target = {frozenset(e) for e in eb}
    rest_a = [u for u in va if u != ra]
    rest_b = [u for u in vb if u != rb]
    for perm in itertools.permutations(rest_b):
        f = dict(zip(rest_a, perm))
        f[ra] = rb
        if all(frozenset(f[u] for u in e) in target for e in ea):
            return True
    return False


def is_neighborhood_regular(h: Hypergraph, rooted: bool = True) -> tuple[bool, tuple[int, int] | None]:
    """Check that all vertex neighbourhoods are pairwise isomorphic.

    Returns ``(ok, witness)`` where ``witness`` is a pair of vertices with
    non-isomorphic neighbourhoods. Isomorphism is an equivalence, so comparing
    every vertex against vertex 0 suffices.
    """
    if h.n <= 1:
        return True, None
    _, e0 = neighborhood(h, 0)
    for v in range(1, h.n):
        _, ev = neighborhood(h, v)
        if rooted:
            same = rooted_hypergraph_isomorphic(e0, 0, ev, v)
        else:
            same = any(rooted_hypergraph_isomorphic(e0, a, ev, v) for a in neighborhood(h, 0)[0])
        if not same:
            return False, (0, v)
    return True, None


def orbit_permutations(h: Hypergraph, cap: int = DEFAULT_CAP) -> list[Permutation]:
    return [Permutation(row) for row in automorphisms(h, cap).automorphisms]
