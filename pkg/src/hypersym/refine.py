"""GWL-1 colour refinement on the star expansion and WL-1 on the clique expansion.

Colours are dense integer ids. At every iteration each element's signature
(its previous colour, sorted multiset of partner colours) is interned by
sorting the distinct signatures, so an id is a function of the signature and
does not depend on element order. Ids are still only meaningful within one
run; compare two hypergraphs by refining their disjoint union.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence, Union

import numpy as np
from scipy import sparse

from .core import Hypergraph, incidence_matrix

#: Iteration budget meaning "run until the partition stops refining".
UNTIL_CONVERGENCE = "conv"

Budget = Union[int, str, None]


@dataclass(frozen=True)
class ColorHistory:
    """Per-iteration colours. ``node_colors[i][v]`` is the colour of ``v``
    after ``i`` iterations; ``edge_colors`` is None for WL-1 runs."""

    node_colors: tuple[np.ndarray, ...]
    edge_colors: tuple[np.ndarray, ...] | None
    converged_at: int | None

    @property
    def iterations(self) -> int:
        return len(self.node_colors) - 1

    @property
    def final(self) -> np.ndarray:
        return self.node_colors[-1]

    def nodes(self, i: int | None = None) -> np.ndarray:
        return self.node_colors[self.iterations if i is None else i]

    def edges(self, i: int | None = None) -> np.ndarray:
        if self.edge_colors is None:
            raise ValueError("this history carries no hyperedge colours")
        return self.edge_colors[self.iterations if i is None else i]


def node_attributes(n: int, x: Sequence[Hashable] | None = None) -> np.ndarray:
    """Dense initial classes from arbitrary per-vertex attributes (default: all equal)."""
    if x is None:
        return np.zeros(n, dtype=np.int64)
    if len(x) != n:
        raise ValueError(f"node attributes have length {len(x)}, expected {n}")
    keys = [a if isinstance(a, (int, float, str)) else repr(a) for a in x]
    try:
        uniq = sorted(set(keys))
    except TypeError:
        uniq = sorted(set(keys), key=repr)
    idx = {k: i for i, k in enumerate(uniq)}
    return np.fromiter((idx[k] for k in keys), dtype=np.int64, count=n)


def _intern(own: np.ndarray, ptr: np.ndarray, partner: np.ndarray) -> np.ndarray:
    """Dense ids for signatures ``(own[i], sorted(partner[ptr[i]:ptr[i+1]]))``."""
    k = own.size
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    seg = np.repeat(np.arange(k), np.diff(ptr))
    flat = partner[np.lexsort((partner, seg))].tolist()
    own_l = own.tolist()
    p = ptr.tolist()
    sigs = [(own_l[i], tuple(flat[p[i]:p[i + 1]])) for i in range(k)]
    table = {s: j for j, s in enumerate(sorted(set(sigs)))}
    return np.fromiter((table[s] for s in sigs), dtype=np.int64, count=k)


def _num_classes(c: np.ndarray) -> int:
    return int(c.max()) + 1 if c.size else 0


def _budget(L: Budget, bound: int) -> tuple[int, bool]:
    if L is None or L == UNTIL_CONVERGENCE or (isinstance(L, float) and np.isinf(L)):
        return bound, True
    if isinstance(L, str):
        raise ValueError(f"iteration budget must be an int or {UNTIL_CONVERGENCE!r}, got {L!r}")
    if int(L) < 0:
        raise ValueError("iteration budget must be non-negative")
    return int(L), False


def gwl1(h: Hypergraph, x: Sequence[Hashable] | None = None, L: Budget = UNTIL_CONVERGENCE) -> ColorHistory:
    """Run GWL-1 on ``h``.

    One iteration computes ``f_e <- (f_e, {{h_v : v in e}})`` and then
    ``h_v <- (h_v, {{f_e : e ∋ v}})`` with the fresh hyperedge colours.
    With ``L="conv"`` the run stops at the first iteration whose node and
    hyperedge partitions both equal the previous ones.
    """
    limit, until_conv = _budget(L, h.n + h.m + 2)
    hv = node_attributes(h.n, x)
    fe = np.zeros(h.m, dtype=np.int64)
    nodes, edges = [hv], [fe]
    converged_at = None
    for i in range(1, limit + 1):
        fe = _intern(fe, h.edge_ptr, hv[h.edge_members])
        hv = _intern(hv, h.vertex_ptr, fe[h.vertex_edges])
        nodes.append(hv)
        edges.append(fe)
        if converged_at is None and _num_classes(hv) == _num_classes(nodes[-2]) \
                and _num_classes(fe) == _num_classes(edges[-2]):
            converged_at = i
            if until_conv:
                break
    return ColorHistory(tuple(nodes), tuple(edges), converged_at)


def clique_neighbors(h: Hypergraph) -> tuple[np.ndarray, np.ndarray]:
    """CSR (indptr, indices) of the off-diagonal support of the clique expansion."""
    H = incidence_matrix(h)
    A = (H @ H.T).tocsr()
    A.setdiag(0)
    A.eliminate_zeros()
    A.sort_indices()
    return A.indptr.astype(np.int64), A.indices.astype(np.int64)


def wl1_clique(h: Hypergraph, x: Sequence[Hashable] | None = None, L: Budget = UNTIL_CONVERGENCE) -> ColorHistory:
    """Classic WL-1 on the unweighted clique-expansion graph of ``h``."""
    limit, until_conv = _budget(L, h.n + 2)
    ptr, nbr = clique_neighbors(h)
    hv = node_attributes(h.n, x)
    nodes = [hv]
    converged_at = None
    for i in range(1, limit + 1):
        hv = _intern(hv, ptr, hv[nbr])
        nodes.append(hv)
        if converged_at is None and _num_classes(hv) == _num_classes(nodes[-2]):
            converged_at = i
            if until_conv:
                break
    return ColorHistory(tuple(nodes), None, converged_at)


def color_classes(ch: ColorHistory, i: int | None = None) -> dict[int, list[int]]:
    """Map colour id -> sorted vertex ids at iteration ``i`` (default: last)."""
    if i is not None and not 0 <= i <= ch.iterations:
        raise IndexError(f"iteration {i} not recorded (0..{ch.iterations})")
    out: dict[int, list[int]] = {}
    for v, c in enumerate(ch.nodes(i).tolist()):
        out.setdefault(c, []).append(v)
    return out


def aggregate_representation(ch: ColorHistory, s: Iterable[int], i: int | None = None) -> tuple[int, ...]:
    """Canonical code of a vertex set: the sorted multiset of its node colours."""
    colors = ch.nodes(i)
    code = tuple(sorted(int(colors[v]) for v in s))
    if not code:
        raise ValueError("aggregate_representation needs a non-empty vertex set")
    return code


def partition(colors: Sequence[int]) -> frozenset[frozenset[int]]:
    """The set partition of element ids induced by a colour array."""
    groups: dict[int, set[int]] = {}
    for v, c in enumerate(np.asarray(colors).tolist()):
        groups.setdefault(c, set()).add(v)
    return frozenset(frozenset(g) for g in groups.values())


def refines(finer: Sequence[int], coarser: Sequence[int]) -> bool:
    """True if equal colour in ``finer`` implies equal colour in ``coarser``."""
    seen: dict[int, int] = {}
    for a, b in zip(np.asarray(finer).tolist(), np.asarray(coarser).tolist()):
        if seen.setdefault(a, b) != b:
            return False
    return True
