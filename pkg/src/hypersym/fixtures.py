"""Named small hypergraphs, seeded random generators and the n <= 8 test corpus."""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .core import Hypergraph, build, disjoint_union, is_connected


def triangle() -> Hypergraph:
    """C3: the bare 3-cycle."""
    return build(3, [[0, 1], [1, 2], [0, 2]])


def filled_triangle() -> Hypergraph:
    """T: the 3-cycle plus the hyperedge covering it."""
    return build(3, [[0, 1], [1, 2], [0, 2], [0, 1, 2]])


def path(n: int = 3) -> Hypergraph:
    return build(n, [[i, i + 1] for i in range(n - 1)])


def star(leaves: int) -> Hypergraph:
    return build(leaves + 1, [[0, i] for i in range(1, leaves + 1)])


def cycle(n: int) -> Hypergraph:
    return build(n, [[i, (i + 1) % n] for i in range(n)])


def complete_uniform(n: int, r: int) -> Hypergraph:
    """All r-subsets of n vertices (K_n for r=2, C_4^3 = complete_uniform(4, 3))."""
    return build(n, itertools.combinations(range(n), r))


def cyclic_triples(n: int) -> Hypergraph:
    """C_n^3: hyperedges {i, i+1, i+2} mod n. For n=4 this is the complete 3-uniform one."""
    return build(n, [[i, (i + 1) % n, (i + 2) % n] for i in range(n)])


def fano() -> Hypergraph:
    return build(7, [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]])


def cube() -> Hypergraph:
    return build(8, [[u, u ^ (1 << b)] for u in range(8) for b in range(3) if u < u ^ (1 << b)])


def prism() -> Hypergraph:
    return build(6, [[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5], [0, 3], [1, 4], [2, 5]])


def octahedron() -> Hypergraph:
    return build(6, [[u, v] for u, v in itertools.combinations(range(6), 2) if v != u + 3])


def paired_triples() -> Hypergraph:
    """3-uniform, 2-regular and GWL-1 symmetric, yet vertices 0 and 2 have
    neighbourhoods of different orders (4 vs 5 vertices)."""
    return build(6, [[0, 1, 2], [0, 1, 3], [2, 4, 5], [3, 4, 5]])


def union(*hs: Hypergraph) -> Hypergraph:
    return disjoint_union(*hs)[0]


def c4_c5() -> Hypergraph:
    """C_4^3 disjoint union C_5^3: nine vertices, one GWL-1 class, two orbits."""
    return union(cyclic_triples(4), cyclic_triples(5))


def random_hypergraph(rng: np.random.Generator, n: int, m: int, smin: int = 2, smax: int = 4) -> Hypergraph:
    smax = min(smax, n)
    edges = [rng.choice(n, size=int(rng.integers(smin, smax + 1)), replace=False).tolist() for _ in range(m)]
    return build(n, edges)


def random_connected(rng: np.random.Generator, n: int, m: int, smin: int = 2, smax: int = 4,
                     tries: int = 200) -> Hypergraph | None:
    """First connected draw of ``random_hypergraph`` within ``tries`` attempts."""
    for _ in range(tries):
        h = random_hypergraph(rng, n, m, smin, smax)
        if is_connected(h):
            return h
    return None


def random_connected_stream(seed: int = 0, n_range=(5, 8), m_range=(6, 14),
                            smax_range=(2, 4)) -> Iterator[Hypergraph]:
    """Endless seeded stream of small connected hypergraphs; sizes drawn per item."""
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        smax = int(rng.integers(smax_range[0], smax_range[1] + 1))
        h = random_connected(rng, n, m, 2, smax)
        if h is not None:
            yield h


def report_bearing(count: int, seed: int = 0, L=2) -> list[Hypergraph]:
    """The first ``count`` members of the stream whose guarded symmetry report is non-empty."""
    from .symmetry import find_symmetries
    out = []
    for h in random_connected_stream(seed):
        if len(find_symmetries(h, L=L)):
            out.append(h)
            if len(out) == count:
                return out
    return out


def named() -> dict[str, Hypergraph]:
    """Hand-built corpus members, all with n <= 8."""
    d = {
        "triangle": triangle(), "filled_triangle": filled_triangle(), "fano": fano(),
        "cube": cube(), "prism": prism(), "octahedron": octahedron(),
        "paired_triples": paired_triples(),
        "K4^3": complete_uniform(4, 3), "K5^3": complete_uniform(5, 3), "K6^3": complete_uniform(6, 3),
        "K5^4": complete_uniform(5, 4), "K4": complete_uniform(4, 2), "K5": complete_uniform(5, 2),
        "single_edge3": build(3, [[0, 1, 2]]), "single_edge5": build(5, [range(5)]),
    }
    for k in range(3, 9):
        d[f"path{k}"] = path(k)
    for k in range(2, 8):
        d[f"star{k}"] = star(k)
    for k in range(4, 9):
        d[f"cycle{k}"] = cycle(k)
    for k in range(5, 9):
        d[f"C{k}^3"] = cyclic_triples(k)
    d["triangle+triangle"] = union(triangle(), triangle())
    d["triangle+cycle4"] = union(triangle(), cycle(4))
    d["triangle+cycle5"] = union(triangle(), cycle(5))
    d["cycle4+cycle4"] = union(cycle(4), cycle(4))
    d["K4^3+triangle"] = union(complete_uniform(4, 3), triangle())
    d["C5^3+triangle"] = union(cyclic_triples(5), triangle())
    d["path3+triangle"] = union(path(3), triangle())
    d["star3+path4"] = union(star(3), path(4))
    d["filled+triangle"] = union(filled_triangle(), triangle())
    return d


def corpus(random_count: int = 20, seed: int = 7, symmetric_count: int = 6) -> dict[str, Hypergraph]:
    """Named fixtures, ``random_count`` seeded random connected hypergraphs and
    the first ``symmetric_count`` random ones with a non-empty symmetry report."""
    d = named()
    for i, h in enumerate(itertools.islice(random_connected_stream(seed), random_count)):
        d[f"random{i}"] = h
    for i, h in enumerate(report_bearing(symmetric_count)):
        d[f"random_symmetric{i}"] = h
    return d


def planted_blocks(blocks: int, seed: int = 0, noise_edges: int | None = None) -> Hypergraph:
    """Large synthetic hypergraph: ``blocks`` planted copies of small regular
    hypergraphs (C_4^3, C_5^3, C_6^3, 4- and 5-cycles) joined by random noise
    hyperedges of sizes 2-4 (repeated members collapse, so some noise edges shrink)."""
    rng = np.random.default_rng(seed)
    kinds = [cyclic_triples(4), cyclic_triples(5), cyclic_triples(6), cycle(4), cycle(5)]
    choice = rng.integers(0, len(kinds), size=blocks)
    edges: list[tuple[int, ...]] = []
    off = 0
    for k in choice.tolist():
        b = kinds[k]
        edges.extend(tuple(v + off for v in e) for e in b.edges)
        off += b.n
    n = off
    noise = blocks // 2 if noise_edges is None else noise_edges
    sizes = rng.integers(2, 5, size=noise)
    members = rng.integers(0, n, size=(noise, 4))
    for s, row in zip(sizes.tolist(), members.tolist()):
        edges.append(tuple(row[:s]))
    return build(n, edges)

