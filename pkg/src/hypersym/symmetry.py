"""Discovery of GWL-1 indistinguishable, maximally connected induced subhypergraphs."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .core import Hypergraph, Permutation, component_labels
from .refine import Budget, gwl1

MIN_COMPONENT_SIZE = 3

STATS_HEADER = ["dataset", "n", "m", "components", "frac_ge3", "mean_size", "median_size", "max_size"]


@dataclass(frozen=True)
class SymmetricComponent:
    class_id: int
    vertices: tuple[int, ...]
    edge_ids: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> dict:
        return {"class_id": self.class_id, "vertices": list(self.vertices),
                "edge_ids": list(self.edge_ids), "size": self.size}


@dataclass(frozen=True)
class SymmetryReport:
    components: tuple[SymmetricComponent, ...]
    L_used: Budget
    guard_enabled: bool
    examined: int = 0            # connected components over all colour classes
    skipped_by_guard: int = 0
    class_sizes: tuple[int, ...] = field(default=())  # sizes of every examined component

    @property
    def vertex_sets(self) -> list[tuple[int, ...]]:
        return [c.vertices for c in self.components]

    @property
    def edge_ids(self) -> list[int]:
        return sorted(e for c in self.components for e in c.edge_ids)

    def __len__(self) -> int:
        return len(self.components)

    def to_dict(self) -> dict:
        return {"L": self.L_used, "guard": self.guard_enabled, "examined": self.examined,
                "skipped_by_guard": self.skipped_by_guard,
                "components": [c.to_dict() for c in self.components]}


def _degree_multisets(h: Hypergraph, sizes: set[int]) -> set[tuple[int, ...]]:
    # only hyperedges whose size matches some candidate component can collide
    deg = h.degrees.tolist()
    return {tuple(sorted(deg[v] for v in e)) for e in h.edges if len(e) in sizes}


def find_symmetries(h: Hypergraph, x: Sequence[Hashable] | None = None, L: Budget = 2,
                    guard: bool = True) -> SymmetryReport:
    """Find the maximal connected induced subhypergraphs whose vertices share
    one ``L``-GWL-1 colour and that have at least three vertices.

    With ``guard`` a component is skipped when its multiset of (global)
    vertex degrees equals that of an existing hyperedge, so a covering
    hyperedge cannot alias an existing hyperedge class.
    """
    colors = gwl1(h, x, L).final
    n, m = h.n, h.m
    if m:
        member_colors = colors[h.edge_members]
        starts = h.edge_ptr[:-1]
        mono = np.minimum.reduceat(member_colors, starts) == np.maximum.reduceat(member_colors, starts)
    else:
        mono = np.zeros(0, dtype=bool)
    labels = component_labels(n, h.edge_ptr, h.edge_members, keep_edges=mono)
    sizes = np.bincount(labels) if n else np.zeros(0, dtype=np.int64)
    big = np.flatnonzero(sizes >= MIN_COMPONENT_SIZE)

    order = np.argsort(labels, kind="stable")
    bounds = np.zeros(sizes.size + 1, dtype=np.int64)
    np.cumsum(sizes, out=bounds[1:])
    mono_ids = np.flatnonzero(mono)
    edge_comp = labels[h.edge_members[h.edge_ptr[:-1][mono_ids]]] if mono_ids.size else mono_ids
    edges_of: dict[int, list[int]] = {}
    big_set = set(big.tolist())
    for e, c in zip(mono_ids.tolist(), edge_comp.tolist()):
        if c in big_set:
            edges_of.setdefault(c, []).append(e)

    e_deg: set[tuple[int, ...]] = set()
    deg = h.degrees
    if guard and big.size:
        e_deg = _degree_multisets(h, set(sizes[big].tolist()))

    comps = []
    skipped = 0
    for c in big.tolist():
        verts = order[bounds[c]:bounds[c + 1]]
        if guard and tuple(sorted(deg[verts].tolist())) in e_deg:
            skipped += 1
            continue
        comps.append(SymmetricComponent(int(colors[verts[0]]), tuple(verts.tolist()),
                                        tuple(edges_of.get(c, ()))))
    return SymmetryReport(tuple(comps), L, guard, examined=int(sizes.size),
                          skipped_by_guard=skipped, class_sizes=tuple(sizes.tolist()))


def permute_report(report: SymmetryReport, p: Permutation) -> frozenset[tuple[int, ...]]:
    """Image of the report's vertex sets under ``p`` as a family of sets."""
    return frozenset(p.apply_set(s) for s in report.vertex_sets)


def component_statistics(reports: Sequence[SymmetryReport], hs: Sequence[Hypergraph],
                         names: Sequence[str] | None = None) -> list[dict]:
    """One row per dataset: the share of examined colour-class components that
    were selected, and the size distribution of the selected ones."""
    if len(reports) != len(hs):
        raise ValueError("reports and hypergraphs must be parallel lists")
    names = list(names) if names is not None else [f"dataset{i}" for i in range(len(hs))]
    rows = []
    for name, r, h in zip(names, reports, hs):
        sizes = [c.size for c in r.components]
        rows.append({
            "dataset": name, "n": h.n, "m": h.m, "components": r.examined,
            "frac_ge3": len(sizes) / r.examined if r.examined else 0.0,
            "mean_size": statistics.fmean(sizes) if sizes else 0.0,
            "median_size": float(statistics.median(sizes)) if sizes else 0.0,
            "max_size": max(sizes) if sizes else 0,
        })
    return rows


def statistics_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=STATS_HEADER, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
