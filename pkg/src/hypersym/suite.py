"""Oracle checks run by ``hypersym verify``, over built-in fixtures or one user hypergraph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import fixtures as F
from .augment import AugmentationPlan, attach_covers, replace_components, sample
from .core import (Hypergraph, Permutation, apply_permutation, connected_components, induced_subhypergraph,
                   is_connected, power_iteration, stationary_distribution)
from .oracle import DEFAULT_CAP, automorphisms, is_neighborhood_regular, verify_duality
from .refine import gwl1, partition, refines
from .symmetry import find_symmetries, permute_report


@dataclass
class Check:
    name: str
    passed: bool = True
    detail: str = ""
    counterexample: dict | None = field(default=None)

    def fail(self, **info) -> "Check":
        self.passed = False
        if self.counterexample is None:
            self.counterexample = info
        return self

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


Fixtures = Mapping[str, Hypergraph]


def _small(fx: Fixtures, cap: int = DEFAULT_CAP) -> dict[str, Hypergraph]:
    return {k: h for k, h in fx.items() if h.n <= cap}


def check_duality(fx: Fixtures, pairs=None) -> Check:
    c = Check("universal-cover duality")
    pairs = list(pairs or [])
    pairs += [(f"{k}~{k}", h, h) for k, h in fx.items() if h.n and is_connected(h)]
    runs = 0
    for name, a, b in pairs:
        for i in (1, 2, 3):
            v = verify_duality(a, b, i)
            runs += 1
            if not v.passed:
                return c.fail(pair=name, iteration=i, **(v.counterexample or {}))
    c.detail = f"{runs} (pair, iteration) runs"
    return c


def check_incompleteness() -> Check:
    c = Check("gwl1 incompleteness exhibit")
    h = F.c4_c5()
    classes = len(partition(gwl1(h).final))
    orbits = automorphisms(h, cap=9).orbits
    after = partition(gwl1(attach_covers(h, find_symmetries(h, L=2))).final)
    want = frozenset(frozenset(o) for o in orbits)
    c.detail = f"classes {classes}, orbits {len(orbits)}, classes after covers {len(after)}"
    if classes != 1 or len(orbits) != 2 or after != want:
        c.fail(classes=classes, orbits=[list(o) for o in orbits], after=sorted(sorted(s) for s in after))
    return c


def check_invariance(fx: Fixtures) -> Check:
    """Same orbit implies same colour, before and after attaching covers."""
    c = Check("orbit invariance before and after augmentation")
    small = _small(fx)
    for name, h in small.items():
        orbits = automorphisms(h).labels()
        before = gwl1(h).final
        after = gwl1(attach_covers(h, find_symmetries(h, L="conv"))).final
        for label, colors in (("original", before), ("augmented", after)):
            if not refines(orbits, colors):
                return c.fail(fixture=name, stage=label, edges=[list(e) for e in h.edges])
    c.detail = f"{len(small)} hypergraphs"
    return c


def check_regularity(fx: Fixtures) -> Check:
    c = Check("component neighbourhood regularity")
    total = 0
    for name, h in fx.items():
        for comp in find_symmetries(h, L="conv").components:
            if comp.size > DEFAULT_CAP:
                continue
            total += 1
            sub = induced_subhypergraph(h, comp.vertices)[0]
            ok, witness = is_neighborhood_regular(sub)
            if not ok:
                return c.fail(fixture=name, component=list(comp.vertices),
                              vertices=[comp.vertices[w] for w in witness],
                              edges=[list(e) for e in h.edges])
    c.detail = f"{total} components"
    return c


SIZE_SPLIT_UNIONS = {
    "C4^3+C5^3": (F.cyclic_triples(4), F.cyclic_triples(5)),
    "C5^3+C6^3": (F.cyclic_triples(5), F.cyclic_triples(6)),
    "cycle3+cycle4": (F.cycle(3), F.cycle(4)),
    "cycle3+cycle4+cycle5": (F.cycle(3), F.cycle(4), F.cycle(5)),
    "C4^3+C5^3+C7^3": (F.cyclic_triples(4), F.cyclic_triples(5), F.cyclic_triples(7)),
    "cycle4+cycle6+cycle8": (F.cycle(4), F.cycle(6), F.cycle(8)),
}


def size_split_classes(parts: tuple[Hypergraph, ...]) -> tuple[frozenset, frozenset]:
    """(classes after attaching covers, vertex sets of the operands)."""
    h = F.union(*parts)
    after = partition(gwl1(attach_covers(h, find_symmetries(h, L=2))).final)
    comps = connected_components(h).vertex_sets()
    return after, frozenset(frozenset(s) for s in comps)


def check_size_split() -> Check:
    c = Check("class split by component size")
    for name, parts in SIZE_SPLIT_UNIONS.items():
        after, comps = size_split_classes(parts)
        if after != comps:
            return c.fail(union=name, classes=sorted(sorted(s) for s in after))
    c.detail = f"{len(SIZE_SPLIT_UNIONS)} unions"
    return c


def check_equivariance(fx: Fixtures, trials: int = 3, seed: int = 0) -> Check:
    c = Check("permutation equivariance")
    rng = np.random.default_rng(seed)
    runs = 0
    for name, h in fx.items():
        base = gwl1(h).final
        rep = find_symmetries(h, L=2)
        for _ in range(trials):
            p = Permutation(rng.permutation(h.n))
            g = apply_permutation(h, p)
            moved = partition(gwl1(g).final)
            expect = frozenset(frozenset(p.apply_set(s)) for s in partition(base))
            rep_g = frozenset(find_symmetries(g, L=2).vertex_sets)
            runs += 1
            if moved != expect or rep_g != permute_report(rep, p):
                return c.fail(fixture=name, permutation=p.mapping.tolist())
    c.detail = f"{runs} permutations"
    return c


def check_stationary(fx: Fixtures) -> Check:
    c = Check("stationary closed form matches power iteration")
    count = 0
    for name, h in fx.items():
        if h.m == 0 or not is_connected(h):
            continue
        count += 1
        gap = float(np.abs(stationary_distribution(h).probs - power_iteration(h)).max())
        if gap > 1e-9:
            return c.fail(fixture=name, max_gap=gap)
    c.detail = f"{count} connected hypergraphs"
    return c


def check_degenerate(fx: Fixtures) -> Check:
    c = Check("degenerate sampling identities")
    for name, h in fx.items():
        r = find_symmetries(h, L=2)
        if sample(h, r, AugmentationPlan.uniform(r, 0.0, 0.0)) != h:
            return c.fail(fixture=name, case="p=0,q=0")
        if sample(h, r, AugmentationPlan.uniform(r, 1.0, 1.0)) != replace_components(h, r):
            return c.fail(fixture=name, case="p=1,q=1")
    return c


def fixture_suite() -> list[Callable[[], Check]]:
    fx = F.corpus()
    pairs = [("C4^3~C5^3", F.cyclic_triples(4), F.cyclic_triples(5)),
             ("T~C3", F.filled_triangle(), F.triangle())]
    return [lambda: check_duality(fx, pairs), check_incompleteness, lambda: check_invariance(fx),
            lambda: check_regularity(fx), check_size_split, lambda: check_equivariance(fx),
            lambda: check_stationary(fx), lambda: check_degenerate(fx)]


def input_suite(h: Hypergraph, cap: int = DEFAULT_CAP) -> list[Callable[[], Check]]:
    fx = {"input": h}
    checks = [lambda: check_equivariance(fx), lambda: check_stationary(fx), lambda: check_degenerate(fx)]
    if h.n and is_connected(h):
        checks.insert(0, lambda: check_duality(fx))
    if h.n <= cap:
        checks += [lambda: check_invariance(fx), lambda: check_regularity(fx)]
    return checks


def run(checks: list[Callable[[], Check]]) -> list[Check]:
    return [f() for f in checks]
