"""Symmetry-breaking transforms driven by a :class:`SymmetryReport`.

Deterministic variants attach one covering hyperedge per discovered
component (optionally deleting the component's own hyperedges). The random
variant drops each component hyperedge with probability ``p`` and attaches
component ``i``'s cover with probability ``q[i]``; :func:`solve_unbiased`
picks the ``q`` that keep the expected stationary distribution equal to the
original one.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, sparse

from .core import DisconnectedError, Hypergraph, is_connected
from .symmetry import SymmetryReport

log = logging.getLogger(__name__)

MODES = ("attach_only", "replace", "sample")
CHUNK = 10_000
BOUNDARY_SLACK = 1e-9


@dataclass(frozen=True)
class AugmentationPlan:
    p: float = 0.0
    q: tuple[float, ...] = ()
    seed: int = 0
    mode: str = "sample"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if any(not 0.0 <= qi <= 1.0 for qi in self.q):
            raise ValueError("every q_i must lie in [0, 1]")

    @classmethod
    def uniform(cls, report: SymmetryReport, p: float, q: float, seed: int = 0) -> "AugmentationPlan":
        return cls(p, (q,) * len(report), seed)

    def check(self, report: SymmetryReport) -> None:
        if len(self.q) != len(report):
            raise ValueError(f"plan has {len(self.q)} attach probabilities for {len(report)} components")


@dataclass(frozen=True)
class AugmentResult:
    hypergraph: Hypergraph
    dropped_edges: tuple[int, ...]
    added_covers: tuple[int, ...]   # component indices whose cover was attached


def _assemble(h: Hypergraph, dropped: set[int], covers: Sequence[tuple[int, ...]]) -> Hypergraph:
    edges = [e for i, e in enumerate(h.edges) if i not in dropped]
    present = set(edges)
    for c in covers:
        if c not in present:
            present.add(c)
            edges.append(c)
    return Hypergraph(h.n, edges)


def attach_covers(h: Hypergraph, r: SymmetryReport) -> Hypergraph:
    """``E ∪ R_V``: one hyperedge spanning each component's vertex set."""
    return _assemble(h, set(), r.vertex_sets)


def replace_components(h: Hypergraph, r: SymmetryReport) -> Hypergraph:
    """``(E \\ R_E) ∪ R_V``: component hyperedges replaced by their covers."""
    return _assemble(h, set(r.edge_ids), r.vertex_sets)


def sample_detailed(h: Hypergraph, r: SymmetryReport, plan: AugmentationPlan) -> AugmentResult:
    plan.check(r)
    rng = np.random.default_rng(plan.seed)
    rE = r.edge_ids
    drop = rng.random(len(rE)) < plan.p
    attach = rng.random(len(r)) < np.asarray(plan.q, dtype=float)
    dropped = tuple(e for e, d in zip(rE, drop.tolist()) if d)
    added = tuple(i for i, a in enumerate(attach.tolist()) if a)
    g = _assemble(h, set(dropped), [r.components[i].vertices for i in added])
    return AugmentResult(g, dropped, added)


def sample(h: Hypergraph, r: SymmetryReport, plan: AugmentationPlan) -> Hypergraph:
    """One draw of the randomly perturbed hypergraph; deterministic given ``plan.seed``."""
    return sample_detailed(h, r, plan).hypergraph


def augment(h: Hypergraph, r: SymmetryReport, plan: AugmentationPlan) -> AugmentResult:
    """Apply ``plan.mode``: attach every cover, replace every component, or sample."""
    everything = tuple(range(len(r)))
    if plan.mode == "attach_only":
        return AugmentResult(attach_covers(h, r), (), everything)
    if plan.mode == "replace":
        return AugmentResult(replace_components(h, r), tuple(r.edge_ids), everything)
    return sample_detailed(h, r, plan)


# -- expected stationary distribution ------------------------------------------------

class _Model:
    """Bernoulli structure of the perturbed degrees.

    Every vertex degree of a draw equals a fixed part plus a sum of
    independent Bernoulli contributions: each component hyperedge (kept with
    probability ``1-p``) and each cover (attached with probability ``q_i``). A
    cover that coincides with one of its component's hyperedges is merged with
    it into a single variable present with probability ``1 - p(1 - q_i)``.
    """

    def __init__(self, h: Hypergraph, r: SymmetryReport):
        self.h, self.r = h, r
        rE = r.edge_ids
        self.rE = np.asarray(rE, dtype=np.int64)
        in_rE = np.zeros(h.m, dtype=bool)
        in_rE[self.rE] = True
        deg_fixed = np.zeros(h.n, dtype=np.int64)
        fixed_ids = np.flatnonzero(~in_rE)
        for e in fixed_ids.tolist():
            deg_fixed[list(h.edges[e])] += 1
        self.deg_fixed = deg_fixed
        self.sizes_rE = h.edge_sizes[self.rE] if self.rE.size else np.zeros(0, np.int64)
        # cover index -> position in rE of an identical hyperedge, or -1
        pos = {e: k for k, e in enumerate(rE)}
        self.merged = np.array([pos.get(h.edge_index(c.vertices), -1) for c in r.components],
                               dtype=np.int64)
        self.cover_sizes = np.array([c.size for c in r.components], dtype=np.int64)
        rows, cols = [], []
        for k, e in enumerate(rE):
            rows.extend([k] * len(h.edges[e]))
            cols.extend(h.edges[e])
        self.inc_rE = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(rE), h.n))
        rows, cols = [], []
        for i, c in enumerate(r.components):
            rows.extend([i] * c.size)
            cols.extend(c.vertices)
        self.inc_cov = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(r), h.n))

    @property
    def num_variables(self) -> int:
        return int(self.rE.size + np.count_nonzero(self.merged < 0))

    # exact -----------------------------------------------------------------
    def variables(self, v: int, p: float, q: Sequence[float]) -> list[tuple[int, int, float]]:
        """``(numerator increment, denominator increment, presence probability)``."""
        out = []
        merged_with = {int(k): i for i, k in enumerate(self.merged.tolist()) if k >= 0}
        for k, e in enumerate(self.rE.tolist()):
            prob = 1.0 - p
            if k in merged_with:
                prob = 1.0 - p * (1.0 - q[merged_with[k]])
            out.append((int(v in self.h.edges[e]), int(self.sizes_rE[k]), prob))
        for i, c in enumerate(self.r.components):
            if self.merged[i] < 0:
                out.append((int(v in c.vertices), int(c.size), float(q[i])))
        return out

    def exact(self, v: int, p: float, q: Sequence[float]) -> float:
        """``E[deg(v) / sum_u deg(u)]`` by convolving the joint law of (numerator, denominator)."""
        dist = {(int(self.deg_fixed[v]), int(self.deg_fixed.sum())): 1.0}
        for dn, dd, prob in self.variables(v, p, q):
            nxt: dict[tuple[int, int], float] = {}
            for (a, b), w in dist.items():
                if prob != 1.0:
                    nxt[(a, b)] = nxt.get((a, b), 0.0) + w * (1.0 - prob)
                if prob != 0.0:
                    key = (a + dn, b + dd)
                    nxt[key] = nxt.get(key, 0.0) + w * prob
            dist = nxt
        return math.fsum(w * a / b for (a, b), w in dist.items() if b > 0)

    # Monte Carlo -----------------------------------------------------------
    def degrees(self, keep: np.ndarray, attach: np.ndarray) -> np.ndarray:
        """Degrees of every vertex for a batch of draws (rows)."""
        attach = attach.copy()
        m = self.merged >= 0
        if m.any():
            # a cover equal to a kept hyperedge adds nothing
            attach[:, m] &= ~keep[:, self.merged[m]]
        deg = np.broadcast_to(self.deg_fixed.astype(float), (keep.shape[0], self.h.n)).copy()
        if keep.shape[1]:
            deg += np.asarray((self.inc_rE.T @ keep.T.astype(float)).T)
        if attach.shape[1]:
            deg += np.asarray((self.inc_cov.T @ attach.T.astype(float)).T)
        return deg


def _pi_hat(deg: np.ndarray) -> np.ndarray:
    tot = deg.sum(axis=1, keepdims=True)
    out = np.zeros_like(deg)
    np.divide(deg, tot, out=out, where=tot > 0)
    return out


@dataclass(frozen=True)
class StationaryEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    n_samples: int


def _target(h: Hypergraph, allow_disconnected: bool) -> np.ndarray:
    if h.m == 0:
        raise ValueError("hypergraph has no hyperedges")
    if not allow_disconnected and not is_connected(h):
        raise DisconnectedError("hypergraph is disconnected")
    deg = h.degrees.astype(float)
    return deg / deg.sum()


def _stream_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))


def expected_stationary(h: Hypergraph, r: SymmetryReport, plan: AugmentationPlan, n_samples: int,
                        seed: int | None = None, workers: int = 1,
                        allow_disconnected: bool = False) -> StationaryEstimate:
    """Monte Carlo mean and standard error of the per-vertex stationary
    distribution of the perturbed hypergraph.

    Draws are split into chunks of 10k, chunk ``k`` using the ``k``-th child
    stream of ``seed``, so the result does not depend on ``workers``. A vertex
    left with degree 0 gets probability 0.
    """
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    plan.check(r)
    _target(h, allow_disconnected)
    seed = plan.seed if seed is None else seed
    model = _Model(h, r)
    probs = [plan.p, *plan.q]
    if all(x in (0.0, 1.0) for x in probs):
        keep = np.full((1, model.rE.size), plan.p == 0.0)
        att = np.asarray(plan.q, dtype=float)[None, :] == 1.0
        pi = _pi_hat(model.degrees(keep, att))[0]
        return StationaryEstimate(pi, np.zeros_like(pi), n_samples)

    q = np.asarray(plan.q, dtype=float)

    def run(k: int) -> tuple[np.ndarray, np.ndarray]:
        size = min(CHUNK, n_samples - k * CHUNK)
        rng = _stream_rng(seed, k)
        keep = rng.random((size, model.rE.size)) >= plan.p
        att = rng.random((size, len(r))) < q
        pi = _pi_hat(model.degrees(keep, att))
        mu = pi.mean(axis=0)
        return mu * size, ((pi - mu) ** 2).sum(axis=0)

    chunks = range(math.ceil(n_samples / CHUNK))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, chunks))
    else:
        parts = [run(k) for k in chunks]
    # pooled variance from per-chunk sums
    total = sum(s for s, _ in parts)
    mean = total / n_samples
    ss = sum(m2 for _, m2 in parts)
    sizes = [min(CHUNK, n_samples - k * CHUNK) for k in chunks]
    ss = ss + sum(sz * (s / sz - mean) ** 2 for sz, (s, _) in zip(sizes, parts))
    var = ss / max(n_samples - 1, 1)
    return StationaryEstimate(mean, np.sqrt(var / n_samples), n_samples)


def exact_expected_stationary(h: Hypergraph, r: SymmetryReport, p: float, q: Sequence[float],
                              vertices: Sequence[int] | None = None) -> np.ndarray:
    """Exact ``E[pi_hat(v)]`` for the requested vertices (default: all)."""
    model = _Model(h, r)
    vs = range(h.n) if vertices is None else vertices
    return np.array([model.exact(v, p, q) for v in vs])


# -- unbiased attach probabilities --------------------------------------------------------

@dataclass(frozen=True)
class UnbiasedSolution:
    p: float
    q: tuple[float, ...]
    feasible: bool
    infeasible: tuple[int, ...]          # components whose q_i falls outside [0, 1]
    representatives: tuple[int, ...]
    c1: tuple[float, ...]
    c2: tuple[float, ...]
    method: str                          # "exact" or "monte-carlo"
    bias: np.ndarray = field(repr=False)  # E[pi_hat] - pi per vertex at the solved q
    converged: bool = True


def solve_unbiased(h: Hypergraph, r: SymmetryReport, p: float, tolerance: float = 1e-12,
                   exact_limit: int = 20, n_samples: int = 100_000, seed: int = 0,
                   max_iter: int = 500, allow_disconnected: bool = False) -> UnbiasedSolution:
    """Attach probabilities making ``E[pi_hat(v)] = pi(v)`` at each component's
    representative (smallest) vertex, for a fixed drop probability ``p``.

    For component ``i`` the expectation is linear in its own attach
    probability, ``E = C1 + q_i C2``, with ``C1`` and ``C2`` depending on the
    other components' ``q``; the coupled system is solved by Gauss-Seidel
    sweeps ``q_i = (pi(v_i) - C1) / C2`` (falling back to a Newton-type root
    finder). Values outside [0, 1] are reported as infeasible, not clamped.

    Expectations are exact when the number of Bernoulli variables is at most
    ``exact_limit`` and Monte Carlo with fixed draws otherwise. ``tolerance``
    bounds the residual ``|E - pi|`` at the representatives on the exact path.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    pi = _target(h, allow_disconnected)
    model = _Model(h, r)
    k = len(r)
    reps = tuple(c.vertices[0] for c in r.components)
    if k == 0:
        return UnbiasedSolution(p, (), True, (), (), (), (), "exact", np.zeros(h.n))

    exact = model.num_variables <= exact_limit
    if exact:
        def expect(v: int, q: np.ndarray) -> float:
            return model.exact(v, p, q)
    else:
        rng = np.random.default_rng(seed)
        u_keep = rng.random((n_samples, model.rE.size))
        u_att = rng.random((n_samples, k))
        keep = u_keep >= p

        def expect(v: int, q: np.ndarray) -> float:
            # common random numbers keep this a deterministic function of q
            att = u_att < q
            return float(_pi_hat(model.degrees(keep, att))[:, v].mean())

    def coeffs(i: int, q: np.ndarray) -> tuple[float, float]:
        q0, q1 = q.copy(), q.copy()
        q0[i], q1[i] = 0.0, 1.0
        c1 = expect(reps[i], q0)
        return c1, expect(reps[i], q1) - c1

    # Monte Carlo expectations are step functions of q: accept sampling-scale residuals
    tol = tolerance if exact else max(tolerance, float(pi[list(reps)].max()) / math.sqrt(n_samples))

    def residual(q: np.ndarray) -> float:
        return max(abs(expect(reps[i], q) - pi[reps[i]]) for i in range(k))

    def sweep(q: np.ndarray) -> np.ndarray:
        for _ in range(max_iter):
            delta = 0.0
            for i in range(k):
                c1, c2 = coeffs(i, q)
                new = (pi[reps[i]] - c1) / c2 if c2 != 0 else math.inf
                if not math.isfinite(new):
                    return q
                delta = max(delta, abs(new - q[i]))
                q[i] = new
            if delta <= tolerance:
                break
        return q

    q = None
    for start in (np.zeros(k), np.ones(k)):
        cand = sweep(start)
        if residual(cand) <= tol:
            q = cand
            break
    if q is None and exact:
        sol = optimize.root(lambda z: [expect(reps[i], z) - pi[reps[i]] for i in range(k)],
                            np.full(k, 0.5), tol=tolerance)
        if residual(sol.x) <= tol:
            q = np.asarray(sol.x)
    converged = q is not None
    if q is None:
        log.warning("solve_unbiased found no exact root for p=%s", p)
        q = cand

    # a root lying on the boundary may overshoot it by rounding error
    q = np.where(np.abs(q) <= BOUNDARY_SLACK, 0.0, q)
    q = np.where(np.abs(q - 1.0) <= BOUNDARY_SLACK, 1.0, q)
    c = [coeffs(i, q) for i in range(k)]
    bad = tuple(i for i in range(k) if not (0.0 <= q[i] <= 1.0) or not math.isfinite(q[i]))
    if exact:
        bias = np.array([model.exact(v, p, q) for v in range(h.n)]) - pi
    else:
        bias = np.array([expect(v, q) for v in range(h.n)]) - pi
    return UnbiasedSolution(p, tuple(float(x) for x in q), converged and not bad, bad, reps,
                            tuple(x[0] for x in c), tuple(x[1] for x in c),
                            "exact" if exact else "monte-carlo", bias, converged)
