import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypersym import fixtures as F
from hypersym.augment import (AugmentationPlan, attach_covers, augment, exact_expected_stationary,
                              expected_stationary, replace_components, sample, sample_detailed,
                              solve_unbiased)
from hypersym.core import DisconnectedError, is_connected
from hypersym.refine import gwl1, partition
from hypersym.symmetry import find_symmetries


def enumerate_expectation(h, r, p, q):
    """Brute force over every drop pattern of R_E and every attach pattern."""
    rE = r.edge_ids
    covers = [c.vertices for c in r.components]
    total = np.zeros(h.n)
    for drops in itertools.product((0, 1), repeat=len(rE)):
        pd = np.prod([p if d else 1 - p for d in drops])
        if pd == 0:
            continue
        gone = {e for e, d in zip(rE, drops) if d}
        for att in itertools.product((0, 1), repeat=len(covers)):
            pa = np.prod([qi if a else 1 - qi for qi, a in zip(q, att)])
            if pa == 0:
                continue
            edges = {h.edges[e] for e in range(h.m) if e not in gone}
            edges |= {c for c, a in zip(covers, att) if a}
            deg = np.zeros(h.n)
            for e in edges:
                deg[list(e)] += 1
            pi = deg / deg.sum() if deg.sum() else deg
            total += pd * pa * pi
    return total


@pytest.fixture(scope="module")
def c45():
    h = F.c4_c5()
    return h, find_symmetries(h, L=2)


# -- deterministic transforms ------------------------------------------------------

def test_attach_c4_c5(c45):
    h, r = c45
    g = attach_covers(h, r)
    assert g.m == 11
    assert {(0, 1, 2, 3), (4, 5, 6, 7, 8)} <= g.edge_set()


def test_attach_empty_report():
    h = F.path(3)
    assert attach_covers(h, find_symmetries(h)) == h


def test_attach_then_two_classes_by_size(c45):
    h, r = c45
    classes = partition(gwl1(attach_covers(h, r)).final)
    assert classes == {frozenset(range(4)), frozenset(range(4, 9))}


def test_attach_existing_cover_is_noop():
    h = F.filled_triangle()
    r = find_symmetries(h, L=2, guard=False)
    assert r.vertex_sets == [(0, 1, 2)]
    assert attach_covers(h, r) == h


def test_replace_c4_c5(c45):
    h, r = c45
    g = replace_components(h, r)
    assert sorted(len(e) for e in g.edges) == [4, 5]
    assert partition(gwl1(g).final) == {frozenset(range(4)), frozenset(range(4, 9))}


def test_replace_empty_report():
    h = F.star(3)
    assert replace_components(h, find_symmetries(h)) == h


def test_replacement_class_homogeneity(corpus):
    for name, h in corpus.items():
        r = find_symmetries(h, L="conv")
        colors = gwl1(replace_components(h, r)).final
        by_key = {}
        for c in r.components:
            assert len({int(colors[v]) for v in c.vertices}) == 1, name
            by_key.setdefault((c.class_id, c.size), set()).add(int(colors[c.vertices[0]]))
        assert all(len(v) == 1 for v in by_key.values()), name


# -- sampling ----------------------------------------------------------------------------

def test_sample_degenerate_identities(corpus):
    for h in corpus.values():
        r = find_symmetries(h)
        assert sample(h, r, AugmentationPlan.uniform(r, 0.0, 0.0, seed=5)) == h
        assert sample(h, r, AugmentationPlan.uniform(r, 1.0, 1.0, seed=5)) == replace_components(h, r)


def test_sample_mean_kept_edges(c45):
    h, r = c45
    kept = [9 - len(sample_detailed(h, r, AugmentationPlan.uniform(r, 0.5, 0.0, seed=s)).dropped_edges)
            for s in range(10_000)]
    sigma = np.sqrt(9 * 0.25 / len(kept))
    assert abs(np.mean(kept) - 4.5) <= 3 * sigma


def test_sample_is_seeded(c45):
    h, r = c45
    plan = AugmentationPlan.uniform(r, 0.5, 0.5, seed=11)
    assert sample_detailed(h, r, plan) == sample_detailed(h, r, plan)


def test_augment_modes(c45):
    h, r = c45
    a = augment(h, r, AugmentationPlan(mode="attach_only"))
    assert a.hypergraph == attach_covers(h, r) and a.dropped_edges == () and a.added_covers == (0, 1)
    b = augment(h, r, AugmentationPlan(mode="replace"))
    assert b.hypergraph == replace_components(h, r) and b.dropped_edges == tuple(range(9))


def test_plan_validation(c45):
    _, r = c45
    with pytest.raises(ValueError):
        AugmentationPlan(p=1.5)
    with pytest.raises(ValueError):
        AugmentationPlan(q=(0.2, -0.1))
    with pytest.raises(ValueError):
        AugmentationPlan(mode="shuffle")
    with pytest.raises(ValueError):
        AugmentationPlan(0.1, (0.5,)).check(r)


# -- expected stationary distribution ----------------------------------------------------

def test_expected_no_perturbation_is_exact(c45):
    h, r = c45
    est = expected_stationary(h, r, AugmentationPlan.uniform(r, 0.0, 0.0), 1000, allow_disconnected=True)
    assert np.array_equal(est.mean, h.degrees / h.degrees.sum())
    assert not est.stderr.any()


def test_expected_full_replacement_is_deterministic(c45):
    h, r = c45
    est = expected_stationary(h, r, AugmentationPlan.uniform(r, 1.0, 1.0), 1000, allow_disconnected=True)
    g = replace_components(h, r)
    assert np.allclose(est.mean, g.degrees / g.degrees.sum())
    assert not est.stderr.any()


def test_expected_rejects_zero_samples(c45):
    h, r = c45
    with pytest.raises(ValueError):
        expected_stationary(h, r, AugmentationPlan.uniform(r, 0.5, 0.5), 0, allow_disconnected=True)


def test_expected_rejects_disconnected_by_default(c45):
    h, r = c45
    with pytest.raises(DisconnectedError):
        expected_stationary(h, r, AugmentationPlan.uniform(r, 0.5, 0.5), 10)


def test_exact_matches_enumeration_c4():
    h = F.complete_uniform(4, 3)
    r = find_symmetries(h)
    assert np.allclose(exact_expected_stationary(h, r, 0.5, [1.0]), enumerate_expectation(h, r, 0.5, [1.0]),
                       atol=1e-14)


def test_exact_matches_enumeration_c45(c45):
    h, r = c45
    want = enumerate_expectation(h, r, 0.5, [1.0, 1.0])
    assert np.allclose(exact_expected_stationary(h, r, 0.5, [1.0, 1.0]), want, atol=1e-14)


@settings(max_examples=20)
@given(st.sampled_from(["random_symmetric0", "random_symmetric1", "random_symmetric2", "triangle+cycle4",
                        "K4^3+triangle", "fano", "prism"]),
       st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_exact_matches_enumeration_random(corpus, name, p, q0, q1):
    h = corpus[name]
    r = find_symmetries(h)
    q = [q0, q1][:len(r)] + [0.5] * max(0, len(r) - 2)
    assert np.allclose(exact_expected_stationary(h, r, p, q), enumerate_expectation(h, r, p, q), atol=1e-12)


def test_exact_handles_cover_equal_to_edge():
    h = F.filled_triangle()
    r = find_symmetries(h, guard=False)
    for p, q in [(0.3, 0.6), (0.9, 0.1), (1.0, 0.5)]:
        assert np.allclose(exact_expected_stationary(h, r, p, [q]), enumerate_expectation(h, r, p, [q]))


def test_monte_carlo_within_three_stderr(c45):
    h, r = c45
    plan = AugmentationPlan.uniform(r, 0.5, 1.0, seed=3)
    est = expected_stationary(h, r, plan, 100_000, allow_disconnected=True)
    want = enumerate_expectation(h, r, 0.5, [1.0, 1.0])
    assert np.all(np.abs(est.mean - want) <= 3 * est.stderr)


def test_monte_carlo_independent_of_workers(c45):
    h, r = c45
    plan = AugmentationPlan.uniform(r, 0.4, 0.3, seed=9)
    a = expected_stationary(h, r, plan, 25_000, allow_disconnected=True, workers=1)
    b = expected_stationary(h, r, plan, 25_000, allow_disconnected=True, workers=3)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr)


# -- solving for q -----------------------------------------------------------------------

def test_solve_p_zero_gives_q_zero(corpus):
    h = corpus["random_symmetric0"]
    sol = solve_unbiased(h, find_symmetries(h), 0.0)
    assert sol.feasible and all(abs(q) <= 1e-12 for q in sol.q)


def test_solve_c45_p09_monte_carlo_consistent(c45):
    h, r = c45
    sol = solve_unbiased(h, r, 0.9, allow_disconnected=True)
    assert sol.feasible and all(0 <= q <= 1 for q in sol.q)
    est = expected_stationary(h, r, AugmentationPlan(0.9, sol.q, seed=1), 100_000, allow_disconnected=True)
    pi = h.degrees / h.degrees.sum()
    reps = [c.vertices for c in r.components]
    for verts in reps:
        for v in verts:
            assert abs(est.mean[v] - pi[v]) <= 3 * est.stderr[v]


def test_solve_residual_at_representatives(corpus):
    h = corpus["random_symmetric1"]
    r = find_symmetries(h)
    sol = solve_unbiased(h, r, 0.5)
    pi = h.degrees / h.degrees.sum()
    got = exact_expected_stationary(h, r, 0.5, sol.q, sol.representatives)
    assert np.allclose(got, pi[list(sol.representatives)], atol=1e-10)
    assert sol.bias.shape == (h.n,)


def test_solve_reports_infeasible_without_clamping(corpus):
    # with every cover attached, E[pi_hat(v)] still falls short of pi(v): q would need to exceed 1
    h = corpus["random_symmetric0"]
    r = find_symmetries(h)
    assert len(r) == 1
    v = r.components[0].vertices[0]
    pi = h.degrees / h.degrees.sum()
    short = enumerate_expectation(h, r, 0.9, [1.0])[v] < pi[v]
    sol = solve_unbiased(h, r, 0.9)
    assert short
    assert not sol.feasible and sol.infeasible == (0,) and sol.q[0] > 1.0
    assert sol.converged


def test_solve_refuses_disconnected(c45):
    h, r = c45
    with pytest.raises(DisconnectedError):
        solve_unbiased(h, r, 0.5)


def test_solve_empty_report():
    h = F.path(4)
    sol = solve_unbiased(h, find_symmetries(h), 0.7)
    assert sol.feasible and sol.q == ()


def test_solve_monte_carlo_path(corpus):
    h = corpus["random_symmetric0"]
    r = find_symmetries(h)
    n = 50_000
    exact = solve_unbiased(h, r, 0.3)
    mc = solve_unbiased(h, r, 0.3, exact_limit=0, n_samples=n, seed=2)
    assert mc.method == "monte-carlo" and exact.method == "exact" and mc.converged
    v = exact.representatives[0]
    pi_v = h.degrees[v] / h.degrees.sum()
    # the Monte Carlo root leaves an exact residual at the sampling scale
    resid = exact_expected_stationary(h, r, 0.3, mc.q, [v])[0] - pi_v
    assert abs(resid) <= 3 * pi_v / np.sqrt(n)


def test_connected_fixtures_used_here(corpus):
    assert all(is_connected(corpus[k]) for k in ("random_symmetric0", "random_symmetric1"))
