import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distsig.distributional import (
    Coupling,
    DiscreteDistribution,
    Marginals,
    check_tv_bounds,
    coupling_lp_oracle,
    optimal_coupling,
    random_bound_instance,
    run_bound_corpus,
    tv_cover,
    tv_exact,
    tv_l1_l2,
    tv_tree_rooted,
    wasserstein_sq,
)
from distsig.graph import GraphError, SpanningTree, build_graph


def _dirichlet_pair(rng, m):
    return rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))


# --- distribution / marginal types ---------------------------------------

def test_distribution_validation():
    DiscreteDistribution(np.array([0.25, 0.75]))
    with pytest.raises(ValueError, match="sum"):
        DiscreteDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ValueError, match="negative"):
        DiscreteDistribution(np.array([-0.2, 1.2]))
    with pytest.raises(ValueError):
        DiscreteDistribution(np.array([np.nan, 1.0]))


def test_marginals_validation():
    nn = Marginals(np.array([[0.5, 0.5], [1.0, 0.0]]))
    assert nn.n == 2 and nn.m == 2
    assert np.allclose(nn.row(1).weights, [1.0, 0.0])
    with pytest.raises(ValueError, match="row 1"):
        Marginals(np.array([[0.5, 0.5], [0.9, 0.0]]))
    assert not nn.matrix.flags.writeable


def test_coupling_validation():
    with pytest.raises(ValueError, match="row sums"):
        Coupling(np.array([[0.5, 0.0], [0.0, 0.5]]),
                 np.array([0.7, 0.3]), np.array([0.5, 0.5]))


# --- pairwise transport ----------------------------------------------------

def test_wasserstein_delta_pair():
    assert wasserstein_sq([1.0, 0.0], [0.0, 1.0]) == 1.0


def test_wasserstein_identical():
    mu = np.array([0.4, 0.35, 0.25])
    assert wasserstein_sq(mu, mu) == 0.0


def test_wasserstein_half_overlap():
    assert abs(wasserstein_sq([0.5, 0.5], [0.2, 0.8]) - 0.3) < 1e-15


def test_wasserstein_symmetric_and_bounded(rng):
    for _ in range(20):
        x, y = _dirichlet_pair(rng, 4)
        w = wasserstein_sq(x, y)
        assert 0.0 <= w <= 1.0
        assert w == wasserstein_sq(y, x)


def test_wasserstein_alphabet_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        wasserstein_sq([1.0], [0.5, 0.5])


def test_optimal_coupling_worked_example():
    c = optimal_coupling([0.5, 0.5], [0.3, 0.7])
    assert np.allclose(c.matrix, [[0.3, 0.2], [0.0, 0.5]], atol=1e-15)
    assert abs(c.transport_cost() - 0.2) < 1e-15


def test_optimal_coupling_identical_is_diagonal():
    mu = np.array([0.1, 0.2, 0.7])
    c = optimal_coupling(mu, mu)
    assert np.allclose(c.matrix, np.diag(mu))
    assert c.transport_cost() == 0.0


def test_optimal_coupling_disjoint_deltas():
    c = optimal_coupling([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    expect = np.zeros((3, 3))
    expect[0, 1] = 1.0
    assert np.allclose(c.matrix, expect)
    assert abs(c.transport_cost() - 1.0) < 1e-15


def test_optimal_coupling_diagonal_is_exact_min(rng):
    for _ in range(50):
        x, y = _dirichlet_pair(rng, 5)
        c = optimal_coupling(x, y)
        # exact equality, not approximate: the diagonal is assigned directly
        assert np.array_equal(np.diag(c.matrix), np.minimum(x, y))
        assert abs(c.transport_cost() - wasserstein_sq(x, y)) < 1e-9


def test_lp_oracle_examples():
    assert abs(coupling_lp_oracle([1.0, 0.0], [0.0, 1.0]) - 1.0) < 1e-12
    assert coupling_lp_oracle([0.5, 0.5], [0.5, 0.5]) < 1e-12


def test_lp_oracle_rejects_large_alphabet():
    w = np.full(7, 1.0 / 7.0)
    with pytest.raises(ValueError, match="too large"):
        coupling_lp_oracle(w, w)


def test_closed_form_matches_lp_oracle(rng):
    # the two routes are independent: half-l1 formula vs transport LP
    for _ in range(200):
        m = int(rng.integers(2, 6))
        x, y = _dirichlet_pair(rng, m)
        assert abs(wasserstein_sq(x, y) - coupling_lp_oracle(x, y)) < 1e-9


@given(st.integers(2, 5), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_wasserstein_triangle_inequality(m, seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(m))
    b = rng.dirichlet(np.ones(m))
    c = rng.dirichlet(np.ones(m))
    wa = np.sqrt(wasserstein_sq(a, c))
    wb = np.sqrt(wasserstein_sq(a, b)) + np.sqrt(wasserstein_sq(b, c))
    assert wa <= wb + 1e-9


# --- variation notions -----------------------------------------------------

DELTA_TRIANGLE = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_tv_l1_l2_edge_pair(p2):
    assert tv_l1_l2(p2, np.array([[1.0, 0.0], [0.0, 1.0]])) == (2.0, 2.0)


def test_tv_l1_l2_constant_rows(triangle):
    x = np.tile([0.3, 0.7], (3, 1))
    assert tv_l1_l2(triangle, x) == (0.0, 0.0)


def test_tv_l1_l2_triangle_deltas(triangle):
    l1, l2 = tv_l1_l2(triangle, DELTA_TRIANGLE)
    assert abs(l1 - 4.0) < 1e-12
    assert abs(l2 - 4.0) < 1e-12


def test_tv_l1_l2_size_mismatch(triangle):
    with pytest.raises(ValueError, match="match"):
        tv_l1_l2(triangle, np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_tv_l2_le_l1_random(rng):
    for _ in range(20):
        g, nn = random_bound_instance(int(rng.integers(1 << 30)))
        l1, l2 = tv_l1_l2(g, nn)
        assert l2 <= l1 + 1e-9


def test_tv_exact_two_node_is_wasserstein(p2):
    assert abs(tv_exact(p2, np.array([[1.0, 0.0], [0.0, 1.0]])) - 1.0) < 1e-9


def test_tv_exact_two_node_matches_wasserstein_random(p2, rng):
    for _ in range(15):
        x, y = _dirichlet_pair(rng, 3)
        got = tv_exact(p2, np.vstack([x, y]))
        assert abs(got - wasserstein_sq(x, y)) < 1e-9


def test_tv_exact_identical_deltas(triangle):
    x = np.tile([0.0, 1.0, 0.0], (3, 1))
    assert tv_exact(triangle, x) < 1e-12


def test_tv_exact_triangle_deltas(triangle):
    # delta marginals admit exactly one joint; two edges disagree
    assert abs(tv_exact(triangle, DELTA_TRIANGLE) - 2.0) < 1e-9


def test_tv_exact_table_cap():
    g = build_graph(7, [(i, i + 1) for i in range(6)])
    x = np.tile([0.5, 0.25, 0.25], (7, 1))
    with pytest.raises(ValueError, match="too large"):
        tv_exact(g, x)


def test_tv_exact_joint_reproduces_marginals(triangle, rng):
    x = np.vstack([rng.dirichlet(np.ones(2)) for _ in range(3)])
    val, joint = tv_exact(triangle, x, return_joint=True)
    assert val >= -1e-12
    for i in range(3):
        assert np.allclose(joint.marginal(i).weights, x[i], atol=1e-7)


def test_tv_tree_on_tree_equals_l1():
    g = build_graph(4, [(0, 1), (1, 2), (1, 3)])
    rng = np.random.default_rng(9)
    x = np.vstack([rng.dirichlet(np.ones(3)) for _ in range(4)])
    l1, _ = tv_l1_l2(g, x)
    tree = SpanningTree(4, g.edges)
    for v0 in range(4):
        assert abs(tv_tree_rooted(g, tree, v0, x) - l1) < 1e-12


def test_tv_tree_triangle_worked_example(triangle):
    tree = SpanningTree(3, ((0, 1), (1, 2)))
    assert abs(tv_tree_rooted(triangle, tree, 0, DELTA_TRIANGLE) - 4.0) < 1e-12


def test_tv_tree_identical_marginals(triangle):
    tree = SpanningTree(3, ((0, 1), (1, 2)))
    x = np.tile([0.6, 0.4], (3, 1))
    assert abs(tv_tree_rooted(triangle, tree, 2, x)) < 1e-12


def test_tv_tree_rejects_foreign_tree(triangle):
    g2 = build_graph(3, [(0, 1), (1, 2)])  # no (0,2) edge
    tree = SpanningTree(3, ((0, 1), (0, 2)))
    with pytest.raises(GraphError, match="absent"):
        tv_tree_rooted(g2, tree, 0, DELTA_TRIANGLE)


def test_tv_cover_tree_graph():
    g = build_graph(3, [(0, 1), (1, 2)])
    x = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]])
    val, cover = tv_cover(g, x)
    l1, _ = tv_l1_l2(g, x)
    assert abs(val - 0.5 * l1) < 1e-12
    assert len(cover.trees) == 1
    assert set(cover.trees[0].edges) == set(g.edges)


def test_tv_cover_triangle_worked_example(triangle):
    val, cover = tv_cover(triangle, DELTA_TRIANGLE, size_cap=3)
    assert abs(val - 2.0) < 1e-12
    # witness: two trees that share the zero-variation edge (0,1)
    assert len(cover.trees) == 2
    union = set()
    for t in cover.trees:
        union |= set(t.edges)
    assert union == set(triangle.edges)
    assert all((0, 1) in t.edges for t in cover.trees)


def test_tv_cover_identical_marginals(triangle):
    x = np.tile([0.2, 0.8], (3, 1))
    val, _ = tv_cover(triangle, x)
    assert val == 0.0


def test_tv_cover_monotone_in_cap():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
    rng = np.random.default_rng(11)
    x = np.vstack([rng.dirichlet(np.ones(2)) for _ in range(4)])
    v1, _ = tv_cover(g, x, size_cap=1) if _cover_exists(g, x, 1) else (np.inf, None)
    v2, _ = tv_cover(g, x, size_cap=2)
    v3, _ = tv_cover(g, x, size_cap=3)
    assert v3 <= v2 + 1e-12
    assert v2 <= v1 + 1e-12


def _cover_exists(g, x, cap):
    try:
        tv_cover(g, x, size_cap=cap)
        return True
    except GraphError:
        return False


# --- inequality chains -----------------------------------------------------

def test_bounds_triangle_worked_example(triangle):
    r = check_tv_bounds(triangle, DELTA_TRIANGLE)
    assert r["violations"] == []
    assert abs(r["tg1"] - 4.0) < 1e-12
    assert abs(r["tg2"] - 4.0) < 1e-12
    assert abs(r["tg_exact"] - 2.0) < 1e-9
    assert abs(r["tcov"] - 2.0) < 1e-12
    assert r["c1"] == 2
    # front of the chain is tight: tg2 = tg1 = 2*min(tcov, tg) = 4, c1*tg1 = 8
    assert abs(2.0 * min(r["tcov"], r["tg_exact"]) - 4.0) < 1e-9
    for key in ("graph", "marginals", "tg1", "tg2", "tg_exact", "tcov",
                "tghv_min", "c1", "c3", "violations"):
        assert key in r


def test_bounds_degenerate_zeros(triangle):
    x = np.tile([0.5, 0.5], (3, 1))
    r = check_tv_bounds(triangle, x)
    assert r["violations"] == []
    assert r["tg1"] == 0.0 and r["tg2"] == 0.0
    assert abs(r["tg_exact"]) < 1e-9
    assert abs(r["tcov"]) < 1e-12
    assert abs(r["tghv_min"]) < 1e-12


def test_random_instance_deterministic():
    g1, n1 = random_bound_instance((5, 17))
    g2, n2 = random_bound_instance((5, 17))
    assert g1.edges == g2.edges
    assert np.array_equal(n1.matrix, n2.matrix)


def test_corpus_small_clean():
    out = run_bound_corpus(30, seed=123, keep_instances=False)
    assert out["violation_count"] == 0
    assert out["violations"] == []
    assert all(v >= -1e-9 for v in out["worst_margins"].values())
    assert 0.0 <= out["c3_paper_pass_rate"] <= 1.0


def test_corpus_parallel_matches_serial():
    a = run_bound_corpus(12, seed=77, jobs=1)
    b = run_bound_corpus(12, seed=77, jobs=2)
    assert a == b


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_bound_chain_property(seed):
    g, nn = random_bound_instance(seed, max_n=5, max_m=3)
    r = check_tv_bounds(g, nn)
    assert r["violations"] == []
