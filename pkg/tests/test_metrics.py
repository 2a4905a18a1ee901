import warnings

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import betweenness_bruteforce, pagerank_dense, random_digraph

from dgm import (
    GeneratorSpec,
    GraphBuilder,
    betweenness_exact,
    betweenness_sampled,
    connected_components,
    degree_distribution,
    generate,
    pagerank,
    small_world,
    summarize_connectivity,
)
from dgm.exceptions import EmptyGraph, GraphTooSmall, ModeMismatch, NotConverged
from dgm.metrics.pagerank import ConvergenceWarning
from dgm.metrics.smallworld import local_clustering


def digraph(edges, extra=()):
    b = GraphBuilder(relaxed=True)
    names = []
    for u, v in edges:
        names += [u, v]
    for name in list(dict.fromkeys(names)) + list(extra):
        b.add_node(f"n:{name}", "artifact")
    for u, v in edges:
        b.add_edge(f"n:{u}", f"n:{v}", "dependency")
    return b.finalize()


CYCLE = [("a", "b"), ("b", "c"), ("c", "a")]
PATH = [("a", "b"), ("b", "c")]
IN_STAR = [(f"s{i}", "hub") for i in range(5)]


# degree -----------------------------------------------------------------------


def test_degree_histograms():
    assert degree_distribution(digraph(CYCLE), "in") == {1: 3}
    assert degree_distribution(digraph(IN_STAR), "in") == {0: 5, 5: 1}
    assert degree_distribution(GraphBuilder().finalize(), "in") == {}


def test_degree_kind_filter(toy_graph, toy_expected):
    for direction in ("in", "out", "total"):
        want = {int(k): v for k, v in toy_expected[f"degree_{direction}"].items()}
        assert degree_distribution(toy_graph, direction) == want
    assert degree_distribution(toy_graph, "in", "artifact") == {1: 1}
    assert degree_distribution(toy_graph, "out", "release") == {0: 2, 1: 1}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 120), st.integers(0, 999))
def test_degree_moments(n, m, seed):
    g = random_digraph(n, m, seed)
    h_in, h_out = degree_distribution(g, "in"), degree_distribution(g, "out")
    assert h_in.total() == h_out.total() == g.n_edges
    assert h_in.n_nodes == h_out.n_nodes == n


# pagerank ---------------------------------------------------------------------


def test_pagerank_cycle():
    pr = pagerank(digraph(CYCLE))
    np.testing.assert_allclose(pr.values, 1 / 3, atol=1e-12)


def test_pagerank_isolated_pair():
    pr = pagerank(digraph([], extra=["x", "y"]))
    np.testing.assert_allclose(pr.values, 0.5, atol=1e-12)


def test_pagerank_release_star_matches_oracle():
    b = GraphBuilder()
    b.add_node("h:h", "artifact")
    for i in range(4):
        b.add_node(f"r:r:{i}", "release")
        b.add_edge(f"r:r:{i}", "h:h", "dependency")
    g = b.finalize()
    pr = pagerank(g, tol=1e-12)
    np.testing.assert_allclose(pr.values, pagerank_dense(g), atol=1e-9)


def test_pagerank_toy_hand_values(toy_graph, toy_expected):
    pr = pagerank(toy_graph, tol=1e-13)
    for node, want in toy_expected["pagerank"].items():
        assert pr[node] == pytest.approx(want, abs=1e-10)


def test_pagerank_nonconvergence(toy_graph):
    with pytest.warns(ConvergenceWarning):
        pr = pagerank(toy_graph, max_iter=1)
    assert pr.diagnostics["converged"] is False
    assert pr.values.sum() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NotConverged):
        pagerank(toy_graph, max_iter=1, strict=True)


def test_pagerank_empty_graph():
    with pytest.raises(EmptyGraph):
        pagerank(GraphBuilder().finalize())


@pytest.mark.parametrize("alpha", [0.0, 1.0, -1, 2])
def test_pagerank_alpha_range(toy_graph, alpha):
    with pytest.raises(ValueError):
        pagerank(toy_graph, alpha=alpha)


def test_pagerank_agrees_with_networkx():
    g = random_digraph(80, 200, seed=4)
    ours = pagerank(g, tol=1e-13).values
    ref = nx.pagerank(g.to_networkx(), alpha=0.85, tol=1e-15, max_iter=10_000)
    np.testing.assert_allclose(ours, [ref[i] for i in g.node_ids], atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 120), st.integers(0, 999),
       st.floats(0.05, 0.95))
def test_pagerank_invariants(n, m, seed, alpha):
    g = random_digraph(n, m, seed)
    pr = pagerank(g, alpha=alpha, tol=1e-12, max_iter=5000).values
    assert abs(pr.sum() - 1) <= 1e-9
    assert np.all(pr >= (1 - alpha) / n - 1e-12)
    # relabeling the nodes permutes the scores
    perm = np.random.default_rng(seed).permutation(n)
    b = GraphBuilder(relaxed=True)
    for i in perm:
        b.add_node(g.node_ids[i], "artifact")
    for u, v, _ in g.edges():
        b.add_edge(u, v, "dependency")
    h = b.finalize()
    pr2 = pagerank(h, alpha=alpha, tol=1e-12, max_iter=5000)
    np.testing.assert_allclose([pr2[x] for x in g.node_ids], pr, atol=1e-9)


# betweenness ------------------------------------------------------------------


def test_betweenness_path():
    assert betweenness_exact(digraph(PATH)).values.tolist() == [0.0, 1.0, 0.0]


def test_betweenness_cycle():
    assert betweenness_exact(digraph(CYCLE)).values.tolist() == [1.0, 1.0, 1.0]


def test_betweenness_normalized_variant():
    g = random_digraph(30, 80, seed=1)
    bc = betweenness_exact(g)
    n = g.n_nodes
    np.testing.assert_allclose(bc.diagnostics["normalized"], bc.values / ((n - 1) * (n - 2)))
    ref = nx.betweenness_centrality(g.to_networkx(), normalized=True)
    np.testing.assert_allclose(bc.diagnostics["normalized"], [ref[i] for i in g.node_ids], atol=1e-12)


def test_betweenness_er_n50_bruteforce():
    g = generate(GeneratorSpec.uniform_random(50, 0.08, seed=7))
    np.testing.assert_allclose(betweenness_exact(g).values, betweenness_bruteforce(g), atol=1e-9)


def test_sampled_with_all_pivots_is_exact():
    g = random_digraph(70, 200, seed=2)
    exact = betweenness_exact(g).values
    np.testing.assert_allclose(betweenness_sampled(g, g.n_nodes, seed=5).values, exact, atol=1e-12)


def test_sampled_single_source_scaling():
    g = digraph(PATH)
    est = betweenness_sampled(g, 1, seed=0, sources=[0])
    assert est.values.tolist() == [0.0, 3.0, 0.0]


def test_sampled_is_seed_deterministic():
    g = random_digraph(60, 150, seed=3)
    a = betweenness_sampled(g, 10, seed=11).values
    b = betweenness_sampled(g, 10, seed=11).values
    assert a.tobytes() == b.tobytes()


def test_sampled_mean_close_to_exact_for_top_nodes():
    g = generate(GeneratorSpec.uniform_random(200, 0.03, seed=21))
    exact = betweenness_exact(g).values
    mean = np.mean([betweenness_sampled(g, 100, seed=s).values for s in range(30)], axis=0)
    top = np.argsort(-exact, kind="stable")[:10]
    rel = np.abs(mean[top] - exact[top]) / exact[top]
    assert rel.max() < 0.10


def test_betweenness_threads_identical():
    g = random_digraph(300, 900, seed=9)
    one = betweenness_exact(g, threads=1).values
    many = betweenness_exact(g, threads=8).values
    assert one.tobytes() == many.tobytes()


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 90), st.integers(0, 999))
def test_betweenness_invariants(n, m, seed):
    g = random_digraph(n, m, seed)
    bc = betweenness_exact(g).values
    assert np.all(bc >= 0)
    # total equals the number of interior vertices summed over shortest s-t paths,
    # which is sum over reachable pairs of (d(s,t) - 1)
    lengths = dict(nx.all_pairs_shortest_path_length(g.to_networkx()))
    interior = sum(d - 1 for s, row in lengths.items() for t, d in row.items() if d >= 2)
    assert bc.sum() == pytest.approx(interior, abs=1e-9)
    # sources and sinks carry no through-paths
    ends = (g.in_degree == 0) | (g.out_degree == 0)
    assert np.all(bc[ends] == 0)


# components -------------------------------------------------------------------


def test_two_disjoint_edges():
    weak = connected_components(digraph([("a", "b"), ("c", "d")]), "weak")
    assert weak.sizes.tolist() == [2, 2]


def test_path_components():
    g = digraph(PATH)
    assert connected_components(g, "strong").sizes.tolist() == [1, 1, 1]
    assert connected_components(g, "weak").sizes.tolist() == [3]
    s = summarize_connectivity(connected_components(g, "weak"), connected_components(g, "strong"))
    assert (s.total_components, s.lcc_size, s.lcc_coverage_pct, s.scc_count, s.largest_scc_size) == (
        1, 3, 100.0, 3, 1)


def test_cycle_with_pendant():
    g = digraph(CYCLE + [("c", "d")])
    strong = connected_components(g, "strong")
    assert strong.partition() == {frozenset({0, 1, 2}), frozenset({3})}
    assert strong.labels.tolist() == [0, 0, 0, 1]


def test_empty_summary():
    g = GraphBuilder().finalize()
    s = summarize_connectivity(connected_components(g, "weak"), connected_components(g, "strong"))
    assert s.to_dict()["lcc_coverage_pct"] == 0.0
    assert (s.total_components, s.lcc_size, s.total_nodes, s.scc_count, s.largest_scc_size) == (0,) * 5


def test_summary_mode_mismatch(toy_graph):
    weak = connected_components(toy_graph, "weak")
    with pytest.raises(ModeMismatch):
        summarize_connectivity(weak, weak)


def test_toy_connectivity(toy_graph, toy_expected):
    s = summarize_connectivity(connected_components(toy_graph, "weak"),
                               connected_components(toy_graph, "strong"))
    for key, want in toy_expected["connectivity"].items():
        assert getattr(s, key) == want


def test_deep_graph_no_recursion_limit():
    n = 20_000
    g = digraph([(i, i + 1) for i in range(n)] + [(n, 0)])
    assert connected_components(g, "strong").sizes.tolist() == [n + 1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 50), st.integers(0, 120), st.integers(0, 999))
def test_component_invariants(n, m, seed):
    g = random_digraph(n, m, seed)
    weak = connected_components(g, "weak")
    strong = connected_components(g, "strong")
    for lab in (weak, strong):
        assert sorted(set(lab.labels.tolist())) == list(range(lab.n_components))
        assert lab.sizes.sum() == n
        assert np.all(np.diff(lab.sizes) <= 0)
    assert connected_components(g.reverse(), "weak").partition() == weak.partition()
    for comp in strong.partition():
        assert len({int(weak.labels[i]) for i in comp}) == 1
    ref = nx.strongly_connected_components(g.to_networkx())
    idx = g.index_map
    assert strong.partition() == {frozenset(idx[x] for x in c) for c in ref}


# small world ------------------------------------------------------------------


def test_k5_exact():
    s = small_world(generate(GeneratorSpec.uniform_random(5, 1.0, seed=0)), path_samples=5, seed=0)
    assert s.clustering == 1.0 and s.path_length == 1.0


def test_ring_lattice_clustering():
    g = generate(GeneratorSpec.rewired_lattice(100, 4, 0.0, seed=0))
    indptr, indices = g.undirected
    assert np.all(local_clustering(indptr, indices) == 0.5)
    s = small_world(g, path_samples=100, baseline_graphs=2, seed=0)
    assert s.clustering == 0.5
    # exact mean distance on a ring lattice with k=4: roughly n/(2k)
    assert 0.8 * 100 / 8 < s.path_length < 1.2 * 100 / 8 + 1


def test_clustering_matches_networkx():
    g = generate(GeneratorSpec.uniform_random(120, 0.06, seed=3))
    indptr, indices = g.undirected
    ref = nx.clustering(g.to_networkx().to_undirected())
    np.testing.assert_allclose(local_clustering(indptr, indices), [ref[i] for i in g.node_ids],
                               atol=1e-12)


def test_small_world_is_seeded():
    g = generate(GeneratorSpec.rewired_lattice(200, 6, 0.1, seed=1))
    a = small_world(g, 30, 2, seed=4).to_dict()
    b = small_world(g, 30, 2, seed=4).to_dict()
    assert a == b
    assert a["sigma"] > 1


def test_small_world_too_small():
    with pytest.raises(GraphTooSmall):
        small_world(digraph(PATH), seed=0)


def test_score_map_csv(tmp_path, toy_graph):
    pr = pagerank(toy_graph)
    pr.to_csv(tmp_path / "pr.csv")
    lines = (tmp_path / "pr.csv").read_text().splitlines()
    assert lines[0] == "node_id,score"
    assert len(lines) == 5
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert float(lines[1].split(",")[1]) == pr.values[0]
