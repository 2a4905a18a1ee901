import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import random_digraph

from dgm import GraphBuilder, SampleSpec, bfs_sample, load_csv, load_csv_with_report, select_top_seeds, write_csv
from dgm.exceptions import FormatError, InvalidParameter, UnknownSeed
from dgm.ingest import reachable_within, sample_manifest


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_small_load(tmp_path):
    n = _write(tmp_path / "n.csv", "id,kind,timestamp\na:b,artifact,\na:b:1,release,10\nc:d,artifact,\n")
    e = _write(tmp_path / "e.csv", "src,dst,kind\na:b,a:b:1,versioning\na:b:1,c:d,dependency\n")
    g = load_csv(n, e)
    assert (g.n_nodes, g.n_edges) == (3, 2)


def test_unknown_node_row_skipped_and_counted(tmp_path):
    n = _write(tmp_path / "n.csv", "id,kind,timestamp\na:b,artifact,\na:b:1,release,\n")
    e = _write(tmp_path / "e.csv", "src,dst,kind\na:b,a:b:1,versioning\nx:y:1,a:b,dependency\n")
    g, report = load_csv_with_report(n, e)
    assert g.n_edges == 1
    assert report.skipped_rows == 1
    assert report.reasons["unknown_node"] == 1


def test_header_mismatch(tmp_path):
    n = _write(tmp_path / "n.csv", "name,kind,ts\na:b,artifact,\n")
    e = _write(tmp_path / "e.csv", "src,dst,kind\n")
    with pytest.raises(FormatError):
        load_csv(n, e)


def test_missing_file_names_path(tmp_path):
    e = _write(tmp_path / "e.csv", "src,dst,kind\n")
    with pytest.raises(OSError, match="nope.csv"):
        load_csv(tmp_path / "nope.csv", e)


def test_malformed_threshold(tmp_path):
    rows = "".join(f"g:a{i},artifact,\n" for i in range(200))
    # 2 bad rows out of 202 is under 1%
    n = _write(tmp_path / "n.csv", "id,kind,timestamp\n" + rows + "g:x,widget,\nnocolon,artifact,\n")
    e = _write(tmp_path / "e.csv", "src,dst,kind\n")
    g, report = load_csv_with_report(n, e)
    assert g.n_nodes == 200 and report.malformed_rows == 2
    # 3 bad rows out of 203 is over
    _write(n, n.read_text() + "g:y,artifact,notanumber\n")
    with pytest.raises(FormatError, match="malformed"):
        load_csv(n, e)


def test_quoted_fields_and_metadata(tmp_path):
    n = _write(tmp_path / "n.csv", 'id,kind,timestamp,metadata\n"org:a",artifact,,"x, y"\n')
    e = _write(tmp_path / "e.csv", "src,dst,kind\n")
    g = load_csv(n, e)
    assert g.metadata == ("x, y",)


def test_csv_round_trip(tmp_path, toy_graph):
    write_csv(toy_graph, tmp_path / "n.csv", tmp_path / "e.csv")
    assert load_csv(tmp_path / "n.csv", tmp_path / "e.csv") == toy_graph


# seeds ---------------------------------------------------------------


def _seed_graph():
    b = GraphBuilder()
    for a in ("g:x", "g:y", "g:z"):
        b.add_node(a, "artifact")
    for r in ("r:a:1", "r:a:2", "r:a:3"):
        b.add_node(r, "release")
    for r in ("r:a:1", "r:a:2", "r:a:3"):
        b.add_edge(r, "g:x", "dependency")
    b.add_edge("r:a:1", "g:y", "dependency")
    return b.finalize()


def test_top_seed_by_incoming_count():
    assert select_top_seeds(_seed_graph(), 1).entries == [("g:x", 3)]


def test_k_larger_than_artifact_count():
    assert select_top_seeds(_seed_graph(), 10).entries == [("g:x", 3), ("g:y", 1), ("g:z", 0)]


def test_seed_tie_broken_by_id():
    b = GraphBuilder()
    b.add_node("b:b", "artifact")
    b.add_node("a:a", "artifact")
    for i in range(2):
        b.add_node(f"r:r:{i}", "release")
        b.add_edge(f"r:r:{i}", "b:b", "dependency")
        b.add_edge(f"r:r:{i}", "a:a", "dependency")
    assert select_top_seeds(b.finalize(), 1).ids == ["a:a"]


def test_k_must_be_positive():
    with pytest.raises(InvalidParameter):
        select_top_seeds(_seed_graph(), 0)


# sampling ------------------------------------------------------------


def test_toy_sample(toy_graph, toy_expected):
    seeds = select_top_seeds(toy_graph, 5000)
    assert seeds.entries == [tuple(s) for s in toy_expected["seeds"]]
    s = bfs_sample(toy_graph, seeds, SampleSpec())
    assert set(s.node_ids) == {"org:a", "org:a:1", "org:a:2", "org:b:1"}
    assert s.n_edges == 3
    manifest = sample_manifest(s, seeds, SampleSpec())
    assert manifest == {"seed_count": 1, "depth": 2, "direction": "both",
                        "node_count": 4, "edge_count": 3, "skipped_rows": 0}


def test_isolated_seed():
    b = GraphBuilder()
    b.add_node("lone:a", "artifact")
    b.add_node("other:b", "artifact")
    s = bfs_sample(b.finalize(), ["lone:a"], SampleSpec(depth=1))
    assert s.node_ids == ("lone:a",) and s.n_edges == 0


def test_unknown_seed(toy_graph):
    with pytest.raises(UnknownSeed):
        bfs_sample(toy_graph, ["no:such"], SampleSpec())


@pytest.mark.parametrize("k,depth", [(0, 2), (1, 0)])
def test_sample_spec_validation(k, depth):
    with pytest.raises(InvalidParameter):
        SampleSpec(k, depth)


def test_fixture_cases(sampling_graph, sampling_expected):
    seeds = select_top_seeds(sampling_graph, 5)
    assert seeds.entries == [tuple(x) for x in sampling_expected["seed_counts"]]
    for key, case in sampling_expected["cases"].items():
        direction, depth = key.split("/")
        s = bfs_sample(sampling_graph, seeds[:1], SampleSpec(1, int(depth), direction))
        assert sorted(s.node_ids) == case["nodes"], key
        assert sorted([u, v] for u, v, _ in s.edges()) == case["edges"], key


def _set_union_oracle(g, sources, depth, direction):
    """Per-seed BFS, then union of the visited sets."""
    union = set()
    for s in sources:
        seen = {s}
        frontier = [s]
        for _ in range(depth):
            nxt = []
            for u in frontier:
                nb = []
                if direction in ("forward", "both"):
                    nb += g.successors(u).tolist()
                if direction in ("reverse", "both"):
                    nb += g.predecessors(u).tolist()
                for v in nb:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        union |= seen
    return union


graph_params = st.tuples(st.integers(2, 40), st.integers(0, 80), st.integers(0, 10_000))


@settings(max_examples=50, deadline=None)
@given(graph_params, st.integers(1, 4), st.sampled_from(["forward", "reverse", "both"]))
def test_overlapping_seeds_match_union_oracle(params, depth, direction):
    n, m, seed = params
    g = random_digraph(n, m, seed)
    rng = np.random.default_rng(seed)
    sources = rng.choice(n, size=min(n, 3), replace=False).tolist()
    mask = reachable_within(g, sources, depth, direction)
    assert set(np.flatnonzero(mask).tolist()) == _set_union_oracle(g, sources, depth, direction)


@settings(max_examples=40, deadline=None)
@given(graph_params, st.integers(1, 3))
def test_sample_is_induced_and_monotone(params, depth):
    n, m, seed = params
    g = random_digraph(n, m, seed)
    ids = [g.node_ids[0]]
    small = bfs_sample(g, ids, SampleSpec(depth=depth))
    big = bfs_sample(g, ids, SampleSpec(depth=depth + 1))
    kept = set(small.node_ids)
    induced = {(u, v) for u, v, _ in g.edges() if u in kept and v in kept}
    assert {(u, v) for u, v, _ in small.edges()} == induced
    assert kept <= set(big.node_ids)
    assert induced <= {(u, v) for u, v, _ in big.edges()}


@settings(max_examples=30, deadline=None)
@given(graph_params)
def test_all_seeds_full_depth_reproduces_graph(params):
    n, m, seed = params
    g = random_digraph(n, m, seed)
    s = bfs_sample(g, list(g.node_ids), SampleSpec(depth=n))
    assert s == g


@settings(max_examples=30, deadline=None)
@given(graph_params, st.integers(1, 10))
def test_seed_prefix_property(params, k):
    n, m, seed = params
    g = random_digraph(n, m, seed)
    a, b = select_top_seeds(g, k), select_top_seeds(g, k + 1)
    assert b.entries[: len(a)] == a.entries
    counts = [c for _, c in b.entries]
    assert counts == sorted(counts, reverse=True)
