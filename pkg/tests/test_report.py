import json

import jsonschema
import numpy as np
import pytest

from dgm.metrics.results import ScoreMap
from dgm.report import MetricResult, emit_bundle, load_metadata, schema, top_k
from dgm.exceptions import FormatError


def scores(d):
    ids = tuple(d)
    return ScoreMap("m", np.array([float(d[i]) for i in ids]), ids)


def test_top_k_descending():
    t = top_k(scores({"g:a": 3, "g:b": 1, "g:c": 2}), 2)
    assert t.as_tuples() == [(1, "g:a", 3.0), (2, "g:c", 2.0)]


def test_top_k_ties_lexicographic():
    t = top_k(scores({"g:c": 1, "g:a": 1, "g:b": 1}), 3)
    assert [r.node_id for r in t] == ["g:a", "g:b", "g:c"]


def test_top_k_truncates_and_ascends():
    t = top_k(scores({"g:a": 3, "g:b": 1}), 10, ascending=True)
    assert t.as_tuples() == [(1, "g:b", 1.0), (2, "g:a", 3.0)]


def test_top_k_rejects_zero():
    with pytest.raises(ValueError):
        top_k(scores({"g:a": 1}), 0)


def test_top_k_metadata_passthrough(tmp_path):
    path = tmp_path / "meta.csv"
    path.write_text('id,category,tags\ng:a,Testing,"junit, tests"\n')
    meta = load_metadata(path)
    t = top_k(scores({"g:a": 3, "g:b": 1}), 2, metadata=meta)
    assert t.rows[0].category == "Testing" and t.rows[0].tags == "junit, tests"
    assert t.rows[1].category is None
    t.to_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[1] == '1,g:a,3.0,Testing,"junit, tests"'


def test_metadata_header_checked(tmp_path):
    path = tmp_path / "meta.csv"
    path.write_text("id,label\n")
    with pytest.raises(FormatError):
        load_metadata(path)


def test_empty_bundle_is_valid(tmp_path):
    env = emit_bundle([], {"subcommand": "report"}, tmp_path)
    assert env["metrics"] == []
    data = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(data, schema())


def test_bundle_overwrites_and_is_stable(tmp_path):
    res = [MetricResult("x", params={"a": 1}, summary={"v": float("nan")},
                        artifacts={"x.csv": scores({"g:a": 1.5})})]
    emit_bundle(res, {"subcommand": "t"}, tmp_path)
    first = (tmp_path / "report.json").read_bytes()
    emit_bundle(res, {"subcommand": "t"}, tmp_path, timings={"x": 1.0})
    assert (tmp_path / "report.json").read_bytes() == first
    data = json.loads(first)
    assert data["metrics"][0]["summary"]["v"] is None
    assert data["metrics"][0]["files"] == ["x.csv"]
    jsonschema.validate(data, schema())
    assert (tmp_path / "x.csv").read_text() == "node_id,score\ng:a,1.5\n"


def test_ranked_table_monotone_ranks():
    rng = np.random.default_rng(0)
    s = ScoreMap("m", rng.integers(0, 5, 50).astype(float), tuple(f"g:{i}" for i in range(50)))
    for asc in (False, True):
        t = top_k(s, 20, ascending=asc)
        ranks = [r.rank for r in t]
        vals = [r.score for r in t]
        assert ranks == list(range(1, 21))
        assert vals == sorted(vals, reverse=not asc)
