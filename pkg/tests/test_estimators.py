import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from dgm import GeneratorSpec, betweenness_exact, generate, pagerank, sample_powerlaw
from dgm.estimators import Betweenness, ComponentLabeler, DiscretePowerLaw, PageRank, SeedSampler
from dgm.exceptions import InvalidParameter


def test_get_set_params_and_clone():
    est = PageRank(alpha=0.9)
    assert est.get_params() == {"alpha": 0.9, "tol": 1e-10, "max_iter": 200}
    other = clone(est.set_params(max_iter=50))
    assert other.get_params()["max_iter"] == 50
    assert not hasattr(other, "scores_")


def test_pagerank_estimator(toy_graph):
    est = PageRank().fit(toy_graph)
    assert est.converged_ and est.n_iter_ > 0
    np.testing.assert_array_equal(PageRank().fit_transform(toy_graph), pagerank(toy_graph).values)


def test_betweenness_estimator():
    g = generate(GeneratorSpec.uniform_random(60, 0.05, seed=0))
    exact = betweenness_exact(g)
    np.testing.assert_array_equal(Betweenness().fit_transform(g), exact.values)
    np.testing.assert_array_equal(Betweenness(normalized=True).fit_transform(g),
                                  exact.diagnostics["normalized"])
    assert Betweenness(pivots=10, seed=1).fit(g).scores_.params["mode"] == "sampled"


def test_component_labeler(toy_graph):
    lab = ComponentLabeler(mode="strong")
    assert lab.fit_predict(toy_graph).tolist() == lab.labels_.tolist()
    assert lab.n_components_ == 4


def test_seed_sampler(sampling_graph, sampling_expected):
    sampler = SeedSampler(k=1, depth=2, direction="both")
    with pytest.raises(NotFittedError):
        sampler.transform(sampling_graph)
    sample = sampler.fit_transform(sampling_graph)
    assert sampler.seeds_.ids == sampling_expected["seeds_k1"]
    assert sorted(sample.node_ids) == sampling_expected["cases"]["both/2"]["nodes"]


def test_discrete_power_law():
    x = sample_powerlaw(2.5, 1, 10_000, seed=0)
    est = DiscretePowerLaw().fit(x)
    assert 2.45 <= est.alpha_ <= 2.55
    assert est.p_value_ is None
    ll = est.score_samples(np.array([est.xmin_, est.xmin_ + 1]))
    assert ll[0] > ll[1]
    assert np.isfinite(est.score(x))
    draws = est.sample(100, seed=1)
    assert draws.min() >= est.xmin_
    fixed = DiscretePowerLaw(xmin=3, bootstrap=5, seed=2).fit(x)
    assert fixed.xmin_ == 3 and 0 <= fixed.p_value_ <= 1


def test_estimators_validate_input():
    with pytest.raises(TypeError):
        PageRank().fit(np.zeros((3, 3)))
    with pytest.raises(InvalidParameter):
        DiscretePowerLaw().fit(np.array([[1, 2], [3, 4]]))
