"""scikit-learn style wrappers around the functional API.

The estimators take a :class:`~dgm.graph.DependencyGraph` (or, for the
power-law fitter, a 1-d array of integer samples) as ``X``, learn their
results in ``fit`` and expose them as trailing-underscore attributes, so
``get_params`` / ``set_params`` / ``clone`` work as usual.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .ingest import SampleSpec, bfs_sample, select_top_seeds
from .metrics import betweenness_exact, betweenness_sampled, connected_components, pagerank
from .powerlaw import bootstrap_pvalue, fit_discrete, hurwitz_zeta, sample_powerlaw
from .validation import check_graph, check_samples


class PageRank(BaseEstimator):
    """PageRank with uniform dangling-mass redistribution.

    Attributes
    ----------
    scores_ : ScoreMap
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, alpha=0.85, tol=1e-10, max_iter=200):
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        graph = check_graph(X)
        self.scores_ = pagerank(graph, self.alpha, self.tol, self.max_iter)
        self.n_iter_ = self.scores_.diagnostics["iterations"]
        self.converged_ = self.scores_.diagnostics["converged"]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).scores_.values


class Betweenness(BaseEstimator):
    """Exact (``pivots=None``) or pivot-sampled betweenness."""

    def __init__(self, pivots=None, seed=None, normalized=False, threads=1):
        self.pivots = pivots
        self.seed = seed
        self.normalized = normalized
        self.threads = threads

    def fit(self, X, y=None):
        graph = check_graph(X)
        if self.pivots is None:
            self.scores_ = betweenness_exact(graph, threads=self.threads)
        else:
            self.scores_ = betweenness_sampled(graph, self.pivots, self.seed, threads=self.threads)
        return self

    def fit_transform(self, X, y=None):
        self.fit(X)
        if self.normalized:
            return self.scores_.diagnostics["normalized"]
        return self.scores_.values


class ComponentLabeler(BaseEstimator):
    def __init__(self, mode="weak"):
        self.mode = mode

    def fit(self, X, y=None):
        self.labeling_ = connected_components(check_graph(X), self.mode)
        self.labels_ = self.labeling_.labels
        self.sizes_ = self.labeling_.sizes
        self.n_components_ = self.labeling_.n_components
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


class SeedSampler(TransformerMixin, BaseEstimator):
    """Top-``k`` seed selection in ``fit``; BFS expansion in ``transform``."""

    def __init__(self, k=5000, depth=2, direction="both"):
        self.k = k
        self.depth = depth
        self.direction = direction

    def fit(self, X, y=None):
        graph = check_graph(X)
        self.spec_ = SampleSpec(self.k, self.depth, self.direction)
        self.seeds_ = select_top_seeds(graph, self.k)
        return self

    def transform(self, X):
        check_is_fitted(self, "seeds_")
        return bfs_sample(check_graph(X), self.seeds_, self.spec_)


class DiscretePowerLaw(BaseEstimator):
    """Discrete power-law fit of positive integer samples.

    Parameters
    ----------
    xmin : int or None
        Fixed lower cutoff; None selects it by minimum KS distance.
    bootstrap : int
        Number of goodness-of-fit replicates; 0 skips the p-value.
    seed : int or None
        Seed for the bootstrap.
    """

    def __init__(self, xmin=None, bootstrap=0, seed=None):
        self.xmin = xmin
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y=None):
        x = check_samples(X)
        fit = fit_discrete(x, xmin=self.xmin)
        if self.bootstrap:
            fit.p_value = bootstrap_pvalue(x, fit, self.bootstrap, 0 if self.seed is None else self.seed)
        self.fit_ = fit
        self.alpha_ = fit.alpha
        self.xmin_ = fit.xmin
        self.ks_ = fit.ks
        self.n_tail_ = fit.n_tail
        self.p_value_ = fit.p_value
        return self

    def score_samples(self, X):
        """Log-probability of each sample under the fitted tail (-inf below xmin)."""
        check_is_fitted(self, "alpha_")
        x = check_samples(X).astype(float)
        out = np.full(x.shape, -np.inf)
        tail = x >= self.xmin_
        out[tail] = -self.alpha_ * np.log(x[tail]) - np.log(hurwitz_zeta(self.alpha_, self.xmin_))
        return out

    def score(self, X, y=None):
        """Mean log-likelihood over the samples at or above ``xmin_``."""
        s = self.score_samples(X)
        s = s[np.isfinite(s)]
        return float(s.mean()) if len(s) else -np.inf

    def sample(self, n, seed):
        check_is_fitted(self, "alpha_")
        return sample_powerlaw(self.alpha_, self.xmin_, n, seed)
