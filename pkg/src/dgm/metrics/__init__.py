from .betweenness import betweenness_exact, betweenness_sampled, choose_pivots
from .components import connected_components, summarize_connectivity
from .degree import degree_distribution, degree_vector
from .pagerank import ConvergenceWarning, pagerank
from .results import (
    ComponentLabeling,
    ConnectivitySummary,
    DegreeHistogram,
    ScoreMap,
    SmallWorldStats,
)
from .smallworld import local_clustering, small_world

__all__ = [
    "betweenness_exact",
    "betweenness_sampled",
    "choose_pivots",
    "connected_components",
    "summarize_connectivity",
    "degree_distribution",
    "degree_vector",
    "pagerank",
    "ConvergenceWarning",
    "ComponentLabeling",
    "ConnectivitySummary",
    "DegreeHistogram",
    "ScoreMap",
    "SmallWorldStats",
    "local_clustering",
    "small_world",
]
