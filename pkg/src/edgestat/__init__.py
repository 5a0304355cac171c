"""Edge statistics of random k-vertex subsets of graphs and hypergraphs."""

__version__ = "0.1.0"

from .hypercore import (
    Hypergraph,
    HypergraphError,
    PairStats,
    SubsetProfile,
    edges_within,
    is_connected_to,
    neighborhood_family,
    pair_stats,
    subset_profile,
)
from .enumeration import (
    JointDistribution,
    SampleEstimate,
    WorkTooLarge,
    I_value,
    count_forest_subsets,
    count_with_m_range,
    exact_joint_distribution,
    monte_carlo_estimate,
)
from .constructions import ConstructionSpec
from .bounds import BoundReport, BoundSpec, BoundValue, Inapplicable, check_count_bound
from .prooflab import (
    GoodSequences,
    classify_pair,
    count_partner_sets,
    hypergeometric_pj,
    per_set_rho_bound,
    procedure_tree,
    rho_sum_check,
)
from .search import SearchConfig, SearchResult, exhaustive_extremal, local_search

