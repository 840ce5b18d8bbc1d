"""Linear and nonlinear dependence in return panels.

Pearson and histogram mutual-information dependency matrices, Fourier
surrogates for isolating nonlinear dependence, MST / threshold networks and a
Markowitz backtest whose cash exposure follows a nonlinearity score.
"""

from .dependence import (
    DependencyMatrix,
    DistanceMatrix,
    bin_count,
    dependency_matrix,
    entropy,
    moment_series,
    normalized_mi,
    pearson,
    to_distance,
)
from .errors import (
    DegenerateInputError,
    InsufficientDataError,
    NlcError,
    NumericError,
    ParseError,
    ValidationError,
)
from .network import (
    build_mst,
    build_threshold_graph,
    central_vertex,
    clustering_coefficient,
    degree_centrality,
    mean_occupation_layer,
    network_metrics,
    normalized_tree_length,
)
from .nonlinearity import analyze_window, chi_profile, chi_sig, zeta_nlc
from .panel import (
    PriceTable,
    ReturnPanel,
    SynthSpec,
    WindowSpec,
    gen_synthetic,
    load_price_table,
    rolling_windows,
    to_log_returns,
)
from .surrogate import ensemble_mi_stats, make_surrogates, phase_map

__version__ = "0.1.0"
