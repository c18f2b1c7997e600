"""One-shot federated k-means toolkit.

Clients refine their own Lloyd solutions by removing spurious stretched
centroids, attach grouping radii, and ship centroid-radius pairs to a
server that recovers the global centroid set in a single round.  The
package also bundles the comparison baselines, synthetic data models,
partitioners, and the evaluation stack used to benchmark them.
"""

from .baselines import ffcm, k_fed, match_average, run_match_average
from .data import (
    Dataset,
    GmmSpec,
    PartitionPlan,
    SbmSpec,
    generate_gmm,
    generate_sbm,
    load_csv,
    partition_dirichlet,
    partition_iid,
    save_csv,
)
from .kmeans import (
    ClusterSolution,
    FuzzySolution,
    exact_kmeans,
    fuzzy_cmeans,
    init_kmeanspp,
    lloyd,
    objective,
)
from .metrics import EvalReport, evaluate, matched_center_distance, nmi, purity, sigma_diagnostic
from .pipeline import FecaConfig, FecaRun, run_centralized, run_feca, run_feca_on_subsets
from .radius import CentroidRadius, DegenerateRadiusError, assign_empirical, assign_theoretical
from .refine import RefinedSolution, detect_many_fit_one, detect_one_fit_many, refine
from .server import AggregationResult, aggregate

__all__ = [
    "AggregationResult",
    "CentroidRadius",
    "ClusterSolution",
    "Dataset",
    "DegenerateRadiusError",
    "EvalReport",
    "FecaConfig",
    "FecaRun",
    "FuzzySolution",
    "GmmSpec",
    "PartitionPlan",
    "RefinedSolution",
    "SbmSpec",
    "aggregate",
    "assign_empirical",
    "assign_theoretical",
    "detect_many_fit_one",
    "detect_one_fit_many",
    "evaluate",
    "exact_kmeans",
    "ffcm",
    "fuzzy_cmeans",
    "generate_gmm",
    "generate_sbm",
    "init_kmeanspp",
    "k_fed",
    "lloyd",
    "load_csv",
    "match_average",
    "matched_center_distance",
    "nmi",
    "objective",
    "partition_dirichlet",
    "partition_iid",
    "purity",
    "refine",
    "run_centralized",
    "run_feca",
    "run_feca_on_subsets",
    "run_match_average",
    "save_csv",
    "sigma_diagnostic",
]

__version__ = "0.1.0"
