"""Monte Carlo simulator for downlink mmWave-NOMA user clustering.

Pipeline: drop users with a Poisson cluster process, build uniform
linear array channels, group users by normalized beam direction
(Ward-linkage hierarchical clustering with automatic cluster-count
selection, or 1-D k-means), allocate per-cluster NOMA power under a
minimum-rate constraint, and report achievable sum rates.
"""

from ._kernels import NUMBA_ENABLED
from .scenario import ScenarioConfig, Scenario, UserGeometry, generate_scenario
from .channel import (ChannelConfig, ChannelVector, steering_vector,
                      los_channel, full_channel, cosine_similarity,
                      dirichlet_similarity, noise_power)
from .clustering import (Partition, MergeHistory, EvaluationGraph,
                         centroid, merge_cost, distortion_mse, ahc_run,
                         evaluation_graph, l_method, select_partition,
                         kmeans_1d)
from .noma import (NomaConfig, ClusterAllocation, RateReport, beamformer,
                   effective_gain, split_inter_cluster_power,
                   allocate_cluster, user_rate, evaluate_partition)
from .harness import (ExperimentConfig, ResultRow, SummaryRow,
                      run_drop, run_experiment, summarize, write_csv,
                      dbm_to_watts, FROM_AHC)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "ScenarioConfig", "Scenario", "UserGeometry", "generate_scenario",
    "ChannelConfig", "ChannelVector", "steering_vector", "los_channel",
    "full_channel", "cosine_similarity", "dirichlet_similarity",
    "noise_power",
    "Partition", "MergeHistory", "EvaluationGraph", "centroid",
    "merge_cost", "distortion_mse", "ahc_run", "evaluation_graph",
    "l_method", "select_partition", "kmeans_1d",
    "NomaConfig", "ClusterAllocation", "RateReport", "beamformer",
    "effective_gain", "split_inter_cluster_power", "allocate_cluster",
    "user_rate", "evaluate_partition",
    "ExperimentConfig", "ResultRow", "SummaryRow", "run_drop",
    "run_experiment", "summarize", "write_csv", "dbm_to_watts",
    "FROM_AHC",
]
