"""Hierarchical clustered federated learning for FDIA detection."""
from .aggregation import WeightedEntry, WeightMode, aggregate, aggregate_plain, deviation_weights, size_weighted_mean
from .clustering import ClusterParams, ClusterSet, assign_nearest, cluster_client, select_centers
from .config import ExperimentConfig, config_from_dict, parse_config
from .datagen import (
    ClientShard,
    Dataset,
    ScalerStats,
    SynthConfig,
    generate_synthetic,
    load_csv,
    partition_label_skew,
    split_train_test,
    standardize,
    write_csv,
)
from .federation import (
    Algorithm,
    FedState,
    Topology,
    client_update,
    estimate_round_latency,
    run_experiment,
    server_round,
    subserver_update,
    three_tier,
    two_tier,
)
from .metrics import auc, classification_metrics, confusion_matrix, ks_statistic, roc_curve
from .model import Architecture, TrainSpec, gradient, init_params, local_train, loss, predict_proba

__version__ = "0.1.0"
