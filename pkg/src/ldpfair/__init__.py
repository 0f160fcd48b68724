"""Audit group fairness of classifiers trained on locally differentially private data."""

from .data import (
    AttributeSpec,
    Dataset,
    Schema,
    Violation,
    project_groups,
    validate,
    validate_schema,
)
from .errors import ConfigError, IngestError, LdpFairError, ParameterError
from .forest import ForestParams, ForestTrainer, TrainedModel, backend_name, gini, predict, train
from .harness import (
    ExperimentConfig,
    ResultRow,
    SummaryRow,
    aggregate,
    emit_report,
    parse_summary_csv,
    run_experiment,
)
from .mechanisms import (
    BudgetSplit,
    KrrParams,
    MechanismConfig,
    cartesian_decode,
    cartesian_encode,
    krr_params,
    krr_randomize,
    krr_randomize_column,
    max_probability_ratio,
    randomize_record,
    randomize_sensitive_columns,
    split_budget,
    transition_matrix,
)
from .metrics import DisparityReport, GroupRates, confusion_rates, disparity, group_rates
from .synth import SynthParams, ThresholdSpec, binarize_outcome, generate, synth_dataset

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec",
    "BudgetSplit",
    "ConfigError",
    "Dataset",
    "DisparityReport",
    "ExperimentConfig",
    "ForestParams",
    "ForestTrainer",
    "GroupRates",
    "IngestError",
    "KrrParams",
    "LdpFairError",
    "MechanismConfig",
    "ParameterError",
    "ResultRow",
    "Schema",
    "SummaryRow",
    "SynthParams",
    "ThresholdSpec",
    "TrainedModel",
    "Violation",
    "aggregate",
    "backend_name",
    "binarize_outcome",
    "cartesian_decode",
    "cartesian_encode",
    "confusion_rates",
    "disparity",
    "emit_report",
    "generate",
    "gini",
    "group_rates",
    "krr_params",
    "krr_randomize",
    "krr_randomize_column",
    "max_probability_ratio",
    "parse_summary_csv",
    "predict",
    "project_groups",
    "randomize_record",
    "randomize_sensitive_columns",
    "run_experiment",
    "split_budget",
    "synth_dataset",
    "train",
    "transition_matrix",
    "validate",
    "validate_schema",
]
