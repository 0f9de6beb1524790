"""Measure hidden stratification in classifier evaluation sets.

Three complementary measurement methods over per-example model outputs:
stratified reporting against a prescribed subclass schema, human error
auditing with event-sourced tagging, and unsupervised slice discovery via
k-means over embedding vectors.
"""

from .audit import (
    AuditQueueEntry,
    AuditState,
    apply_tag,
    audit_snapshot,
    build_error_queue,
    merged_set,
)
from .cluster import (
    ClusterAssignment,
    ClusterFinding,
    ClusterPair,
    cluster_composition,
    detect_hidden_strata,
    error_vector,
    kmeans,
    select_error_cluster_pair,
)
from .errors import (
    AuditError,
    ClusterError,
    ConfigError,
    DataFormatError,
    MetricError,
    SchemaError,
    StrataError,
    UndefinedMetricError,
)
from .io import load_evaluation_set, load_schema, save_evaluation_set, save_schema
from .metrics import (
    ConfusionCounts,
    RocCurve,
    StratifiedReport,
    SubclassRow,
    auc,
    bootstrap_difference_test,
    confusion_at_threshold,
    roc_points,
    stratified_report,
)
from .model import (
    Axis,
    EvaluationSet,
    Record,
    Schema,
    TagDef,
    ValidationReport,
    validate_against_schema,
)
from .synth import PlantConfig, SubclassSpec, generate_planted, load_plant_config

__version__ = "0.1.0"

__all__ = [
    "AuditError",
    "AuditQueueEntry",
    "AuditState",
    "Axis",
    "ClusterAssignment",
    "ClusterError",
    "ClusterFinding",
    "ClusterPair",
    "ConfigError",
    "ConfusionCounts",
    "DataFormatError",
    "EvaluationSet",
    "MetricError",
    "PlantConfig",
    "Record",
    "RocCurve",
    "Schema",
    "SchemaError",
    "StrataError",
    "StratifiedReport",
    "SubclassRow",
    "SubclassSpec",
    "TagDef",
    "UndefinedMetricError",
    "ValidationReport",
    "apply_tag",
    "auc",
    "audit_snapshot",
    "bootstrap_difference_test",
    "build_error_queue",
    "cluster_composition",
    "confusion_at_threshold",
    "detect_hidden_strata",
    "error_vector",
    "generate_planted",
    "kmeans",
    "load_evaluation_set",
    "load_plant_config",
    "load_schema",
    "merged_set",
    "roc_points",
    "save_evaluation_set",
    "save_schema",
    "select_error_cluster_pair",
    "stratified_report",
    "validate_against_schema",
]
