"""Parent-centric citation networks and their citation-ecology metrics."""

from .estimators import EcologyTransformer, EntropyCitationRegressor, PunctuationDetector
from .events import PunctuationEvent, detect_punctuations, field_average, punctuation_rate
from .graph import CitationIndex, NodeRole, ParentNetwork, build_parent_network, role_counts, snapshot
from .ingest import BlindMap, CanonicalRecord, RawRecord, dedup_key, load_edges, merge_duplicates, normalize, parse_records
from .metrics import (
    EcologyMetrics,
    MetricsSeries,
    citation_reach,
    compute_metrics,
    degree_distribution,
    entropy_log_citation_fit,
    metrics_timeline,
    normalized_entropy,
    shannon_entropy,
)
from .synth import GrowthParams, grow_network, oracle_metrics, prototype_network

__version__ = "0.1.0"

__all__ = [
    "BlindMap",
    "CanonicalRecord",
    "CitationIndex",
    "EcologyMetrics",
    "EcologyTransformer",
    "EntropyCitationRegressor",
    "GrowthParams",
    "MetricsSeries",
    "NodeRole",
    "ParentNetwork",
    "PunctuationDetector",
    "PunctuationEvent",
    "RawRecord",
    "build_parent_network",
    "citation_reach",
    "compute_metrics",
    "dedup_key",
    "degree_distribution",
    "detect_punctuations",
    "entropy_log_citation_fit",
    "field_average",
    "grow_network",
    "load_edges",
    "merge_duplicates",
    "metrics_timeline",
    "normalize",
    "normalized_entropy",
    "oracle_metrics",
    "parse_records",
    "prototype_network",
    "punctuation_rate",
    "role_counts",
    "shannon_entropy",
    "snapshot",
]
