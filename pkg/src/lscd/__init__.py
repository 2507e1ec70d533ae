"""Lexical semantic change detection over contextualized embeddings.

Form-based measures (average pairwise distance, prototype distance),
sense-based measures (joint clustering + Jensen-Shannon divergence,
incremental clustering + prototype distances), a computational-annotation
pipeline (judgments, usage graphs, sense induction, graph-based change), and
the evaluation statistics used to score them.
"""

from ._accel import NUMBA_ENABLED
from .annotator import (
    ScaleMap,
    build_usage_graph,
    compare_metric,
    graph_gcd,
    scale_map,
    wic_judgments,
    wsi,
)
from .clustering import (
    ApParams,
    AppMemory,
    CorrParams,
    MemoryEntry,
    affinity_propagation,
    app_step,
    brute_force_correlation_cluster,
    correlation_cluster,
    correlation_loss,
)
from .core import (
    ChangeScore,
    Clustering,
    DomainError,
    EmbeddingSet,
    EmptyInputError,
    Judgment,
    LscdError,
    Method,
    SchemaError,
    UsageGraph,
    UsageInstance,
    validate_dataset,
)
from .dataio import GoldScore
from .form_measures import apd, prt
from .geometry import (
    DistanceKind,
    LayerMode,
    aggregate_layers,
    canberra_distance,
    cosine_distance,
    enumerate_layer_combos,
    prototype,
)
from .metrics import EvalResult, MetricKind, adjusted_rand_index, purity, spearman, weighted_average
from .sense_measures import (
    ClusterDistribution,
    ap_jsd,
    cluster_distributions,
    jsd,
    sense_prototypes,
    widid,
)

__version__ = "0.1.0"
