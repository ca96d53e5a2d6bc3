"""Clustered linear phased-array synthesis by power-pattern matching."""

from .baselines import (
    EnumerationResult,
    PartitionCapError,
    emm_synthesize,
    epm_enumerate,
    set_partitions,
    stirling2,
)
from .elementary import EPMatrix, elementary_af, ep_matrix, normalize_column
from .kmeans import KMeansResult, kmeans_cluster
from .model import (
    AngularGrid,
    ArrayGeometry,
    ClusteringVector,
    PatternMetrics,
    PowerPattern,
    cpa_array_factor,
    cpa_power_pattern,
    fpa_array_factor,
    fpa_power_pattern,
    matching_improvement,
    pattern_metrics,
    pm_metric,
)
from .synthesis import (
    PmmConfig,
    SampleOutcome,
    SynthesisFailedError,
    SynthesisResult,
    pmm_synthesize,
)
from .tapers import (
    MaskSegment,
    dolph_chebyshev,
    load_mask,
    load_reference,
    save_reference,
    taylor_nbar,
)
from .weighting import (
    IpmTrace,
    UnsupportedGeometryError,
    invert_af_to_excitations,
    ipm_weighting,
    project_onto_reference,
    subarray_average,
)

__version__ = "0.1.0"

__all__ = [
    "AngularGrid",
    "ArrayGeometry",
    "ClusteringVector",
    "EPMatrix",
    "EnumerationResult",
    "IpmTrace",
    "KMeansResult",
    "MaskSegment",
    "PartitionCapError",
    "PatternMetrics",
    "PmmConfig",
    "PowerPattern",
    "SampleOutcome",
    "SynthesisFailedError",
    "SynthesisResult",
    "UnsupportedGeometryError",
    "cpa_array_factor",
    "cpa_power_pattern",
    "dolph_chebyshev",
    "elementary_af",
    "emm_synthesize",
    "ep_matrix",
    "epm_enumerate",
    "fpa_array_factor",
    "fpa_power_pattern",
    "invert_af_to_excitations",
    "ipm_weighting",
    "kmeans_cluster",
    "load_mask",
    "load_reference",
    "matching_improvement",
    "normalize_column",
    "pattern_metrics",
    "pm_metric",
    "pmm_synthesize",
    "project_onto_reference",
    "save_reference",
    "set_partitions",
    "stirling2",
    "subarray_average",
    "taylor_nbar",
]
