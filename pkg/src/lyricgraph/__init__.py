"""Semantic community discovery and boundary-spanning analysis for line-structured corpora."""

from .analysis import (
    ArtistRow,
    CorpusSummary,
    GroupComparison,
    ProbeResult,
    RobustnessRow,
    artist_stats,
    group_comparison,
    probe_out_of_sample,
    robustness_sweep,
)
from .bridge import (
    betweenness_centrality,
    boundary_score,
    boundary_scores,
    classify_bridges,
)
from .community import (
    Partition,
    SweepReport,
    SweepRow,
    adjusted_rand_index,
    binarized,
    louvain,
    modularity,
    resolution_sweep,
    select_stable_resolution,
)
from .corpus import (
    Rejection,
    SongRecord,
    TextMetrics,
    chorus_score,
    compute_text_metrics,
    lexical_entropy,
    line_repeat_ratio,
    load_corpus,
    normalize_line,
    parse_corpus,
    segment_lines,
    tokenize,
)
from .embed import (
    LineEmbeddingSet,
    SongVector,
    cosine_similarity,
    load_embeddings,
    pool_song_vector,
    save_embeddings,
    toy_embed,
    toy_embed_song,
)
from .errors import DataValidationError, InternalInvariantError, LyricGraphError
from .graph import SimilarityGraph, build_knn_graph, knn_edges, load_graph, save_graph, symmetrize

__version__ = "0.1.0"

__all__ = [
    "ArtistRow",
    "CorpusSummary",
    "DataValidationError",
    "GroupComparison",
    "InternalInvariantError",
    "LineEmbeddingSet",
    "LyricGraphError",
    "Partition",
    "ProbeResult",
    "Rejection",
    "RobustnessRow",
    "SimilarityGraph",
    "SongRecord",
    "SongVector",
    "SweepReport",
    "SweepRow",
    "TextMetrics",
    "adjusted_rand_index",
    "artist_stats",
    "betweenness_centrality",
    "boundary_score",
    "boundary_scores",
    "build_knn_graph",
    "chorus_score",
    "classify_bridges",
    "compute_text_metrics",
    "cosine_similarity",
    "binarized",
    "group_comparison",
    "knn_edges",
    "lexical_entropy",
    "line_repeat_ratio",
    "load_corpus",
    "load_embeddings",
    "load_graph",
    "louvain",
    "modularity",
    "normalize_line",
    "parse_corpus",
    "pool_song_vector",
    "probe_out_of_sample",
    "resolution_sweep",
    "robustness_sweep",
    "save_embeddings",
    "save_graph",
    "segment_lines",
    "select_stable_resolution",
    "symmetrize",
    "tokenize",
    "toy_embed",
    "toy_embed_song",
    "__version__",
]
