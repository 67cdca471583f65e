"""Line-level sentence-embedding export in the core's embedding file format."""

from .encoders import DEFAULT_MODEL, SentenceEncoder
from .export import (
    ExportError,
    ExportManifest,
    export_embeddings,
    load_manifest,
    normalize_line,
    read_corpus_songs,
    segment_lines,
    write_manifest,
)

__all__ = [
    "DEFAULT_MODEL",
    "ExportError",
    "ExportManifest",
    "SentenceEncoder",
    "export_embeddings",
    "load_manifest",
    "normalize_line",
    "read_corpus_songs",
    "segment_lines",
    "write_manifest",
]
