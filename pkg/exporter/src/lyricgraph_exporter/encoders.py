"""Neural encoder adapter. Imported lazily so the writer works without torch."""

from __future__ import annotations

import logging

from .export import ExportError

log = logging.getLogger(__name__)

DEFAULT_MODEL = "paraphrase-multilingual-MiniLM-L12-v2"


class SentenceEncoder:
    """sentence-transformers model wrapped to the one-method encode contract.

    Output is the raw pooled vector per line (no L2 normalization), converted
    to numpy, in input order. Inference runs in eval mode without gradients,
    so a pinned model version gives identical floats run to run.
    """

    def __init__(self, model_name: str = DEFAULT_MODEL, device: str | None = None):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ExportError(
                "sentence-transformers is not installed; pip install 'lyricgraph-exporter[model]'"
            ) from exc
        try:
            self.model = SentenceTransformer(model_name, device=device)
        except Exception as exc:
            raise ExportError(f"cannot load model {model_name!r}: {exc}") from exc
        self.model.eval()
        self.model_name = model_name
        log.info("loaded %s (dim=%d)", model_name, self.dim)

    @property
    def dim(self) -> int:
        return int(self.model.get_sentence_embedding_dimension())

    def encode(self, lines: list[str]):
        return self.model.encode(
            list(lines),
            batch_size=len(lines),
            convert_to_numpy=True,
            normalize_embeddings=False,
            show_progress_bar=False,
        )
