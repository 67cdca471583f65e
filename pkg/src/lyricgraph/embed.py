"""Line- and song-level vectors: mean pooling, cosine similarity, embedding file IO.

The embedding file is the contract between this core and any external encoder:
line-delimited JSON, a header record declaring ``dim`` and ``model_name``,
then one record per (song, line) with ``song_id``, ``line_index`` and
``vector``. Stored values carry float32 precision; everything is pooled and
compared in float64 internally.

A deterministic character-3-gram hashing embedder (`toy_embed`) substitutes
for the neural model in tests and demos.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .corpus import normalize_line
from .errors import DataValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineEmbeddingSet:
    """One vector per lyric line of a song, in line order."""

    song_id: str
    vectors: np.ndarray  # shape (n_lines, dim), float64

    def __post_init__(self):
        vecs = self.vectors
        if vecs.ndim != 2 or vecs.shape[0] == 0 or vecs.shape[1] == 0:
            raise DataValidationError(f"song {self.song_id!r}: empty embedding set")
        if not np.all(np.isfinite(vecs)):
            raise DataValidationError(f"song {self.song_id!r}: non-finite embedding component")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def n_lines(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True)
class SongVector:
    """Pooled song-level vector (component-wise mean of line vectors)."""

    song_id: str
    v: np.ndarray  # shape (dim,), float64

    def __post_init__(self):
        if self.v.ndim != 1 or self.v.shape[0] == 0:
            raise DataValidationError(f"song {self.song_id!r}: bad vector shape")
        if not np.all(np.isfinite(self.v)):
            raise DataValidationError(f"song {self.song_id!r}: non-finite vector component")
        if not np.any(self.v):
            raise DataValidationError(f"song {self.song_id!r}: degenerate pooled vector (all zero)")

    @property
    def dim(self) -> int:
        return int(self.v.shape[0])


def pool_song_vector(lines: LineEmbeddingSet) -> SongVector:
    """Mean-pool line vectors into one song vector. Not re-normalized."""
    pooled = lines.vectors.mean(axis=0)
    return SongVector(song_id=lines.song_id, v=pooled)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two nonzero vectors of equal dimension."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DataValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DataValidationError("cosine undefined for zero vector")
    return float(np.dot(u, v) / (nu * nv))


# ---------------------------------------------------------------------------
# Embedding file format
# ---------------------------------------------------------------------------


def save_embeddings(sets: list[LineEmbeddingSet], path, model_name: str) -> None:
    """Write the line-delimited embedding file; vectors stored at float32 precision.

    Writing the loaded result again is byte-identical: components are rounded
    to float32 before serialization, so a second round-trip changes nothing.
    """
    if not sets:
        raise DataValidationError("no embedding sets to save")
    dim = sets[0].dim
    for s in sets:
        if s.dim != dim:
            raise DataValidationError(f"song {s.song_id!r}: dim {s.dim} != {dim}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim, "model_name": model_name}) + "\n")
        for s in sets:
            vecs32 = s.vectors.astype(np.float32)
            for idx in range(s.n_lines):
                rec = {
                    "song_id": s.song_id,
                    "line_index": idx,
                    "vector": [float(x) for x in vecs32[idx]],
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_embedding_header(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if raw.strip():
                header = json.loads(raw)
                break
        else:
            raise DataValidationError(f"{path}: empty embedding file")
    if not isinstance(header, dict) or "dim" not in header or "model_name" not in header:
        raise DataValidationError(f"{path}: first record must declare dim and model_name")
    dim = header["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise DataValidationError(f"{path}: bad dim {dim!r}")
    return header


def load_embeddings(path) -> dict[str, LineEmbeddingSet]:
    """Load an embedding file into song_id -> LineEmbeddingSet.

    Records for a song must be contiguous and line_index-ordered; all vectors
    must match the header dim and be finite. Violations are fatal and name the
    offending record.
    """
    header = read_embedding_header(path)
    dim = header["dim"]
    sets: dict[str, LineEmbeddingSet] = {}
    current_id: str | None = None
    current_rows: list[list[float]] = []

    def flush():
        if current_id is None:
            return
        if current_id in sets:
            raise DataValidationError(f"{path}: song {current_id!r} appears in two separate blocks")
        sets[current_id] = LineEmbeddingSet(
            song_id=current_id, vectors=np.asarray(current_rows, dtype=np.float64)
        )

    with open(path, "r", encoding="utf-8") as fh:
        saw_header = False
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            if not saw_header:
                saw_header = True
                continue
            where = f"{path} line {lineno}"
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataValidationError(f"{where}: invalid JSON ({exc.msg})") from exc
            song_id = rec.get("song_id")
            if not isinstance(song_id, str) or not song_id:
                raise DataValidationError(f"{where}: missing song_id")
            vector = rec.get("vector")
            if not isinstance(vector, list) or len(vector) != dim:
                got = len(vector) if isinstance(vector, list) else "none"
                raise DataValidationError(f"{where}: song {song_id!r} vector has {got} components, expected {dim}")
            if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in vector):
                raise DataValidationError(f"{where}: song {song_id!r} has a non-finite component")
            if song_id != current_id:
                flush()
                current_id = song_id
                current_rows = []
            expected_idx = len(current_rows)
            if rec.get("line_index") != expected_idx:
                raise DataValidationError(
                    f"{where}: song {song_id!r} line_index {rec.get('line_index')!r}, expected {expected_idx}"
                )
            current_rows.append(vector)
    flush()
    if not sets:
        raise DataValidationError(f"{path}: no embedding records")
    n_lines = sum(s.n_lines for s in sets.values())
    log.info("loaded %d songs / %d line vectors (dim=%d) from %s", len(sets), n_lines, dim, path)
    return sets


# ---------------------------------------------------------------------------
# Deterministic toy embedder
# ---------------------------------------------------------------------------


def toy_embed(line: str, dim: int, seed: int) -> np.ndarray:
    """Hash character 3-grams of the normalized line into a unit vector.

    Deterministic for a given (line, dim, seed); surface-similar strings share
    grams and therefore score higher cosines than unrelated strings.
    """
    if dim < 8:
        raise DataValidationError(f"toy embedder needs dim >= 8, got {dim}")
    norm = normalize_line(line).casefold()
    if not norm:
        raise DataValidationError("cannot embed an empty line")
    grams = [norm[i : i + 3] for i in range(len(norm) - 2)] if len(norm) >= 3 else [norm]
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    vec = np.zeros(dim, dtype=np.float64)
    for gram in grams:
        digest = hashlib.blake2b(gram.encode("utf-8"), key=key, digest_size=8).digest()
        h = int.from_bytes(digest, "little")
        bucket = h % dim
        sign = 1.0 if (h >> 63) & 1 else -1.0
        vec[bucket] += sign
    norm2 = np.linalg.norm(vec)
    if norm2 == 0.0:
        # only possible if every bucket cancelled; nudge from the whole string
        vec[int.from_bytes(hashlib.blake2b(norm.encode("utf-8"), key=key, digest_size=8).digest(), "little") % dim] = 1.0
        norm2 = 1.0
    return vec / norm2


def toy_embed_song(song_id: str, lines: list[str], dim: int, seed: int) -> LineEmbeddingSet:
    vecs = np.stack([toy_embed(line, dim, seed) for line in lines])
    return LineEmbeddingSet(song_id=song_id, vectors=vecs)


def vectors_digest(vectors: list[SongVector]) -> str:
    """Content digest of pooled vectors, used for graph-cache invalidation."""
    h = hashlib.sha256()
    if vectors:
        h.update(str(vectors[0].dim).encode())
    for sv in vectors:
        h.update(sv.song_id.encode("utf-8"))
        h.update(b"\x00")
        h.update(np.ascontiguousarray(sv.v, dtype=np.float64).tobytes())
    return h.hexdigest()
