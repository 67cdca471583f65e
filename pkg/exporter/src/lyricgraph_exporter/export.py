"""Segment a lyric corpus and write one embedding record per line.

This package deliberately does not import the core analysis package. The
contract between the two is the embedding file itself: UTF-8, line-delimited
JSON, a header record declaring ``dim`` and ``model_name``, then one record
per (song, line) with ``song_id``, ``line_index`` and ``vector`` whose
components carry float32 precision. Records for a song are contiguous and
line_index-ordered, songs appear in corpus order.

Line segmentation duplicates the core's corpus rules (NFC normalization,
whitespace collapse, blank lines dropped) so both sides derive identical line
sets from the same corpus; tests/golden_lines.json pins that equivalence.
Vectors are written as the encoder produced them, without L2 normalization:
every downstream comparison is cosine, which is scale-invariant.
"""

from __future__ import annotations

import hashlib
import json
import logging
import unicodedata
from dataclasses import asdict, dataclass

import numpy as np

log = logging.getLogger(__name__)


class ExportError(Exception):
    """Input, encoder, or output problem that must abort the export."""


def normalize_line(piece: str) -> str:
    """NFC-normalize and collapse whitespace; returns "" for blank input."""
    piece = unicodedata.normalize("NFC", piece)
    return " ".join(piece.split())


def segment_lines(raw_text: str) -> list[str]:
    """Split lyric text on newlines into normalized non-empty lines."""
    out = []
    for piece in raw_text.splitlines():
        norm = normalize_line(piece)
        if norm:
            out.append(norm)
    return out


def read_corpus_songs(path) -> list[tuple[str, list[str]]]:
    """(song_id, lines) pairs in file order, applying the core's accept rules.

    Records without a usable id or text, empty after normalization, or
    duplicating an earlier song_id are skipped with a warning, exactly the
    records the core's ingest would reject. Malformed JSON or a non-object
    record is fatal: that is a broken file, not a bad row.
    """
    songs: list[tuple[str, list[str]]] = []
    seen: set[str] = set()
    ordinal = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            if not raw.strip():
                continue
            ordinal += 1
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path} record {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise ExportError(f"{path} record {ordinal}: not a structured record")
            song_id = rec.get("song_id")
            if not isinstance(song_id, str) or not song_id.strip():
                log.warning("record %d: missing id, skipped", ordinal)
                continue
            text = rec.get("text")
            if not isinstance(text, str):
                log.warning("record %d (%s): missing text, skipped", ordinal, song_id)
                continue
            lines = segment_lines(text)
            if not lines:
                log.warning("record %d (%s): empty after normalization, skipped", ordinal, song_id)
                continue
            if song_id in seen:
                log.warning("record %d (%s): duplicate id, skipped", ordinal, song_id)
                continue
            seen.add(song_id)
            songs.append((song_id, lines))
    return songs


@dataclass(frozen=True)
class ExportManifest:
    model_name: str
    dim: int
    n_songs: int
    n_lines: int
    corpus_sha256: str


def _file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _encode_batch(encoder, batch: list[str], expected_dim: int | None) -> np.ndarray:
    rows = np.asarray(encoder.encode(batch), dtype=np.float32)
    if rows.ndim != 2 or rows.shape[0] != len(batch):
        raise ExportError(f"encoder returned shape {rows.shape} for a batch of {len(batch)} lines")
    if expected_dim is not None and rows.shape[1] != expected_dim:
        raise ExportError(f"encoder dim changed mid-export: {rows.shape[1]} != {expected_dim}")
    return rows


def export_embeddings(
    corpus_path,
    encoder,
    output_path,
    model_name: str,
    batch_size: int = 32,
) -> ExportManifest:
    """Embed every lyric line of the corpus and write the embedding file.

    ``encoder.encode(lines)`` must return one vector per input line, all the
    same dimension. Batches are sliced here so any encoder sees at most
    ``batch_size`` lines per call; records are written single-threaded in
    corpus order. Any non-finite component aborts with the offending record
    named: silently propagating a NaN into the similarity graph is worse than
    failing the export.
    """
    if batch_size < 1:
        raise ExportError(f"batch size must be >= 1, got {batch_size}")
    songs = read_corpus_songs(corpus_path)
    if not songs:
        raise ExportError(f"{corpus_path}: no songs to export")
    flat = [(song_id, idx, line) for song_id, lines in songs for idx, line in enumerate(lines)]

    dim: int | None = None
    with open(output_path, "w", encoding="utf-8") as fh:
        for start in range(0, len(flat), batch_size):
            chunk = flat[start : start + batch_size]
            rows = _encode_batch(encoder, [line for _, _, line in chunk], dim)
            if dim is None:
                dim = int(rows.shape[1])
                fh.write(json.dumps({"dim": dim, "model_name": model_name}) + "\n")
            for (song_id, idx, _), row in zip(chunk, rows):
                if not np.all(np.isfinite(row)):
                    raise ExportError(f"song {song_id!r} line {idx}: non-finite embedding component")
                rec = {"song_id": song_id, "line_index": idx, "vector": [float(x) for x in row]}
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    manifest = ExportManifest(
        model_name=model_name,
        dim=int(dim),
        n_songs=len(songs),
        n_lines=len(flat),
        corpus_sha256=_file_sha256(corpus_path),
    )
    log.info(
        "exported %d songs / %d line vectors (dim=%d) to %s",
        manifest.n_songs, manifest.n_lines, manifest.dim, output_path,
    )
    return manifest


def write_manifest(manifest: ExportManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> ExportManifest:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        manifest = ExportManifest(**data)
    except TypeError as exc:
        raise ExportError(f"{path}: bad manifest ({exc})") from exc
    if manifest.dim < 1 or manifest.n_songs < 1 or manifest.n_lines < manifest.n_songs:
        raise ExportError(f"{path}: inconsistent manifest counts")
    return manifest
