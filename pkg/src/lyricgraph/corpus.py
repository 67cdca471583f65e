"""Corpus ingestion, line segmentation, and per-song lexical/structural metrics.

Input corpora are line-delimited JSON records (UTF-8), one song per line, with
fields ``song_id``, ``artist_id``, ``title`` and ``text`` (lyric text with
embedded newlines). Songs are split into lines on newline delimiters and each
line is whitespace-normalized under Unicode NFC. No stemming, lemmatization or
other language-specific transformation is applied; metrics case-fold
internally so that repetition and token identity are case-insensitive.
"""

from __future__ import annotations

import csv
import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DataValidationError

METRICS_CSV_HEADER = "song_id,artist_id,n_lines,n_tokens,n_chars,lexical_entropy,line_repeat_ratio,chorus_score"


@dataclass(frozen=True)
class SongRecord:
    """A parsed song: identity plus its normalized, non-empty lyric lines."""

    song_id: str
    artist_id: str
    title: str
    raw_text: str
    lines: tuple[str, ...]

    def __post_init__(self):
        if not self.lines:
            raise DataValidationError(f"song {self.song_id!r}: no lines after normalization")
        for line in self.lines:
            if not line.strip():
                raise DataValidationError(f"song {self.song_id!r}: blank line slipped through")


@dataclass(frozen=True)
class TextMetrics:
    song_id: str
    lexical_entropy: float
    line_repeat_ratio: float
    chorus_score: float
    n_lines: int
    n_tokens: int
    n_chars: int


@dataclass(frozen=True)
class Rejection:
    """One dropped input record: position in the stream plus the reason."""

    ordinal: int
    song_id: str | None
    reason: str


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


def _line_key(line: str) -> str:
    # repetition identity is exact match of the case-folded normalized line
    return line.casefold()


def tokenize(line: str) -> list[str]:
    """Case-folded tokens split on Unicode whitespace. No punctuation stripping."""
    return line.casefold().split()


def _token_counts(lines: Iterable[str]) -> Counter:
    counts: Counter = Counter()
    for line in lines:
        counts.update(tokenize(line))
    return counts


def lexical_entropy(lines: Iterable[str], base: float = 2.0) -> float:
    """Shannon entropy of the token distribution pooled over all lines.

    Defaults to bits. Repeated lines contribute their tokens every time they
    occur. Terms are summed over counts in ascending sorted order so the
    result is independent of dict iteration order.
    """
    if base <= 1.0:
        raise DataValidationError(f"entropy base must be > 1, got {base}")
    counts = _token_counts(lines)
    total = sum(counts.values())
    if total == 0:
        raise DataValidationError("empty token stream")
    h = 0.0
    for c in sorted(counts.values()):
        p = c / total
        h -= p * math.log2(p)
    if base != 2.0:
        h /= math.log2(base)
    return max(h, 0.0)


def line_repeat_ratio(lines: list[str]) -> float:
    """Fraction of lines that are repeats: 1 - distinct/total."""
    if not lines:
        raise DataValidationError("no lines")
    distinct = len({_line_key(line) for line in lines})
    return 1.0 - distinct / len(lines)


def chorus_score(lines: list[str]) -> float:
    """Maximum relative frequency of any single line; hook-dominance proxy."""
    if not lines:
        raise DataValidationError("no lines")
    counts = Counter(_line_key(line) for line in lines)
    return max(counts.values()) / len(lines)


def compute_text_metrics(song: SongRecord) -> TextMetrics:
    lines = list(song.lines)
    counts = _token_counts(lines)
    return TextMetrics(
        song_id=song.song_id,
        lexical_entropy=lexical_entropy(lines),
        line_repeat_ratio=line_repeat_ratio(lines),
        chorus_score=chorus_score(lines),
        n_lines=len(lines),
        n_tokens=sum(counts.values()),
        n_chars=sum(len(line) for line in lines),
    )


def parse_corpus(record_stream: Iterable[dict]) -> tuple[list[SongRecord], list[Rejection]]:
    """Parse raw corpus records into SongRecords, logging every drop.

    Records missing a usable id or text, or empty after normalization, or
    duplicating an earlier song_id are rejected (not fatal). A record that is
    not a mapping at all is a malformed stream and raises.
    """
    songs: list[SongRecord] = []
    rejections: list[Rejection] = []
    seen: set[str] = set()
    for ordinal, rec in enumerate(record_stream):
        if not isinstance(rec, dict):
            raise DataValidationError(f"record {ordinal}: not a structured record")
        song_id = rec.get("song_id")
        if not isinstance(song_id, str) or not song_id.strip():
            rejections.append(Rejection(ordinal, None, "missing id"))
            continue
        text = rec.get("text")
        if not isinstance(text, str):
            rejections.append(Rejection(ordinal, song_id, "missing text"))
            continue
        lines = segment_lines(text)
        if not lines:
            rejections.append(Rejection(ordinal, song_id, "empty after normalization"))
            continue
        if song_id in seen:
            rejections.append(Rejection(ordinal, song_id, "duplicate id"))
            continue
        seen.add(song_id)
        songs.append(
            SongRecord(
                song_id=song_id,
                artist_id=str(rec.get("artist_id", "")),
                title=str(rec.get("title", "")),
                raw_text=text,
                lines=tuple(lines),
            )
        )
    return songs, rejections


def read_corpus_records(path) -> Iterator[dict]:
    """Yield raw records from a line-delimited JSON corpus file."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataValidationError(f"record {lineno}: invalid JSON ({exc.msg})") from exc
            yield rec


def load_corpus(path) -> tuple[list[SongRecord], list[Rejection]]:
    return parse_corpus(read_corpus_records(path))


def song_to_record(song: SongRecord) -> dict:
    """Re-serializable record: parsing it again reproduces the same lines."""
    return {
        "song_id": song.song_id,
        "artist_id": song.artist_id,
        "title": song.title,
        "text": "\n".join(song.lines),
    }


def write_songs_file(songs: list[SongRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for song in songs:
            fh.write(json.dumps(song_to_record(song), ensure_ascii=False) + "\n")


def write_metrics_csv(metrics: list[TextMetrics], artist_by_song: dict[str, str], path) -> None:
    """Per-song metrics table; floats at 6 decimal places."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_CSV_HEADER.split(","))
        for m in metrics:
            writer.writerow(
                [
                    m.song_id,
                    artist_by_song.get(m.song_id, ""),
                    m.n_lines,
                    m.n_tokens,
                    m.n_chars,
                    f"{m.lexical_entropy:.6f}",
                    f"{m.line_repeat_ratio:.6f}",
                    f"{m.chorus_score:.6f}",
                ]
            )


def read_metrics_csv(path) -> tuple[list[TextMetrics], dict[str, str]]:
    """Load a metrics table back; returns (metrics, artist id per song)."""
    metrics: list[TextMetrics] = []
    artists: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != METRICS_CSV_HEADER.split(","):
            raise DataValidationError(f"{path}: unexpected metrics header {reader.fieldnames}")
        for row in reader:
            artists[row["song_id"]] = row["artist_id"]
            metrics.append(
                TextMetrics(
                    song_id=row["song_id"],
                    lexical_entropy=float(row["lexical_entropy"]),
                    line_repeat_ratio=float(row["line_repeat_ratio"]),
                    chorus_score=float(row["chorus_score"]),
                    n_lines=int(row["n_lines"]),
                    n_tokens=int(row["n_tokens"]),
                    n_chars=int(row["n_chars"]),
                )
            )
    return metrics, artists


def write_rejection_log(rejections: list[Rejection], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rej in rejections:
            ident = rej.song_id if rej.song_id is not None else "<no id>"
            fh.write(f"{rej.ordinal}\t{ident}\t{rej.reason}\n")
