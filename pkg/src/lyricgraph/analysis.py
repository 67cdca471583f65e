"""Comparison tables and out-of-sample probing.

Covers bridge vs non-bridge metric means, threshold robustness across
quantiles, artist-level dispersion with a corpus rollup, and kNN majority-vote
assignment of new songs against a frozen corpus. All functions are pure; the
probe path never touches persisted artifacts.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .corpus import TextMetrics
from .embed import LineEmbeddingSet, SongVector, pool_song_vector
from .errors import DataValidationError
from .bridge import classify_bridges

log = logging.getLogger(__name__)

_METRIC_FIELDS = ("lexical_entropy", "line_repeat_ratio", "chorus_score")

PROBES_CSV_HEADER = "song_id,artist_id,community,confidence,boundary_score"


@dataclass(frozen=True)
class GroupComparison:
    n_bridge: int
    n_non_bridge: int
    bridge_means: dict[str, float]  # keyed by metric field
    non_bridge_means: dict[str, float]
    differences: dict[str, float]  # bridge - non_bridge


@dataclass(frozen=True)
class RobustnessRow:
    quantile: float
    n_bridges: int
    comparison: GroupComparison


@dataclass(frozen=True)
class ArtistRow:
    artist_id: str
    n_songs: int
    n_communities: int
    mean_boundary: float
    mean_entropy: float


@dataclass(frozen=True)
class CorpusSummary:
    n_songs: int
    n_artists: int
    n_communities: int
    median_communities_per_artist: float
    mean_communities_per_artist: float
    min_community_size: int
    median_community_size: int
    max_community_size: int


@dataclass(frozen=True)
class ProbeResult:
    song_id: str
    community: int
    confidence: float
    boundary_score: int
    neighbors: tuple[tuple[str, float], ...]  # (corpus song_id, cosine), nearest first


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def group_comparison(metrics: list[TextMetrics], bridge_flags: dict[str, bool]) -> GroupComparison:
    """Arithmetic metric means per group plus bridge-minus-rest differences."""
    missing = [m.song_id for m in metrics if m.song_id not in bridge_flags]
    if missing:
        raise DataValidationError(f"no bridge flag for song {missing[0]!r}")
    bridge = [m for m in metrics if bridge_flags[m.song_id]]
    rest = [m for m in metrics if not bridge_flags[m.song_id]]
    if not bridge:
        raise DataValidationError("bridge group is empty")
    if not rest:
        raise DataValidationError("non-bridge group is empty")
    b_means = {f: _mean([getattr(m, f) for m in bridge]) for f in _METRIC_FIELDS}
    r_means = {f: _mean([getattr(m, f) for m in rest]) for f in _METRIC_FIELDS}
    diffs = {f: b_means[f] - r_means[f] for f in _METRIC_FIELDS}
    return GroupComparison(
        n_bridge=len(bridge), n_non_bridge=len(rest),
        bridge_means=b_means, non_bridge_means=r_means, differences=diffs,
    )


def robustness_sweep(
    metrics: list[TextMetrics], betweenness: dict[str, float], q_list: list[float]
) -> list[RobustnessRow]:
    """One bridge-vs-rest comparison per quantile threshold."""
    missing = [m.song_id for m in metrics if m.song_id not in betweenness]
    if missing:
        raise DataValidationError(f"no betweenness for song {missing[0]!r}")
    scores = np.asarray([betweenness[m.song_id] for m in metrics])
    rows = []
    for q in sorted(q_list):
        mask, _ = classify_bridges(scores, q)
        flags = {m.song_id: bool(mask[i]) for i, m in enumerate(metrics)}
        comp = group_comparison(metrics, flags)
        rows.append(RobustnessRow(quantile=q, n_bridges=comp.n_bridge, comparison=comp))
    return rows


def artist_stats(
    node_ids: tuple[str, ...],
    assignment: np.ndarray,
    boundary: np.ndarray,
    metrics_by_song: dict[str, TextMetrics],
    artist_by_song: dict[str, str],
) -> tuple[list[ArtistRow], CorpusSummary]:
    """Per-artist aggregation plus the corpus-level rollup."""
    by_artist: dict[str, list[int]] = {}
    for i, song_id in enumerate(node_ids):
        artist = artist_by_song.get(song_id, "")
        if not artist:
            log.warning("song %r has no artist; excluded from artist table", song_id)
            continue
        if song_id not in metrics_by_song:
            raise DataValidationError(f"no metrics for song {song_id!r}")
        by_artist.setdefault(artist, []).append(i)

    rows = []
    communities_per_artist = []
    for artist in sorted(by_artist):
        idx = by_artist[artist]
        spanned = len({int(assignment[i]) for i in idx})
        communities_per_artist.append(spanned)
        rows.append(
            ArtistRow(
                artist_id=artist,
                n_songs=len(idx),
                n_communities=spanned,
                mean_boundary=_mean([float(boundary[i]) for i in idx]),
                mean_entropy=_mean([metrics_by_song[node_ids[i]].lexical_entropy for i in idx]),
            )
        )
    if not rows:
        raise DataValidationError("no songs with a known artist")

    sizes = sorted(np.bincount(assignment, minlength=int(assignment.max()) + 1).tolist())
    spans = sorted(communities_per_artist)
    summary = CorpusSummary(
        n_songs=len(node_ids),
        n_artists=len(rows),
        n_communities=int(assignment.max()) + 1,
        median_communities_per_artist=float(spans[(len(spans) - 1) // 2]),
        mean_communities_per_artist=_mean([float(s) for s in spans]),
        min_community_size=int(sizes[0]),
        median_community_size=int(sizes[(len(sizes) - 1) // 2]),
        max_community_size=int(sizes[-1]),
    )
    return rows, summary


# ---------------------------------------------------------------------------
# Out-of-sample probing
# ---------------------------------------------------------------------------


def probe_out_of_sample(
    new_song: LineEmbeddingSet,
    corpus_vectors: list[SongVector],
    assignment_by_song: dict[str, int],
    k: int,
) -> ProbeResult:
    """Assign a new song by majority vote over its k nearest corpus songs.

    Tie between modal communities goes to the community of the single nearest
    neighbor among the tied ones. Boundary score counts distinct communities
    among the k neighbors. Inputs are read only.
    """
    n = len(corpus_vectors)
    if k < 1:
        raise DataValidationError(f"k must be >= 1, got {k}")
    if n == 0:
        raise DataValidationError("empty corpus")
    if k >= n:
        raise DataValidationError(f"k={k} must be smaller than the corpus size {n}")
    ids = [sv.song_id for sv in corpus_vectors]
    if new_song.song_id in set(ids):
        raise DataValidationError(f"probe id {new_song.song_id!r} collides with a corpus song")
    missing = [i for i in ids if i not in assignment_by_song]
    if missing:
        raise DataValidationError(f"no community assignment for song {missing[0]!r}")

    pooled = pool_song_vector(new_song).v
    dim = corpus_vectors[0].v.shape[0]
    if pooled.shape[0] != dim:
        raise DataValidationError(f"probe dim {pooled.shape[0]} != corpus dim {dim}")

    X = np.stack([sv.v for sv in corpus_vectors])
    Xn = X / np.linalg.norm(X, axis=1, keepdims=True)
    pn = pooled / np.linalg.norm(pooled)
    sims = Xn @ pn
    ranked = np.lexsort((np.arange(n), -sims))[:k]

    neighbor_coms = [assignment_by_song[ids[i]] for i in ranked]
    votes: dict[int, int] = {}
    for c in neighbor_coms:
        votes[c] = votes.get(c, 0) + 1
    top = max(votes.values())
    tied = {c for c, cnt in votes.items() if cnt == top}
    if len(tied) == 1:
        community = next(iter(tied))
    else:
        community = next(c for c in neighbor_coms if c in tied)

    return ProbeResult(
        song_id=new_song.song_id,
        community=community,
        confidence=top / k,
        boundary_score=len(votes),
        neighbors=tuple((ids[i], float(sims[i])) for i in ranked),
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _comparison_fields(comp: GroupComparison) -> dict[str, dict[str, float]]:
    return {
        "bridge": {"n": comp.n_bridge, **comp.bridge_means},
        "non_bridge": {"n": comp.n_non_bridge, **comp.non_bridge_means},
        "difference": dict(comp.differences),
    }


def write_comparison_csv(comp: GroupComparison, path, sidecar_path) -> None:
    """Bridge/non-bridge rows at 3 decimals; full precision in the JSON sidecar."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "n"] + list(_METRIC_FIELDS))
        writer.writerow(
            ["non_bridge", comp.n_non_bridge] + [f"{comp.non_bridge_means[f]:.3f}" for f in _METRIC_FIELDS]
        )
        writer.writerow(["bridge", comp.n_bridge] + [f"{comp.bridge_means[f]:.3f}" for f in _METRIC_FIELDS])
        writer.writerow(["difference", ""] + [f"{comp.differences[f]:.3f}" for f in _METRIC_FIELDS])
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(_comparison_fields(comp), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_robustness_csv(rows: list[RobustnessRow], path, sidecar_path) -> None:
    header = ["quantile", "n_bridges"]
    for f in _METRIC_FIELDS:
        header += [f"{f}_bridge", f"{f}_non_bridge", f"{f}_diff"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cells = [f"{row.quantile:g}", row.n_bridges]
            for f in _METRIC_FIELDS:
                cells += [
                    f"{row.comparison.bridge_means[f]:.3f}",
                    f"{row.comparison.non_bridge_means[f]:.3f}",
                    f"{row.comparison.differences[f]:.3f}",
                ]
            writer.writerow(cells)
    sidecar = {f"{row.quantile:g}": _comparison_fields(row.comparison) for row in rows}
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_artists_csv(rows: list[ArtistRow], summary: CorpusSummary, path, summary_path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["artist_id", "n_songs", "n_communities", "mean_boundary", "mean_entropy"])
        for r in rows:
            writer.writerow([r.artist_id, r.n_songs, r.n_communities, f"{r.mean_boundary:.6f}", f"{r.mean_entropy:.6f}"])
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "n_songs", "n_artists", "n_communities",
                "median_communities_per_artist", "mean_communities_per_artist",
                "min_community_size", "median_community_size", "max_community_size",
            ]
        )
        writer.writerow(
            [
                summary.n_songs, summary.n_artists, summary.n_communities,
                f"{summary.median_communities_per_artist:g}",
                f"{summary.mean_communities_per_artist:.6f}",
                summary.min_community_size, summary.median_community_size, summary.max_community_size,
            ]
        )


def write_probes_csv(results: list[ProbeResult], artist_by_song: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROBES_CSV_HEADER.split(","))
        for r in results:
            writer.writerow(
                [
                    r.song_id,
                    artist_by_song.get(r.song_id, ""),
                    r.community,
                    f"{r.confidence:.6f}",
                    r.boundary_score,
                ]
            )
