"""Weighted modularity, Louvain community detection, and resolution sweeps.

Modularity uses edge weights directly (negative cosines clamped to zero, with
a log notice) and a resolution parameter scaling the null-model term. Louvain
is the classic two-phase greedy scheme: seed-shuffled local moving until no
single-node move improves modularity, then community aggregation, repeated
until the modularity gain drops below 1e-9. Identical (graph, resolution,
seed) always yields the identical assignment.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass
from math import fsum

import numpy as np

from .errors import DataValidationError
from .graph import SimilarityGraph
from .util import parallel_map

log = logging.getLogger(__name__)

_GAIN_TOL = 1e-9
_MAX_LEVELS = 100


@dataclass(frozen=True)
class Partition:
    """Community assignment per node plus the settings that produced it."""

    assignment: np.ndarray  # int64 community id per node index
    n_communities: int
    resolution: float
    seed: int
    modularity: float

    def __post_init__(self):
        labels = np.unique(self.assignment)
        if labels.size != self.n_communities or labels[0] != 0 or labels[-1] != self.n_communities - 1:
            raise DataValidationError("community ids must be contiguous 0..n_communities-1 and non-empty")

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_communities)


@dataclass(frozen=True)
class SweepRow:
    resolution: float
    repeat: int
    seed: int
    n_communities: int
    min_size: int
    median_size: int
    max_size: int
    modularity: float
    stability_ari: float  # mean pairwise ARI across this resolution's repeats


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]


def _clamped_weights(graph: SimilarityGraph) -> np.ndarray:
    w = graph.weights
    if np.any(w < 0):
        n_neg = int(np.count_nonzero(w < 0))
        log.info("clamping %d negative edge weights to 0 for modularity", n_neg)
        w = np.maximum(w, 0.0)
    return w


def binarized(graph: SimilarityGraph) -> SimilarityGraph:
    """Same topology with every positive weight replaced by 1.0."""
    return SimilarityGraph(
        node_ids=graph.node_ids,
        indptr=graph.indptr,
        indices=graph.indices,
        weights=(graph.weights > 0).astype(float),
        k=graph.k,
    )


def modularity(graph: SimilarityGraph, assignment: np.ndarray, resolution: float) -> float:
    """Weighted modularity Q of an assignment at the given resolution."""
    if resolution <= 0:
        raise DataValidationError(f"resolution must be positive, got {resolution}")
    n = graph.n_nodes
    assignment = np.asarray(assignment)
    if assignment.shape[0] != n:
        raise DataValidationError("assignment does not cover all nodes")
    weights = _clamped_weights(graph)
    m2 = float(weights.sum())  # both edge directions, = 2m
    if m2 <= 0.0:
        raise DataValidationError("graph has no positive-weight edges")
    row_of = np.repeat(np.arange(n), np.diff(graph.indptr))
    same = assignment[row_of] == assignment[graph.indices]
    n_com = int(assignment.max()) + 1
    internal = np.bincount(assignment[row_of[same]], weights=weights[same], minlength=n_com)
    degrees = np.zeros(n)
    np.add.at(degrees, row_of, weights)
    degree_c = np.bincount(assignment, weights=degrees, minlength=n_com)
    q = float(np.sum(internal / m2) - resolution * np.sum((degree_c / m2) ** 2))
    return q


# ---------------------------------------------------------------------------
# Louvain
# ---------------------------------------------------------------------------


def _one_level(neigh: list[dict[int, float]], loops: list[float], gamma: float, order: np.ndarray) -> list[int]:
    """Greedy local moving; returns the (non-contiguous) community per node."""
    n = len(neigh)
    degrees = [sum(neigh[i].values()) + 2.0 * loops[i] for i in range(n)]
    m2 = sum(degrees)
    com = list(range(n))
    deg_c = degrees[:]
    for _ in range(1000):  # safety cap; convergence is the normal exit
        moves = 0
        for i in order:
            i = int(i)
            ci = com[i]
            ki = degrees[i]
            wcom: dict[int, float] = {}
            for j, w in neigh[i].items():
                cj = com[j]
                wcom[cj] = wcom.get(cj, 0.0) + w
            deg_c[ci] -= ki
            best_c = ci
            best_gain = wcom.get(ci, 0.0) - gamma * ki * deg_c[ci] / m2
            for c in sorted(wcom):
                if c == ci:
                    continue
                gain = wcom[c] - gamma * ki * deg_c[c] / m2
                if gain > best_gain:
                    best_c, best_gain = c, gain
            com[i] = best_c
            deg_c[best_c] += ki
            if best_c != ci:
                moves += 1
        if moves == 0:
            break
    return com


def _aggregate(
    neigh: list[dict[int, float]], loops: list[float], com: list[int]
) -> tuple[list[dict[int, float]], list[float], list[int]]:
    """Collapse communities into super-nodes; intra weight becomes a self-loop."""
    labels = sorted(set(com))
    relabel = {old: new for new, old in enumerate(labels)}
    mapped = [relabel[c] for c in com]
    n_new = len(labels)
    new_neigh: list[dict[int, float]] = [{} for _ in range(n_new)]
    new_loops = [0.0] * n_new
    for i, d in enumerate(neigh):
        ci = mapped[i]
        new_loops[ci] += loops[i]
        for j, w in d.items():
            cj = mapped[j]
            if ci == cj:
                new_loops[ci] += w / 2.0  # each undirected pair visited twice
            else:
                new_neigh[ci][cj] = new_neigh[ci].get(cj, 0.0) + w
    return new_neigh, new_loops, mapped


def louvain(graph: SimilarityGraph, resolution: float, seed: int) -> Partition:
    """Two-phase Louvain maximization of resolution-scaled modularity.

    Final community ids are contiguous and ordered by size descending (ties:
    smaller lowest member index first).
    """
    n = graph.n_nodes
    if n < 2:
        raise DataValidationError("louvain needs at least 2 nodes")
    if resolution <= 0:
        raise DataValidationError(f"resolution must be positive, got {resolution}")
    weights = _clamped_weights(graph)
    if float(weights.sum()) <= 0.0:
        raise DataValidationError("graph has no positive-weight edges")

    neigh: list[dict[int, float]] = []
    for u in range(n):
        lo, hi = graph.indptr[u], graph.indptr[u + 1]
        neigh.append({int(v): float(w) for v, w in zip(graph.indices[lo:hi], weights[lo:hi]) if w > 0.0})
    loops = [0.0] * n

    rng = np.random.default_rng(seed)
    node_to_current = np.arange(n)  # original node -> current super-node
    best_q = modularity(graph, node_to_current.copy(), resolution)  # singleton baseline
    for _ in range(_MAX_LEVELS):
        order = rng.permutation(len(neigh))
        com = _one_level(neigh, loops, resolution, order)
        neigh, loops, mapped = _aggregate(neigh, loops, com)
        node_to_current = np.asarray([mapped[s] for s in node_to_current])
        q = modularity(graph, node_to_current, resolution)
        if q - best_q < _GAIN_TOL:
            best_q = max(best_q, q)
            break
        best_q = q
        if len(neigh) == 1:
            break

    assignment = _canonical_order(node_to_current, n)
    n_communities = int(assignment.max()) + 1
    return Partition(
        assignment=assignment,
        n_communities=n_communities,
        resolution=resolution,
        seed=seed,
        modularity=modularity(graph, assignment, resolution),
    )


def _canonical_order(assignment: np.ndarray, n: int) -> np.ndarray:
    """Relabel communities 0.. by descending size; ties by smallest member index."""
    labels, first_idx = np.unique(assignment, return_index=True)
    sizes = Counter(int(c) for c in assignment)
    first_of = {int(c): int(i) for c, i in zip(labels, first_idx)}
    order = sorted((int(c) for c in labels), key=lambda c: (-sizes[c], first_of[c]))
    relabel = {old: new for new, old in enumerate(order)}
    return np.asarray([relabel[int(c)] for c in assignment], dtype=np.int64)


# ---------------------------------------------------------------------------
# Partition comparison and sweeps
# ---------------------------------------------------------------------------


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-adjusted agreement between two labelings of the same nodes."""
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise DataValidationError("labelings must have equal length")
    n = len(a)
    if n < 2:
        return 1.0
    pairs = n * (n - 1) / 2.0
    sum_ab = sum(c * (c - 1) // 2 for c in Counter(zip(a, b)).values())
    sum_a = sum(c * (c - 1) // 2 for c in Counter(a).values())
    sum_b = sum(c * (c - 1) // 2 for c in Counter(b).values())
    expected = sum_a * sum_b / pairs
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return (sum_ab - expected) / (max_index - expected)


def community_size_stats(partition: Partition) -> tuple[int, int, int, list[int]]:
    """(min, median, max, sizes); median is the lower-middle element for even counts."""
    sizes = [int(s) for s in partition.sizes()]
    ordered = sorted(sizes)
    median = ordered[(len(ordered) - 1) // 2]
    return ordered[0], median, ordered[-1], sizes


def resolution_sweep(
    graph: SimilarityGraph,
    resolutions: list[float],
    seed: int,
    repeats: int = 1,
    threads: int = 1,
) -> SweepReport:
    """Run louvain per (resolution, repeat); stability is mean pairwise ARI."""
    if not resolutions:
        raise DataValidationError("need at least one resolution")
    if repeats < 1:
        raise DataValidationError("repeats must be >= 1")
    grid = [(res, rep) for res in sorted(resolutions) for rep in range(repeats)]
    partitions = parallel_map(lambda rr: louvain(graph, rr[0], seed + rr[1]), grid, threads)

    rows: list[SweepRow] = []
    for res in sorted(resolutions):
        group = [p for (r, _), p in zip(grid, partitions) if r == res]
        aris = [
            adjusted_rand_index(group[i].assignment, group[j].assignment)
            for i in range(len(group))
            for j in range(i + 1, len(group))
        ]
        stability = float(np.mean(aris)) if aris else 1.0
        for rep, part in enumerate(group):
            lo, med, hi, _ = community_size_stats(part)
            rows.append(
                SweepRow(
                    resolution=res,
                    repeat=rep,
                    seed=part.seed,
                    n_communities=part.n_communities,
                    min_size=lo,
                    median_size=med,
                    max_size=hi,
                    modularity=part.modularity,
                    stability_ari=stability,
                )
            )
    return SweepReport(rows=tuple(rows))


def select_stable_resolution(report: SweepReport) -> float | None:
    """Smallest swept resolution whose mean community count sits within +-2
    of the modal count across its repeats.  None when no resolution qualifies."""
    by_res: dict[float, list[int]] = {}
    for row in report.rows:
        by_res.setdefault(row.resolution, []).append(row.n_communities)
    for res in sorted(by_res):
        counts = by_res[res]
        # modal count; ties broken toward the smaller count
        mode = max(sorted(set(counts)), key=counts.count)
        mode = min(c for c in counts if counts.count(c) == counts.count(mode))
        if abs(fsum(counts) / len(counts) - mode) <= 2.0:
            return res
    return None


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def write_partition_csv(partition: Partition, node_ids: tuple[str, ...], path, meta_path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["song_id", "community_id"])
        for song_id, com in zip(node_ids, partition.assignment):
            writer.writerow([song_id, int(com)])
    meta = {
        "resolution": partition.resolution,
        "seed": partition.seed,
        "modularity": partition.modularity,
        "n_communities": partition.n_communities,
    }
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_partition_csv(path) -> dict[str, int]:
    out: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row:
                out[row[0]] = int(row[1])
    return out


def write_sweep_csv(report: SweepReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["resolution", "repeat", "seed", "n_communities", "min_size", "median_size", "max_size", "modularity", "stability_ari"]
        )
        for r in report.rows:
            writer.writerow(
                [
                    f"{r.resolution:g}",
                    r.repeat,
                    r.seed,
                    r.n_communities,
                    r.min_size,
                    r.median_size,
                    r.max_size,
                    f"{r.modularity:.6f}",
                    f"{r.stability_ari:.6f}",
                ]
            )
