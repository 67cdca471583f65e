"""Betweenness centrality, community boundary scores, and bridge flags.

Betweenness accumulates shortest-path dependencies per source node over the
undirected graph, excluding endpoints, halving the double count, and
normalizing by (n-1)(n-2)/2. Unweighted mode counts hops; weighted mode runs
Dijkstra over the distance transform d = 1 - w, so heavier (more similar)
edges are shorter. Sources are processed in fixed-size index blocks and partial
sums are reduced in block order, so results are independent of thread count.
"""

from __future__ import annotations

import csv
import heapq
import logging

import numpy as np

from .errors import DataValidationError, InternalInvariantError
from .graph import SimilarityGraph
from .util import iter_blocks, pairwise_sum, parallel_map

log = logging.getLogger(__name__)

_SOURCE_BLOCK = 128
_DEFAULT_QUANTILES = (0.90, 0.95, 0.98)

BRIDGES_CSV_HEADER = "song_id,betweenness,boundary_score,is_bridge_q90,is_bridge_q95,is_bridge_q98"


def _bfs_accumulate(indptr: np.ndarray, indices: np.ndarray, sources: range, n: int) -> np.ndarray:
    """Hop-count Brandes accumulation for a block of sources."""
    acc = np.zeros(n)
    for s in sources:
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        levels = [np.asarray([s], dtype=np.int64)]
        frontier = levels[0]
        depth = 0
        while frontier.size:
            counts = indptr[frontier + 1] - indptr[frontier]
            total = int(counts.sum())
            if total == 0:
                break
            # gather all neighbor slices of the frontier into one flat array
            starts = indptr[frontier]
            offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
            flat = offsets + np.arange(total)
            nbrs = indices[flat]
            src = np.repeat(frontier, counts)
            depth += 1
            fresh = dist[nbrs] == -1
            dist[nbrs[fresh]] = depth
            on_level = dist[nbrs] == depth
            np.add.at(sigma, nbrs[on_level], sigma[src[on_level]])
            frontier = np.unique(nbrs[fresh])
            levels.append(frontier)
        delta = np.zeros(n)
        for level in reversed(levels[1:]):
            counts = indptr[level + 1] - indptr[level]
            total = int(counts.sum())
            if total == 0:
                continue
            starts = indptr[level]
            offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
            flat = offsets + np.arange(total)
            nbrs = indices[flat]
            src = np.repeat(level, counts)
            mask = dist[nbrs] == dist[src] - 1
            contrib = sigma[nbrs[mask]] / sigma[src[mask]] * (1.0 + delta[src[mask]])
            np.add.at(delta, nbrs[mask], contrib)
        delta[s] = 0.0
        acc += delta
    return acc


def _dijkstra_accumulate(
    indptr: np.ndarray, indices: np.ndarray, lengths: np.ndarray, sources: range, n: int
) -> np.ndarray:
    """Weighted Brandes accumulation (Dijkstra order) for a block of sources."""
    acc = np.zeros(n)
    for s in sources:
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, np.inf)
        dist[s] = 0.0
        done = np.zeros(n, dtype=bool)
        order: list[int] = []
        counter = 0
        heap: list[tuple[float, int, int]] = [(0.0, counter, s)]
        while heap:
            d, _, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            order.append(u)
            lo, hi = indptr[u], indptr[u + 1]
            for v, length in zip(indices[lo:hi], lengths[lo:hi]):
                v = int(v)
                nd = d + float(length)
                if nd < dist[v]:
                    dist[v] = nd
                    sigma[v] = sigma[u]
                    counter += 1
                    heapq.heappush(heap, (nd, counter, v))
                elif nd == dist[v] and not done[v]:
                    sigma[v] += sigma[u]
        delta = np.zeros(n)
        for v in reversed(order):
            if v == s:
                continue
            lo, hi = indptr[v], indptr[v + 1]
            for u, length in zip(indices[lo:hi], lengths[lo:hi]):
                u = int(u)
                if dist[u] + float(length) == dist[v]:
                    delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v])
        delta[s] = 0.0
        acc += delta
    return acc


def betweenness_centrality(graph: SimilarityGraph, use_weights: bool = False, threads: int = 1) -> np.ndarray:
    """Normalized betweenness per node index, in [0, 1]."""
    n = graph.n_nodes
    if n < 3:
        raise DataValidationError("betweenness needs at least 3 nodes")
    indptr, indices = graph.indptr, graph.indices
    if use_weights:
        lengths = 1.0 - graph.weights
        if np.any(lengths < 0):
            raise DataValidationError("weighted betweenness requires edge weights <= 1")
        worker = lambda blk: _dijkstra_accumulate(indptr, indices, lengths, blk, n)
    else:
        worker = lambda blk: _bfs_accumulate(indptr, indices, blk, n)
    blocks = iter_blocks(n, _SOURCE_BLOCK)
    partials = parallel_map(worker, blocks, threads)
    raw = pairwise_sum(partials)
    raw /= 2.0  # each unordered pair contributed from both endpoints
    scale = (n - 1) * (n - 2) / 2.0
    out = raw / scale
    if np.any(out < -1e-12) or np.any(out > 1.0 + 1e-12):
        raise InternalInvariantError("betweenness outside [0, 1] after normalization")
    return np.clip(out, 0.0, 1.0)


def boundary_scores(graph: SimilarityGraph, assignment: np.ndarray) -> np.ndarray:
    """Distinct communities among each node's neighbors (own community only via neighbors)."""
    n = graph.n_nodes
    assignment = np.asarray(assignment)
    if assignment.shape[0] != n:
        raise DataValidationError("assignment does not cover all nodes")
    counts = np.diff(graph.indptr)
    if np.any(counts == 0):
        bad = int(np.argmax(counts == 0))
        raise DataValidationError(f"node {bad} has no neighbors")
    n_com = int(assignment.max()) + 1
    row_of = np.repeat(np.arange(n), counts)
    key = row_of * n_com + assignment[graph.indices]
    rows = np.unique(key) // n_com
    return np.bincount(rows, minlength=n).astype(np.int64)


def boundary_score(graph: SimilarityGraph, assignment: np.ndarray, node: int) -> int:
    return int(boundary_scores(graph, assignment)[node])


def classify_bridges(betweenness: np.ndarray, quantile: float) -> tuple[np.ndarray, float]:
    """(is_bridge mask, threshold); bridge means score >= the quantile threshold."""
    if not 0.0 < quantile < 1.0:
        raise DataValidationError(f"quantile must be in (0, 1), got {quantile}")
    scores = np.asarray(betweenness, dtype=float)
    if scores.size == 0:
        raise DataValidationError("no betweenness scores to classify")
    threshold = float(np.quantile(scores, quantile))
    if float(scores.min()) == float(scores.max()):
        log.warning("degenerate betweenness distribution: all %d scores equal, every node flagged", scores.size)
    return scores >= threshold, threshold


def write_bridges_csv(
    node_ids: tuple[str, ...],
    betweenness: np.ndarray,
    boundary: np.ndarray,
    path,
    quantiles: tuple[float, ...] = _DEFAULT_QUANTILES,
) -> dict[str, float]:
    """Write per-node bridge table; returns the threshold used per quantile."""
    flags = {}
    thresholds = {}
    for q in quantiles:
        mask, thr = classify_bridges(betweenness, q)
        col = f"is_bridge_q{q * 100:g}"
        flags[col] = mask
        thresholds[col] = thr
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["song_id", "betweenness", "boundary_score"] + list(flags))
        for i, song_id in enumerate(node_ids):
            row = [song_id, f"{betweenness[i]:.10g}", str(int(boundary[i]))]
            row += [str(int(flags[col][i])) for col in flags]
            writer.writerow(row)
    return thresholds


def read_bridges_csv(path) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for row in reader:
            if not row:
                continue
            rec = dict(zip(header, row))
            out[rec["song_id"]] = {
                key: float(val) for key, val in rec.items() if key != "song_id"
            }
    return out
