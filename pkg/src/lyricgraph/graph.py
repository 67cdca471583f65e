"""Symmetrized cosine kNN similarity graph over song vectors.

Construction is exact: every pairwise cosine is considered, each node keeps
its k most similar neighbors (ties broken by smaller node index), and the
directed selections are unioned into an undirected weighted graph. Edge
weights are finalized with `embed.cosine_similarity`, so graph weights match
that function bit for bit.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .embed import SongVector, cosine_similarity
from .errors import DataValidationError, InternalInvariantError
from .util import iter_blocks, parallel_map

_CACHE_MAGIC = b"LYGRAPH\x01"
_KNN_BLOCK = 256  # rows per similarity block; fixed so results never depend on threads


@dataclass(frozen=True)
class SimilarityGraph:
    """Undirected weighted graph in CSR form; node id = index into node_ids."""

    node_ids: tuple[str, ...]
    indptr: np.ndarray  # int64, len n+1
    indices: np.ndarray  # int64, both directions of every edge, sorted per row
    weights: np.ndarray  # float64 aligned with indices
    k: int

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.indices.shape[0]) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def weight_row(self, u: int) -> np.ndarray:
        return self.weights[self.indptr[u] : self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Each undirected edge once, as (u, v, w) with u < v, in row order."""
        for u in range(self.n_nodes):
            row = self.neighbors(u)
            wts = self.weight_row(u)
            for v, w in zip(row, wts):
                if u < v:
                    yield u, int(v), float(w)

    def validate(self) -> None:
        """Full-scan check of the structural invariants; raises on violation."""
        n = self.n_nodes
        for u in range(n):
            row = self.neighbors(u)
            wts = self.weight_row(u)
            if np.any(row == u):
                raise InternalInvariantError(f"self-loop at node {u}")
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise InternalInvariantError(f"adjacency row {u} not strictly sorted")
            for v, w in zip(row, wts):
                vrow = self.neighbors(int(v))
                pos = np.searchsorted(vrow, u)
                if pos >= vrow.size or vrow[pos] != u:
                    raise InternalInvariantError(f"edge ({u},{v}) missing reverse direction")
                if self.weight_row(int(v))[pos] != w:
                    raise InternalInvariantError(f"edge ({u},{v}) has conflicting weights")
        if n > self.k:
            degrees = np.diff(self.indptr)
            if degrees.min() < self.k or degrees.max() > n - 1:
                raise InternalInvariantError("degree bounds violated")


def _stack_vectors(vectors: list[SongVector]) -> tuple[list[str], np.ndarray]:
    if len(vectors) < 2:
        raise DataValidationError("need at least 2 vectors")
    ids = [v.song_id for v in vectors]
    if len(set(ids)) != len(ids):
        raise DataValidationError("duplicate song_id among vectors")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise DataValidationError(f"mixed vector dimensions: {sorted(dims)}")
    return ids, np.stack([v.v for v in vectors])


def knn_edges(vectors: list[SongVector], k: int, threads: int = 1) -> list[tuple[int, int, float]]:
    """Directed top-k cosine edges: exactly k out-edges per node.

    Equal similarities rank by smaller node index. Weights come from
    `cosine_similarity` on the raw vectors, not from the blocked matmul used
    for candidate ranking, so both edge directions carry an identical value.
    """
    if k < 1:
        raise DataValidationError(f"k must be >= 1, got {k}")
    ids, X = _stack_vectors(vectors)
    n = X.shape[0]
    if k >= n:
        raise DataValidationError(f"k={k} must be smaller than n={n}")
    norms = np.linalg.norm(X, axis=1)
    Xn = X / norms[:, None]

    def select_block(block: range) -> list[np.ndarray]:
        sims = Xn[block.start : block.stop] @ Xn.T
        picks = []
        for offset, i in enumerate(block):
            row = sims[offset]
            row[i] = -np.inf
            order = np.argsort(-row, kind="stable")
            picks.append(order[:k])
        return picks

    blocks = list(iter_blocks(n, _KNN_BLOCK))
    picked = parallel_map(select_block, blocks, threads)

    pair_weight: dict[tuple[int, int], float] = {}
    edges: list[tuple[int, int, float]] = []
    i = 0
    for block_picks in picked:
        for row_picks in block_picks:
            for j in row_picks:
                j = int(j)
                key = (i, j) if i < j else (j, i)
                w = pair_weight.get(key)
                if w is None:
                    w = cosine_similarity(X[key[0]], X[key[1]])
                    pair_weight[key] = w
                edges.append((i, j, w))
            i += 1
    return edges


def symmetrize(node_ids: list[str], directed_edges: list[tuple[int, int, float]], k: int) -> SimilarityGraph:
    """Union directed selections into an undirected graph (edge if u chose v or v chose u)."""
    n = len(node_ids)
    pair_weight: dict[tuple[int, int], float] = {}
    for u, v, w in directed_edges:
        if u == v:
            raise InternalInvariantError(f"self-loop in directed edges at node {u}")
        key = (u, v) if u < v else (v, u)
        prev = pair_weight.get(key)
        if prev is None:
            pair_weight[key] = w
        elif prev != w:
            raise InternalInvariantError(f"conflicting weights for edge {key}: {prev!r} vs {w!r}")

    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (u, v), w in pair_weight.items():
        adjacency[u].append((v, w))
        adjacency[v].append((u, w))

    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(2 * len(pair_weight), dtype=np.int64)
    weights = np.empty(2 * len(pair_weight), dtype=np.float64)
    pos = 0
    for u in range(n):
        adjacency[u].sort(key=lambda e: e[0])
        for v, w in adjacency[u]:
            indices[pos] = v
            weights[pos] = w
            pos += 1
        indptr[u + 1] = pos
    return SimilarityGraph(node_ids=tuple(node_ids), indptr=indptr, indices=indices, weights=weights, k=k)


def build_knn_graph(vectors: list[SongVector], k: int, threads: int = 1) -> SimilarityGraph:
    ids, _ = _stack_vectors(vectors)
    return symmetrize(ids, knn_edges(vectors, k, threads), k)


# ---------------------------------------------------------------------------
# Export / import
# ---------------------------------------------------------------------------


def export_edges(graph: SimilarityGraph, path) -> None:
    """Edge list CSV: one `u_id,v_id,weight` row per undirected edge.

    Rows carry u_id < v_id lexicographically and are sorted, so export order
    is deterministic regardless of construction order.
    """
    rows = []
    for u, v, w in graph.edges():
        a, b = graph.node_ids[u], graph.node_ids[v]
        if b < a:
            a, b = b, a
        rows.append((a, b, w))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for a, b, w in rows:
            writer.writerow([a, b, f"{w:.6f}"])


def import_edges(path) -> list[tuple[str, str, float]]:
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if len(row) != 3:
                raise DataValidationError(f"{path}: bad edge row {row!r}")
            edges.append((row[0], row[1], float(row[2])))
    return edges


# ---------------------------------------------------------------------------
# Binary cache (versioned internal format)
# ---------------------------------------------------------------------------


def save_graph(graph: SimilarityGraph, path, source_digest: str = "") -> None:
    """Persist the graph plus the digest of the vectors it was built from."""
    ids_blob = "\n".join(graph.node_ids).encode("utf-8")
    digest_blob = source_digest.encode("ascii")
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(
            struct.pack(
                "<QQQHQ",
                graph.n_nodes,
                graph.k,
                graph.n_edges,
                len(digest_blob),
                len(ids_blob),
            )
        )
        fh.write(digest_blob)
        fh.write(ids_blob)
        fh.write(np.ascontiguousarray(graph.indptr, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(graph.indices, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(graph.weights, dtype="<f8").tobytes())


def load_graph(path) -> tuple[SimilarityGraph, str]:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise DataValidationError(f"{path}: not a graph cache (bad magic)")
        n, k, n_edges, digest_len, ids_len = struct.unpack("<QQQHQ", fh.read(34))
        source_digest = fh.read(digest_len).decode("ascii")
        node_ids = tuple(fh.read(ids_len).decode("utf-8").split("\n")) if ids_len else ()
        indptr = np.frombuffer(fh.read(8 * (n + 1)), dtype="<i8").astype(np.int64)
        indices = np.frombuffer(fh.read(8 * 2 * n_edges), dtype="<i8").astype(np.int64)
        weights = np.frombuffer(fh.read(8 * 2 * n_edges), dtype="<f8").astype(np.float64)
    if len(node_ids) != n or indptr.shape[0] != n + 1:
        raise DataValidationError(f"{path}: truncated graph cache")
    graph = SimilarityGraph(node_ids=node_ids, indptr=indptr, indices=indices, weights=weights, k=int(k))
    return graph, source_digest
