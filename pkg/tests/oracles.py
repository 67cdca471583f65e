"""Independent reference implementations used to cross-check the package.

Everything here deliberately has a different algorithmic shape from the code
under test: Floyd-Warshall path counting instead of Brandes, exhaustive
partition enumeration instead of greedy moving, dense-matrix modularity
instead of CSR bincounts, per-pair dots instead of blocked matmuls. Agreement
between routes is the point; these are slow and only run at test sizes.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter

import numpy as np

from lyricgraph.embed import cosine_similarity
from lyricgraph.graph import SimilarityGraph, symmetrize

# ---------------------------------------------------------------------------
# Shortest paths and betweenness (Floyd-Warshall with path counting)
# ---------------------------------------------------------------------------


def fw_shortest_paths(dense_lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs distances and shortest-path counts.

    ``dense_lengths`` is symmetric with np.inf where there is no edge. Each
    shortest path is counted exactly once, decomposed by its largest
    intermediate vertex; a direct edge counts at initialization. Exactness of
    the equal-length branch relies on edge lengths that add without rounding
    (use dyadic weights).
    """
    n = dense_lengths.shape[0]
    dist = dense_lengths.copy().astype(np.float64)
    cnt = np.where(np.isfinite(dense_lengths), 1.0, 0.0)
    np.fill_diagonal(dist, 0.0)
    np.fill_diagonal(cnt, 1.0)
    off = ~np.eye(n, dtype=bool)
    for m in range(n):
        alt = dist[:, m][:, None] + dist[m, :][None, :]
        through = cnt[:, m][:, None] * cnt[m, :][None, :]
        active = off.copy()
        active[m, :] = False
        active[:, m] = False
        shorter = active & (alt < dist)
        equal = active & np.isfinite(alt) & (alt == dist)
        cnt[shorter] = through[shorter]
        dist[shorter] = alt[shorter]
        cnt[equal] += through[equal]
    return dist, cnt


def dense_lengths(graph: SimilarityGraph, use_weights: bool) -> np.ndarray:
    n = graph.n_nodes
    dense = np.full((n, n), np.inf)
    for i in range(n):
        lo, hi = int(graph.indptr[i]), int(graph.indptr[i + 1])
        cols = graph.indices[lo:hi]
        dense[i, cols] = (1.0 - graph.weights[lo:hi]) if use_weights else 1.0
    return dense


def fw_betweenness(graph: SimilarityGraph, use_weights: bool) -> np.ndarray:
    """Normalized betweenness (endpoints excluded, pairs unordered)."""
    n = graph.n_nodes
    dist, cnt = fw_shortest_paths(dense_lengths(graph, use_weights))
    bc = np.zeros(n)
    for s in range(n):
        for t in range(s + 1, n):
            if not np.isfinite(dist[s, t]):
                continue
            on = dist[s, :] + dist[:, t] == dist[s, t]
            on[s] = on[t] = False
            bc[on] += cnt[s, on] * cnt[on, t] / cnt[s, t]
    return bc / ((n - 1) * (n - 2) / 2.0)


# ---------------------------------------------------------------------------
# Partitions and modularity
# ---------------------------------------------------------------------------


def all_partitions(n: int):
    """Every partition of range(n) as a canonical assignment array.

    Iterates restricted growth strings: a[0] == 0 and
    a[i] <= max(a[:i]) + 1, which is exactly first-occurrence labeling.
    """
    a = [0] * n
    while True:
        yield np.asarray(a, dtype=np.int64)
        i = n - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
            i -= 1
        else:
            return


def _dense_adjacency(graph: SimilarityGraph) -> np.ndarray:
    n = graph.n_nodes
    a = np.zeros((n, n))
    for i in range(n):
        lo, hi = int(graph.indptr[i]), int(graph.indptr[i + 1])
        a[i, graph.indices[lo:hi]] = np.maximum(graph.weights[lo:hi], 0.0)
    return a


def _q_from_dense(a: np.ndarray, assignment: np.ndarray, resolution: float) -> float:
    k = a.sum(axis=1)
    m2 = a.sum()
    same = np.asarray(assignment)[:, None] == np.asarray(assignment)[None, :]
    return float((a - resolution * np.outer(k, k) / m2)[same].sum() / m2)


def flat_modularity(graph: SimilarityGraph, assignment: np.ndarray, resolution: float = 1.0) -> float:
    """Dense-matrix modularity over all same-community ordered pairs (i == j included)."""
    return _q_from_dense(_dense_adjacency(graph), assignment, resolution)


def best_partition_exhaustive(graph: SimilarityGraph, resolution: float = 1.0) -> tuple[float, np.ndarray]:
    """Global modularity optimum by brute force; only sane for n <= 8."""
    a = _dense_adjacency(graph)
    kk = np.outer(a.sum(axis=1), a.sum(axis=1))
    m2 = a.sum()
    gain = (a - resolution * kk / m2) / m2  # Q = gain summed over same-community pairs
    best_q = -np.inf
    best = None
    for assignment in all_partitions(graph.n_nodes):
        same = assignment[:, None] == assignment[None, :]
        q = float(gain[same].sum())
        if q > best_q:
            best_q = q
            best = assignment.copy()
    return best_q, best


# ---------------------------------------------------------------------------
# kNN selection
# ---------------------------------------------------------------------------


def brute_knn_edges(vectors, k: int) -> list[tuple[int, int, float]]:
    """Directed top-k by per-pair dot products and an explicit (-sim, j) sort."""
    mat = np.stack([v.v for v in vectors])
    norms = np.linalg.norm(mat, axis=1)
    unit = mat / norms[:, None]
    n = mat.shape[0]
    out = []
    for i in range(n):
        sims = {j: float(np.dot(unit[i], unit[j])) for j in range(n) if j != i}
        order = sorted(sims, key=lambda j: (-sims[j], j))
        for j in order[:k]:
            out.append((i, j, cosine_similarity(mat[i], mat[j])))
    return out


# ---------------------------------------------------------------------------
# Lexical metrics recount (straight from raw text)
# ---------------------------------------------------------------------------


def recount_metrics(raw_text: str) -> dict:
    """Re-derive every per-song metric with flat code: re-segment, pool
    tokens, count. Entropy terms are summed over ascending counts so equality
    with the package is exact rather than approximate."""
    lines = []
    for piece in raw_text.splitlines():
        norm = " ".join(unicodedata.normalize("NFC", piece).split())
        if norm:
            lines.append(norm)
    tokens: list[str] = []
    for line in lines:
        tokens.extend(line.casefold().split())
    total = len(tokens)
    entropy = -sum(
        (c / total) * math.log2(c / total) for c in sorted(Counter(tokens).values())
    )
    line_keys = [line.casefold() for line in lines]
    return {
        "n_lines": len(lines),
        "n_tokens": total,
        "n_chars": sum(len(line) for line in lines),
        "lexical_entropy": max(entropy, 0.0),
        "line_repeat_ratio": 1.0 - len(set(line_keys)) / len(lines),
        "chorus_score": max(Counter(line_keys).values()) / len(lines),
    }


# ---------------------------------------------------------------------------
# Quantiles
# ---------------------------------------------------------------------------


def quantile_type7(values, q: float) -> float:
    """Linear-interpolation quantile (numpy's default), written by hand."""
    xs = sorted(float(v) for v in values)
    pos = q * (len(xs) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])


# ---------------------------------------------------------------------------
# Random test graphs
# ---------------------------------------------------------------------------


def random_graph_edges(n: int, rng: np.random.Generator, extra_edge_prob: float = 0.15):
    """Connected random graph with dyadic weights t/64, t in 1..63.

    Dyadic weights keep 1 - w and its running sums exactly representable, so
    equal-shortest-path comparisons agree bit-for-bit between Dijkstra and
    Floyd-Warshall instead of depending on summation order.
    """
    edges: dict[tuple[int, int], int] = {}
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):  # spanning path keeps it connected
        i, j = int(min(a, b)), int(max(a, b))
        edges[(i, j)] = int(rng.integers(1, 64))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges[(i, j)] = int(rng.integers(1, 64))
    return [(i, j, t / 64.0) for (i, j), t in sorted(edges.items())]


def graph_from_edges(edge_list, n: int | None = None, k: int = 1) -> SimilarityGraph:
    """SimilarityGraph from an undirected (i, j, w) list; ids are v000, v001, ..."""
    if n is None:
        n = 1 + max(max(i, j) for i, j, _ in edge_list)
    ids = [f"v{i:03d}" for i in range(n)]
    directed = []
    for i, j, w in edge_list:
        directed.append((int(i), int(j), float(w)))
        directed.append((int(j), int(i), float(w)))
    return symmetrize(ids, directed, k=k)


def clique_edges(members, weight: float = 1.0):
    members = list(members)
    return [
        (members[a], members[b], weight)
        for a in range(len(members))
        for b in range(a + 1, len(members))
    ]
