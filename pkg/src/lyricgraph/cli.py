"""Command-line pipeline over composable stages with a merged run manifest.

Each stage writes its artifacts into a run directory plus a manifest entry
(resolved config, input digests, output digests, counts). Given identical
config and inputs, every artifact is byte-identical across reruns and thread
counts, and running subcommands one by one produces exactly the same files as
`pipeline`. The probe subcommand never rewrites existing run artifacts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import analysis, bridge, community, corpus, embed, graph as graphmod
from .errors import DataValidationError, InternalInvariantError, LyricGraphError
from .util import sha256_file

log = logging.getLogger(__name__)

SONGS_FILE = "songs.jsonl"
METRICS_FILE = "metrics.csv"
REJECTIONS_FILE = "rejections.log"
EMBEDDINGS_FILE = "embeddings.jsonl"
GRAPH_FILE = "graph.bin"
EDGES_FILE = "edges.csv"
PARTITION_FILE = "partition.csv"
PARTITION_META_FILE = "partition_meta.json"
SWEEP_FILE = "sweep.csv"
BRIDGES_FILE = "bridges.csv"
THRESHOLDS_FILE = "bridge_thresholds.json"
COMPARISON_FILE = "comparison.csv"
COMPARISON_FULL_FILE = "comparison_full.json"
ROBUSTNESS_FILE = "robustness.csv"
ROBUSTNESS_FULL_FILE = "robustness_full.json"
ARTISTS_FILE = "artists.csv"
CORPUS_SUMMARY_FILE = "corpus_summary.csv"
PROBES_FILE = "probes.csv"
MANIFEST_FILE = "manifest.json"

DEFAULTS = {
    "dim": 64,
    "embed_seed": 7,
    "k": 15,
    "resolution": 1.0,
    "seed": 7,
    "quantiles": "0.90,0.95,0.98",
    "quantile": 0.95,
    "repeats": 3,
    "weighted": False,
    "binarize": False,
}


def _resolve(args, cfg: dict, key: str):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        return cfg[key]
    return DEFAULTS[key]


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, int(args.threads))
    return os.cpu_count() or 1


def _parse_quantiles(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(piece) for piece in str(text).split(","))
    except ValueError:
        raise DataValidationError(f"unparseable quantile list {text!r}")
    for q in values:
        if not 0.0 < q < 1.0:
            raise DataValidationError(f"quantile {q} outside (0, 1)")
    if not values:
        raise DataValidationError("empty quantile list")
    return values


def _out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _path(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, name)


def _require(path: str, producer: str) -> str:
    if not os.path.exists(path):
        raise DataValidationError(f"missing artifact {path}; run `{producer}` first")
    return path


def _update_manifest(out_dir: str, stage: str, entry: dict) -> None:
    path = _path(out_dir, MANIFEST_FILE)
    manifest = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    manifest[stage] = entry
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_manifest(out_dir: str) -> dict:
    path = _require(_path(out_dir, MANIFEST_FILE), "pipeline")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _input_ref(path: str, out_dir: str) -> dict:
    """Digest plus a path that stays stable across run directories.

    Files inside the run directory are recorded relative to it so two runs
    with identical inputs produce byte-identical manifests; external paths
    are recorded as passed.
    """
    rel = os.path.relpath(str(path), out_dir)
    recorded = str(path) if rel.startswith("..") or os.path.isabs(rel) else rel
    return {"path": recorded, "sha256": sha256_file(path)}


def _resolve_input_path(recorded: str, out_dir: str) -> str:
    if os.path.isabs(recorded) or os.path.exists(recorded):
        return recorded
    return _path(out_dir, recorded)


def _output_digests(out_dir: str, names: list[str]) -> dict:
    return {name: sha256_file(_path(out_dir, name)) for name in names}


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def stage_ingest(corpus_path: str, out_dir: str) -> None:
    songs, rejections = corpus.load_corpus(corpus_path)
    if not songs:
        raise DataValidationError(f"{corpus_path}: no valid songs")
    for rej in rejections:
        log.warning("rejected record %d (%s): %s", rej.ordinal, rej.song_id or "<no id>", rej.reason)
    metrics = [corpus.compute_text_metrics(s) for s in songs]
    artist_by_song = {s.song_id: s.artist_id for s in songs}
    corpus.write_songs_file(songs, _path(out_dir, SONGS_FILE))
    corpus.write_metrics_csv(metrics, artist_by_song, _path(out_dir, METRICS_FILE))
    corpus.write_rejection_log(rejections, _path(out_dir, REJECTIONS_FILE))
    _update_manifest(
        out_dir,
        "ingest",
        {
            "config": {"corpus": str(corpus_path)},
            "inputs": {"corpus": _input_ref(corpus_path, out_dir)},
            "outputs": _output_digests(out_dir, [SONGS_FILE, METRICS_FILE, REJECTIONS_FILE]),
            "counts": {"n_songs": len(songs), "n_rejected": len(rejections)},
        },
    )
    log.info("ingest: %d songs, %d rejected", len(songs), len(rejections))


def stage_embed_toy(out_dir: str, dim: int, seed: int, corpus_path: str | None = None, output: str | None = None) -> str:
    src = corpus_path or _require(_path(out_dir, SONGS_FILE), "ingest")
    songs, rejections = corpus.load_corpus(src)
    if rejections:
        raise DataValidationError(f"{src}: {len(rejections)} invalid records in embedding input")
    if not songs:
        raise DataValidationError(f"{src}: no songs to embed")
    sets = [embed.toy_embed_song(s.song_id, list(s.lines), dim, seed) for s in songs]
    model_name = f"toy-blake2b-d{dim}-s{seed}"
    dest = output or _path(out_dir, EMBEDDINGS_FILE)
    embed.save_embeddings(sets, dest, model_name)
    if output is None:
        _update_manifest(
            out_dir,
            "embed",
            {
                "config": {"dim": dim, "seed": seed, "model_name": model_name},
                "inputs": {"songs": _input_ref(src, out_dir)},
                "outputs": _output_digests(out_dir, [EMBEDDINGS_FILE]),
                "counts": {"n_songs": len(sets), "n_lines": sum(s.n_lines for s in sets)},
            },
        )
    log.info("embed: %d songs -> %s (%s)", len(sets), dest, model_name)
    return dest


def _load_pooled_vectors(songs_path: str, embeddings_path: str) -> tuple[list[embed.SongVector], dict[str, int]]:
    """Pool per-song vectors in corpus order; report join drop counts."""
    songs, _ = corpus.load_corpus(songs_path)
    sets = embed.load_embeddings(embeddings_path)
    corpus_ids = [s.song_id for s in songs]
    present = [sid for sid in corpus_ids if sid in sets]
    dropped = [sid for sid in corpus_ids if sid not in sets]
    extras = sorted(set(sets) - set(corpus_ids))
    for sid in dropped:
        log.warning("song %r has no embeddings; dropped from graph", sid)
    if extras:
        log.warning("%d embedding records do not match any corpus song; ignored", len(extras))
    vectors = [embed.pool_song_vector(sets[sid]) for sid in present]
    counts = {
        "n_corpus_songs": len(corpus_ids),
        "n_nodes": len(present),
        "n_dropped_missing_embedding": len(dropped),
        "n_extra_embeddings": len(extras),
    }
    return vectors, counts


def stage_graph(out_dir: str, k: int, threads: int, embeddings_path: str | None = None) -> None:
    songs_path = _require(_path(out_dir, SONGS_FILE), "ingest")
    emb_path = embeddings_path or _require(_path(out_dir, EMBEDDINGS_FILE), "embed-toy")
    vectors, counts = _load_pooled_vectors(songs_path, emb_path)
    if len(vectors) < 2:
        raise DataValidationError("need at least 2 embedded songs to build a graph")
    g = graphmod.build_knn_graph(vectors, k, threads=threads)
    g.validate()
    graphmod.save_graph(g, _path(out_dir, GRAPH_FILE), source_digest=embed.vectors_digest(vectors))
    graphmod.export_edges(g, _path(out_dir, EDGES_FILE))
    counts["n_edges"] = g.n_edges
    _update_manifest(
        out_dir,
        "graph",
        {
            "config": {"k": k},
            "inputs": {"embeddings": _input_ref(emb_path, out_dir), "songs": _input_ref(songs_path, out_dir)},
            "outputs": _output_digests(out_dir, [GRAPH_FILE, EDGES_FILE]),
            "counts": counts,
        },
    )
    log.info("graph: %d nodes, %d edges (k=%d)", g.n_nodes, g.n_edges, k)


def _load_graph(out_dir: str) -> graphmod.SimilarityGraph:
    g, _ = graphmod.load_graph(_require(_path(out_dir, GRAPH_FILE), "graph"))
    g.validate()  # a cache that fails structural invariants must not propagate
    return g


def stage_communities(out_dir: str, resolution: float, seed: int, binarize: bool = False) -> None:
    g = _load_graph(out_dir)
    part = community.louvain(community.binarized(g) if binarize else g, resolution, seed)
    community.write_partition_csv(part, g.node_ids, _path(out_dir, PARTITION_FILE), _path(out_dir, PARTITION_META_FILE))
    _update_manifest(
        out_dir,
        "communities",
        {
            "config": {"resolution": resolution, "seed": seed, "binarize": bool(binarize)},
            "inputs": {"graph": _input_ref(_path(out_dir, GRAPH_FILE), out_dir)},
            "outputs": _output_digests(out_dir, [PARTITION_FILE, PARTITION_META_FILE]),
            "counts": {"n_communities": part.n_communities},
        },
    )
    log.info("communities: %d communities, Q=%.6f", part.n_communities, part.modularity)


def stage_sweep(out_dir: str, resolutions: tuple[float, ...], seed: int, repeats: int, threads: int) -> None:
    g = _load_graph(out_dir)
    report = community.resolution_sweep(g, list(resolutions), seed, repeats, threads=threads)
    community.write_sweep_csv(report, _path(out_dir, SWEEP_FILE))
    _update_manifest(
        out_dir,
        "sweep",
        {
            "config": {"resolutions": list(resolutions), "seed": seed, "repeats": repeats},
            "inputs": {"graph": _input_ref(_path(out_dir, GRAPH_FILE), out_dir)},
            "outputs": _output_digests(out_dir, [SWEEP_FILE]),
            "counts": {"n_rows": len(report.rows)},
        },
    )
    log.info("sweep: %d rows", len(report.rows))


def _aligned_partition(out_dir: str, g: graphmod.SimilarityGraph) -> np.ndarray:
    part_map = community.read_partition_csv(_require(_path(out_dir, PARTITION_FILE), "communities"))
    missing = [sid for sid in g.node_ids if sid not in part_map]
    if missing:
        raise DataValidationError(f"partition does not cover node {missing[0]!r}")
    return np.asarray([part_map[sid] for sid in g.node_ids], dtype=np.int64)


def stage_bridges(out_dir: str, weighted: bool, quantiles: tuple[float, ...], threads: int) -> None:
    g = _load_graph(out_dir)
    assignment = _aligned_partition(out_dir, g)
    centrality = bridge.betweenness_centrality(g, use_weights=weighted, threads=threads)
    boundary = bridge.boundary_scores(g, assignment)
    thresholds = bridge.write_bridges_csv(g.node_ids, centrality, boundary, _path(out_dir, BRIDGES_FILE), quantiles)
    with open(_path(out_dir, THRESHOLDS_FILE), "w", encoding="utf-8") as fh:
        json.dump(thresholds, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _update_manifest(
        out_dir,
        "bridges",
        {
            "config": {"weighted": bool(weighted), "quantiles": list(quantiles)},
            "inputs": {
                "graph": _input_ref(_path(out_dir, GRAPH_FILE), out_dir),
                "partition": _input_ref(_path(out_dir, PARTITION_FILE), out_dir),
            },
            "outputs": _output_digests(out_dir, [BRIDGES_FILE, THRESHOLDS_FILE]),
            "counts": {"n_nodes": g.n_nodes},
        },
    )
    log.info("bridges: %d nodes scored", g.n_nodes)


def stage_compare(out_dir: str, quantile: float, quantiles: tuple[float, ...]) -> None:
    metrics, _ = corpus.read_metrics_csv(_require(_path(out_dir, METRICS_FILE), "ingest"))
    bridge_recs = bridge.read_bridges_csv(_require(_path(out_dir, BRIDGES_FILE), "bridges"))
    scored = [m for m in metrics if m.song_id in bridge_recs]
    skipped = len(metrics) - len(scored)
    if skipped:
        log.warning("%d songs have metrics but no bridge scores; excluded from comparison", skipped)
    if not scored:
        raise DataValidationError("no songs shared between metrics and bridge tables")
    betweenness = {m.song_id: bridge_recs[m.song_id]["betweenness"] for m in scored}
    scores = np.asarray([betweenness[m.song_id] for m in scored])
    mask, _thr = bridge.classify_bridges(scores, quantile)
    flags = {m.song_id: bool(mask[i]) for i, m in enumerate(scored)}
    comp = analysis.group_comparison(scored, flags)
    rows = analysis.robustness_sweep(scored, betweenness, list(quantiles))
    analysis.write_comparison_csv(comp, _path(out_dir, COMPARISON_FILE), _path(out_dir, COMPARISON_FULL_FILE))
    analysis.write_robustness_csv(rows, _path(out_dir, ROBUSTNESS_FILE), _path(out_dir, ROBUSTNESS_FULL_FILE))
    _update_manifest(
        out_dir,
        "compare",
        {
            "config": {"quantile": quantile, "quantiles": list(quantiles)},
            "inputs": {
                "metrics": _input_ref(_path(out_dir, METRICS_FILE), out_dir),
                "bridges": _input_ref(_path(out_dir, BRIDGES_FILE), out_dir),
            },
            "outputs": _output_digests(
                out_dir, [COMPARISON_FILE, COMPARISON_FULL_FILE, ROBUSTNESS_FILE, ROBUSTNESS_FULL_FILE]
            ),
            "counts": {"n_songs": len(scored), "n_bridges": comp.n_bridge},
        },
    )
    log.info("compare: %d bridge vs %d non-bridge songs at q=%g", comp.n_bridge, comp.n_non_bridge, quantile)


def stage_artists(out_dir: str) -> None:
    metrics, artist_by_song = corpus.read_metrics_csv(_require(_path(out_dir, METRICS_FILE), "ingest"))
    part_map = community.read_partition_csv(_require(_path(out_dir, PARTITION_FILE), "communities"))
    bridge_recs = bridge.read_bridges_csv(_require(_path(out_dir, BRIDGES_FILE), "bridges"))
    node_ids = tuple(part_map)
    missing = [sid for sid in node_ids if sid not in bridge_recs]
    if missing:
        raise DataValidationError(f"no bridge scores for song {missing[0]!r}")
    assignment = np.asarray([part_map[sid] for sid in node_ids], dtype=np.int64)
    boundary = np.asarray([bridge_recs[sid]["boundary_score"] for sid in node_ids])
    metrics_by_song = {m.song_id: m for m in metrics}
    absent = [sid for sid in node_ids if sid not in metrics_by_song]
    if absent:
        raise DataValidationError(f"no metrics for song {absent[0]!r}")
    rows, summary = analysis.artist_stats(node_ids, assignment, boundary, metrics_by_song, artist_by_song)
    analysis.write_artists_csv(rows, summary, _path(out_dir, ARTISTS_FILE), _path(out_dir, CORPUS_SUMMARY_FILE))
    _update_manifest(
        out_dir,
        "artists",
        {
            "config": {},
            "inputs": {
                "metrics": _input_ref(_path(out_dir, METRICS_FILE), out_dir),
                "partition": _input_ref(_path(out_dir, PARTITION_FILE), out_dir),
                "bridges": _input_ref(_path(out_dir, BRIDGES_FILE), out_dir),
            },
            "outputs": _output_digests(out_dir, [ARTISTS_FILE, CORPUS_SUMMARY_FILE]),
            "counts": {"n_artists": summary.n_artists},
        },
    )
    log.info("artists: %d artists over %d songs", summary.n_artists, summary.n_songs)


def stage_probe(
    out_dir: str,
    probe_embeddings: str,
    k: int | None,
    output: str | None,
    probe_corpus: str | None,
) -> None:
    """Score probes against a finished run; existing artifacts are left untouched."""
    manifest = _read_manifest(out_dir)
    if "graph" not in manifest:
        raise DataValidationError("manifest has no graph stage; run `graph` first")
    emb_ref = manifest["graph"]["inputs"]["embeddings"]
    emb_path = _require(_resolve_input_path(emb_ref["path"], out_dir), "embed-toy")
    if sha256_file(emb_path) != emb_ref["sha256"]:
        raise DataValidationError(f"{emb_path}: content changed since the graph was built")
    g = _load_graph(out_dir)
    assignment = _aligned_partition(out_dir, g)
    assignment_by_song = {sid: int(assignment[i]) for i, sid in enumerate(g.node_ids)}

    sets = embed.load_embeddings(emb_path)
    corpus_vectors = [embed.pool_song_vector(sets[sid]) for sid in g.node_ids]

    probe_sets = embed.load_embeddings(_require(probe_embeddings, "embed-toy --corpus <probes> --output <file>"))
    if not probe_sets:
        raise DataValidationError(f"{probe_embeddings}: no probe records")
    probe_header = embed.read_embedding_header(probe_embeddings)
    corpus_header = embed.read_embedding_header(emb_path)
    if probe_header["model_name"] != corpus_header["model_name"]:
        log.warning(
            "probe model %r differs from corpus model %r; similarities are not comparable",
            probe_header["model_name"], corpus_header["model_name"],
        )

    use_k = k if k is not None else g.k
    results = [
        analysis.probe_out_of_sample(probe_sets[sid], corpus_vectors, assignment_by_song, use_k)
        for sid in probe_sets
    ]
    artist_by_probe: dict[str, str] = {}
    if probe_corpus:
        probe_songs, _ = corpus.load_corpus(probe_corpus)
        artist_by_probe = {s.song_id: s.artist_id for s in probe_songs}
    dest = output or _path(out_dir, PROBES_FILE)
    analysis.write_probes_csv(results, artist_by_probe, dest)
    log.info("probe: %d probes scored with k=%d -> %s", len(results), use_k, dest)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_ingest(args, cfg):
    stage_ingest(args.corpus, _out(args))


def _cmd_embed_toy(args, cfg):
    stage_embed_toy(
        _out(args),
        int(_resolve(args, cfg, "dim")),
        int(_resolve(args, cfg, "embed_seed")),
        corpus_path=args.corpus,
        output=args.output,
    )


def _cmd_graph(args, cfg):
    stage_graph(_out(args), int(_resolve(args, cfg, "k")), _threads(args), embeddings_path=args.embeddings)


def _cmd_communities(args, cfg):
    binarize = bool(args.binarize) if args.binarize is not None else bool(_resolve(args, cfg, "binarize"))
    stage_communities(_out(args), float(_resolve(args, cfg, "resolution")), int(_resolve(args, cfg, "seed")), binarize)


def _cmd_sweep(args, cfg):
    resolutions = tuple(float(r) for r in str(args.resolutions).split(","))
    if any(r <= 0 for r in resolutions):
        raise DataValidationError("resolutions must be positive")
    stage_sweep(_out(args), resolutions, int(_resolve(args, cfg, "seed")), int(_resolve(args, cfg, "repeats")), _threads(args))


def _cmd_bridges(args, cfg):
    quantiles = _parse_quantiles(_resolve(args, cfg, "quantiles"))
    weighted = bool(args.weighted) if args.weighted is not None else bool(_resolve(args, cfg, "weighted"))
    stage_bridges(_out(args), weighted, quantiles, _threads(args))


def _cmd_compare(args, cfg):
    quantiles = _parse_quantiles(_resolve(args, cfg, "quantiles"))
    stage_compare(_out(args), float(_resolve(args, cfg, "quantile")), quantiles)


def _cmd_artists(args, cfg):
    stage_artists(_out(args))


def _cmd_probe(args, cfg):
    stage_probe(args.out, args.embeddings, args.k, args.output, args.probe_corpus)


def _cmd_pipeline(args, cfg):
    out_dir = _out(args)
    stage_ingest(args.corpus, out_dir)
    if not args.embeddings:
        stage_embed_toy(out_dir, int(_resolve(args, cfg, "dim")), int(_resolve(args, cfg, "embed_seed")))
    stage_graph(out_dir, int(_resolve(args, cfg, "k")), _threads(args), embeddings_path=args.embeddings)
    stage_communities(out_dir, float(_resolve(args, cfg, "resolution")), int(_resolve(args, cfg, "seed")))
    quantiles = _parse_quantiles(_resolve(args, cfg, "quantiles"))
    weighted = bool(args.weighted) if args.weighted is not None else bool(_resolve(args, cfg, "weighted"))
    stage_bridges(out_dir, weighted, quantiles, _threads(args))
    stage_compare(out_dir, float(_resolve(args, cfg, "quantile")), quantiles)
    stage_artists(out_dir)


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lyricgraph", description="Semantic community and bridge analysis for line-structured corpora")
    p.add_argument("--config", help="JSON file supplying defaults for unset flags")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(handler=handler)
        sp.add_argument("--out", required=True, help="run directory")
        return sp

    sp = add("ingest", _cmd_ingest, "parse a corpus, compute text metrics")
    sp.add_argument("--corpus", required=True, help="JSONL corpus file")

    sp = add("embed-toy", _cmd_embed_toy, "hash-based line embeddings (testing embedder)")
    sp.add_argument("--dim", type=int, help=f"vector dimension (default {DEFAULTS['dim']})")
    sp.add_argument("--embed-seed", type=int, dest="embed_seed", help=f"hash seed (default {DEFAULTS['embed_seed']})")
    sp.add_argument("--corpus", help="embed this corpus file instead of the run's songs file")
    sp.add_argument("--output", help="write here instead of the run's embeddings file (skips manifest)")

    sp = add("graph", _cmd_graph, "build the cosine kNN similarity graph")
    sp.add_argument("--k", type=int, help=f"neighbors per node (default {DEFAULTS['k']})")
    sp.add_argument("--embeddings", help="external line-embedding file (default: run's own)")
    sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    sp = add("communities", _cmd_communities, "detect modularity communities")
    sp.add_argument("--resolution", type=float, help=f"resolution gamma (default {DEFAULTS['resolution']})")
    sp.add_argument("--seed", type=int, help=f"scan-order seed (default {DEFAULTS['seed']})")
    sp.add_argument("--binarize", action="store_const", const=True, help="ignore weights: treat every edge as 1.0")

    sp = add("sweep", _cmd_sweep, "community detection across a resolution grid")
    sp.add_argument("--resolutions", required=True, help="comma-separated gamma values")
    sp.add_argument("--seed", type=int, help=f"base seed (default {DEFAULTS['seed']})")
    sp.add_argument("--repeats", type=int, help=f"runs per resolution (default {DEFAULTS['repeats']})")
    sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    sp = add("bridges", _cmd_bridges, "betweenness, boundary scores, bridge flags")
    sp.add_argument("--weighted", action="store_const", const=True, help="use 1-w edge distances for geodesics")
    sp.add_argument("--quantiles", help=f"comma-separated flags (default {DEFAULTS['quantiles']})")
    sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    sp = add("compare", _cmd_compare, "bridge vs non-bridge metric tables")
    sp.add_argument("--quantile", type=float, help=f"headline comparison quantile (default {DEFAULTS['quantile']})")
    sp.add_argument("--quantiles", help=f"robustness grid (default {DEFAULTS['quantiles']})")

    add("artists", _cmd_artists, "artist dispersion table and corpus rollup")

    sp = add("probe", _cmd_probe, "assign out-of-sample songs against a finished run")
    sp.add_argument("--embeddings", required=True, help="line-embedding file of the probe songs")
    sp.add_argument("--k", type=int, help="neighbors to vote (default: the graph's k)")
    sp.add_argument("--probe-corpus", dest="probe_corpus", help="probe corpus JSONL, for artist ids in the output")
    sp.add_argument("--output", help="probe table destination (default: <out>/probes.csv)")

    sp = add("pipeline", _cmd_pipeline, "run ingest through artists in one go")
    sp.add_argument("--corpus", required=True, help="JSONL corpus file")
    sp.add_argument("--embeddings", help="precomputed line embeddings (skips the toy embedder)")
    sp.add_argument("--dim", type=int, help=f"toy embedder dimension (default {DEFAULTS['dim']})")
    sp.add_argument("--embed-seed", type=int, dest="embed_seed", help=f"toy embedder seed (default {DEFAULTS['embed_seed']})")
    sp.add_argument("--k", type=int, help=f"neighbors per node (default {DEFAULTS['k']})")
    sp.add_argument("--resolution", type=float, help=f"resolution gamma (default {DEFAULTS['resolution']})")
    sp.add_argument("--seed", type=int, help=f"detection seed (default {DEFAULTS['seed']})")
    sp.add_argument("--weighted", action="store_const", const=True, help="weighted betweenness")
    sp.add_argument("--quantiles", help=f"bridge quantiles (default {DEFAULTS['quantiles']})")
    sp.add_argument("--quantile", type=float, help=f"headline quantile (default {DEFAULTS['quantile']})")
    sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    cfg: dict = {}
    try:
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
            if not isinstance(cfg, dict):
                raise DataValidationError(f"{args.config}: config must be a JSON object")
        args.handler(args, cfg)
    except DataValidationError as exc:
        log.error("%s", exc)
        return 2
    except InternalInvariantError as exc:
        log.error("internal invariant violated: %s", exc)
        return 3
    except LyricGraphError as exc:
        log.error("%s", exc)
        return 2
    except FileNotFoundError as exc:
        log.error("missing file: %s", exc.filename or exc)
        return 2
    except (json.JSONDecodeError, OSError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
