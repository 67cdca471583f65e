"""Shared fixtures: one planted corpus run through the whole stack, built once."""

from __future__ import annotations

import pytest

from lyricgraph import corpus, embed
from lyricgraph.community import louvain
from lyricgraph.graph import build_knn_graph
from lyricgraph.synthetic import (
    FIXTURE_DIM,
    FIXTURE_K,
    FIXTURE_RESOLUTION,
    FIXTURE_SEED,
    fixture_records,
    make_fixture,
)


@pytest.fixture(scope="session")
def planted_songs():
    songs, rejections = corpus.parse_corpus(fixture_records(make_fixture()))
    assert not rejections
    return songs


@pytest.fixture(scope="session")
def planted_sets(planted_songs):
    return [
        embed.toy_embed_song(s.song_id, list(s.lines), FIXTURE_DIM, FIXTURE_SEED)
        for s in planted_songs
    ]


@pytest.fixture(scope="session")
def planted_vectors(planted_sets):
    return [embed.pool_song_vector(e) for e in planted_sets]


@pytest.fixture(scope="session")
def planted_graph(planted_vectors):
    return build_knn_graph(planted_vectors, k=FIXTURE_K, threads=2)


@pytest.fixture(scope="session")
def planted_partition(planted_graph):
    return louvain(planted_graph, FIXTURE_RESOLUTION, FIXTURE_SEED)
