"""Synthetic planted-community corpus for end-to-end validation.

Three themes with disjoint vocabularies; most songs draw lines from a single
theme, while seam songs mix two themes at roughly 60/40 so they sit between
the planted clusters. Every song carries a repeated chorus line so repetition
metrics are non-trivial. Generation is fully determined by the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError

FIXTURE_SEED = 7
FIXTURE_DIM = 64
FIXTURE_K = 10
FIXTURE_RESOLUTION = 1.0

N_THEMES = 3
N_INTERIOR_PER_THEME = 14
N_SEAM_PER_PAIR = 6
_SEAM_PAIRS = ((0, 1), (1, 2), (2, 0))  # dominant theme first

_THEME_SYLLABLES = (
    ("ka", "ro", "mi", "ta", "zu", "pe", "lo", "han"),
    ("vel", "sor", "gim", "nu", "fae", "dri", "ol", "ben"),
    ("shi", "wa", "dor", "yen", "bri", "cu", "ex", "pol"),
)
_CONSONANTS = "bcdfghjklmnpqrstvwz"
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ou", "ei", "ua", "yo")
_SYLLABLES_PER_THEME = 8
_VOCAB_SIZE = 24
_VERSE_LINES = 9
_CHORUS_REPEATS = 3
_WORDS_PER_LINE = (5, 8)  # inclusive range


@dataclass(frozen=True)
class PlantedSong:
    song_id: str
    artist_id: str
    title: str
    lines: tuple[str, ...]
    theme: int
    is_seam: bool


def _vocab_from_syllables(syllables: tuple[str, ...], rng: np.random.Generator) -> list[str]:
    seen: set[str] = set()
    words: list[str] = []
    while len(words) < _VOCAB_SIZE:
        n_syl = int(rng.integers(2, 4))
        word = "".join(syllables[int(i)] for i in rng.integers(0, len(syllables), n_syl))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _theme_vocab(theme: int, rng: np.random.Generator) -> list[str]:
    return _vocab_from_syllables(_THEME_SYLLABLES[theme], rng)


def _disjoint_syllable_pools(n_themes: int, rng: np.random.Generator) -> list[tuple[str, ...]]:
    """Carve non-overlapping syllable sets for arbitrarily many themes."""
    universe = [c + v for c in _CONSONANTS for v in _VOWELS]
    need = n_themes * _SYLLABLES_PER_THEME
    if need > len(universe):
        raise DataValidationError(f"at most {len(universe) // _SYLLABLES_PER_THEME} themes supported, got {n_themes}")
    perm = rng.permutation(len(universe))
    return [
        tuple(universe[int(perm[t * _SYLLABLES_PER_THEME + i])] for i in range(_SYLLABLES_PER_THEME))
        for t in range(n_themes)
    ]


def _make_line(vocab: list[str], rng: np.random.Generator) -> str:
    n_words = int(rng.integers(_WORDS_PER_LINE[0], _WORDS_PER_LINE[1] + 1))
    return " ".join(vocab[int(i)] for i in rng.integers(0, len(vocab), n_words))


def _make_song_lines(
    dominant: list[str], secondary: list[str] | None, rng: np.random.Generator, n_secondary: int = 5
) -> tuple[str, ...]:
    """Chorus (repeated) plus verses; seam songs give n_secondary verses to the other theme."""
    chorus = _make_line(dominant, rng)
    if secondary is None:
        verses = [_make_line(dominant, rng) for _ in range(_VERSE_LINES)]
    else:
        verses = [_make_line(dominant, rng) for _ in range(_VERSE_LINES - n_secondary)]
        verses += [_make_line(secondary, rng) for _ in range(n_secondary)]
    lines = [chorus]
    for i, verse in enumerate(verses):
        lines.append(verse)
        if (i + 1) % 4 == 0 and lines.count(chorus) < _CHORUS_REPEATS:
            lines.append(chorus)
    while lines.count(chorus) < _CHORUS_REPEATS:
        lines.append(chorus)
    return tuple(lines)


def make_fixture(seed: int = FIXTURE_SEED) -> list[PlantedSong]:
    """60 songs: 16 interior per theme plus 4 seam songs per theme pair."""
    rng = np.random.default_rng(seed)
    vocabs = [_theme_vocab(t, rng) for t in range(N_THEMES)]
    songs: list[PlantedSong] = []
    idx = 0
    for theme in range(N_THEMES):
        for j in range(N_INTERIOR_PER_THEME):
            artist = f"artist-t{theme}-{j % 4}"
            songs.append(
                PlantedSong(
                    song_id=f"song-{idx:03d}",
                    artist_id=artist,
                    title=f"Song {idx}",
                    lines=_make_song_lines(vocabs[theme], None, rng),
                    theme=theme,
                    is_seam=False,
                )
            )
            idx += 1
    for pair_no, (a, b) in enumerate(_SEAM_PAIRS):
        for j in range(N_SEAM_PER_PAIR):
            # seams sit on both sides of each gap so they pair up across it
            dom, sec = (a, b) if j < N_SEAM_PER_PAIR // 2 else (b, a)
            n_secondary = 5 if j % 2 == 0 else 4
            songs.append(
                PlantedSong(
                    song_id=f"song-{idx:03d}",
                    artist_id=f"artist-x{pair_no}",
                    title=f"Song {idx}",
                    lines=_make_song_lines(vocabs[dom], vocabs[sec], rng, n_secondary=n_secondary),
                    theme=dom,
                    is_seam=True,
                )
            )
            idx += 1
    return songs


def make_themed_corpus(n_themes: int, songs_per_theme: int, seed: int) -> list[PlantedSong]:
    """Interior-only corpus with n_themes disjoint vocabularies (no seams)."""
    if n_themes < 1 or songs_per_theme < 1:
        raise DataValidationError("need at least one theme and one song per theme")
    rng = np.random.default_rng(seed)
    pools = _disjoint_syllable_pools(n_themes, rng)
    vocabs = [_vocab_from_syllables(pool, rng) for pool in pools]
    songs: list[PlantedSong] = []
    idx = 0
    for theme in range(n_themes):
        for j in range(songs_per_theme):
            songs.append(
                PlantedSong(
                    song_id=f"m-{idx:03d}",
                    artist_id=f"artist-m{theme}-{j % 2}",
                    title=f"Sample {idx}",
                    lines=_make_song_lines(vocabs[theme], None, rng),
                    theme=theme,
                    is_seam=False,
                )
            )
            idx += 1
    return songs


def make_probes(theme: int, count: int, seed: int) -> list[PlantedSong]:
    """Pure-theme out-of-sample songs; ids are disjoint from fixture ids."""
    if not 0 <= theme < N_THEMES:
        raise DataValidationError(f"theme must be in [0, {N_THEMES}), got {theme}")
    rng = np.random.default_rng(seed)
    base = np.random.default_rng(FIXTURE_SEED)
    vocabs = [_theme_vocab(t, base) for t in range(N_THEMES)]
    probes = []
    for i in range(count):
        probes.append(
            PlantedSong(
                song_id=f"probe-t{theme}-{i:03d}",
                artist_id=f"probe-artist-t{theme}",
                title=f"Probe {theme}/{i}",
                lines=_make_song_lines(vocabs[theme], None, rng),
                theme=theme,
                is_seam=False,
            )
        )
    return probes


def planted_labels(songs: list[PlantedSong]) -> dict[str, int]:
    return {s.song_id: s.theme for s in songs}


def seam_ids(songs: list[PlantedSong]) -> set[str]:
    return {s.song_id for s in songs if s.is_seam}


def fixture_records(songs: list[PlantedSong]) -> list[dict]:
    return [
        {
            "song_id": s.song_id,
            "artist_id": s.artist_id,
            "title": s.title,
            "text": "\n".join(s.lines),
        }
        for s in songs
    ]


def write_fixture_corpus(songs: list[PlantedSong], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in fixture_records(songs):
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
