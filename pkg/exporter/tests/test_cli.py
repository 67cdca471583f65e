from __future__ import annotations

import json

import pytest

from lyricgraph_exporter.cli import main
from lyricgraph_exporter.export import ExportError

from test_export import FakeEncoder, _sample_records


@pytest.fixture()
def corpus(tmp_path):
    path = tmp_path / "corpus.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for rec in _sample_records():
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path


def _fake_factory(model, device):
    assert device in (None, "cpu")
    return FakeEncoder()


def test_cli_happy_path(corpus, tmp_path):
    out = tmp_path / "emb.jsonl"
    rc = main(
        ["--corpus", str(corpus), "--output", str(out), "--model", "fake-v1", "--batch-size", "4"],
        encoder_factory=_fake_factory,
    )
    assert rc == 0
    manifest = json.loads((tmp_path / "emb.jsonl.manifest.json").read_text(encoding="utf-8"))
    assert manifest["n_songs"] == 10
    assert manifest["model_name"] == "fake-v1"
    header = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
    assert header["model_name"] == "fake-v1"

    from lyricgraph import embed as core_embed

    assert len(core_embed.load_embeddings(out)) == 10


def test_cli_manifest_override(corpus, tmp_path):
    side = tmp_path / "custom_manifest.json"
    rc = main(
        ["--corpus", str(corpus), "--output", str(tmp_path / "e.jsonl"), "--manifest", str(side)],
        encoder_factory=_fake_factory,
    )
    assert rc == 0
    assert side.exists()


def test_cli_usage_errors(tmp_path):
    assert main(["--output", str(tmp_path / "e.jsonl")], encoder_factory=_fake_factory) == 1
    assert main(["--corpus", "c", "--output", "o", "--bogus"], encoder_factory=_fake_factory) == 1


def test_cli_missing_corpus(tmp_path):
    rc = main(
        ["--corpus", str(tmp_path / "absent.jsonl"), "--output", str(tmp_path / "e.jsonl")],
        encoder_factory=_fake_factory,
    )
    assert rc == 2


def test_cli_model_load_failure(corpus, tmp_path):
    def broken_factory(model, device):
        raise ExportError(f"cannot load model {model!r}: offline")

    rc = main(
        ["--corpus", str(corpus), "--output", str(tmp_path / "e.jsonl")],
        encoder_factory=broken_factory,
    )
    assert rc == 2
