"""Command-line entry: corpus in, embedding file plus manifest out.

Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .encoders import DEFAULT_MODEL, SentenceEncoder
from .export import ExportError, export_embeddings, write_manifest

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lyricgraph-export",
        description="Embed every lyric line of a JSONL corpus with a sentence-embedding model",
    )
    p.add_argument("--corpus", required=True, help="line-delimited JSON corpus file")
    p.add_argument("--output", required=True, help="embedding file destination")
    p.add_argument("--model", default=DEFAULT_MODEL, help=f"model name (default {DEFAULT_MODEL})")
    p.add_argument("--batch-size", type=int, default=32, dest="batch_size", help="lines per inference batch (default 32)")
    p.add_argument("--device", default=None, help="inference device, e.g. cpu or cuda (default: framework choice)")
    p.add_argument("--manifest", default=None, help="manifest destination (default: <output>.manifest.json)")
    return p


def main(argv=None, encoder_factory=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if encoder_factory is None:
        encoder_factory = SentenceEncoder
    try:
        encoder = encoder_factory(args.model, args.device)
        manifest = export_embeddings(
            args.corpus, encoder, args.output, model_name=args.model, batch_size=args.batch_size
        )
        write_manifest(manifest, args.manifest or f"{args.output}.manifest.json")
    except ExportError as exc:
        log.error("%s", exc)
        return 2
    except FileNotFoundError as exc:
        log.error("missing file: %s", exc.filename or exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
