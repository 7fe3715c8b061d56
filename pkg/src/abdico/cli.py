"""``ig`` command line: run pipeline stages with reproducible configuration."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from abdico.classifier import ModelError
from abdico.clustering import ClusteringError
from abdico.corpus import CorpusError
from abdico.pipeline import STAGES, StageError, config_from_sources, run_stage
from abdico.synthetic import write_fixtures
from abdico.taxonomy import TaxonomyError, UnmappedComponentError

log = logging.getLogger("abdico")

_FLAGS = (
    ("--corpus", dict(help="statement file (JSONL or CSV)")),
    ("--gold", dict(help="gold label file aligned to the corpus")),
    ("--model", dict(help="model file (default: <out>/model.tsv)")),
    ("--taxonomy", dict(help="category map config")),
    ("--seed", dict(type=int, help="training seed (default 42, or $IG_SEED)")),
    ("--epochs", dict(type=int, help="perceptron epochs (default 10)")),
    ("--min-cluster-size", dict(type=int, help="smallest non-noise cluster (default 2)")),
    ("--distance-threshold", dict(type=float, help="cosine distance merge cutoff (default 0.6)")),
    ("--embed-dim", dict(type=int, help="embedding dimension (default 256)")),
    ("--top-k", dict(type=int, help="deontics kept for the chi-square tests (default 3)")),
    ("--out", dict(help="run directory")),
    ("--format", dict(choices=["jsonl", "csv"], help="input format (default: from file suffix)")),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ig", description="Institutional grammar extraction and analysis.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGES, "all"):
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every stage in order")
        p.add_argument("--config", help="JSON file with any subset of the flag values")
        for flag, kwargs in _FLAGS:
            p.add_argument(flag, default=None, **kwargs)
    fx = sub.add_parser("fixtures", help="write the bundled synthetic fixtures to a directory")
    fx.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fixtures":
            for path in write_fixtures(args.out):
                print(path)
            return 0
        file_values = {}
        if args.config:
            file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        flags = {flag.lstrip("-").replace("-", "_"): getattr(args, flag.lstrip("-").replace("-", "_")) for flag, _ in _FLAGS}
        cfg = config_from_sources(file_values, flags)
        run_stage(args.command, cfg)
    except (StageError, CorpusError, ModelError, TaxonomyError, UnmappedComponentError, ClusteringError) as exc:
        print(f"ig {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"ig {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
