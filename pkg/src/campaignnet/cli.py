"""Command-line interface.

Exit codes: 0 on success, 1 on an internal error, 2 on bad input or config.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import pipeline as pl
from .ingest import GRANULARITIES, write_documents
from .synth import SynthError, SynthSpec, generate, reference_lexicon
from .topicnet import topic_listing

log = logging.getLogger("campaignnet")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("ingest")
    g.add_argument("--input", help="document archive (CSV or JSONL)")
    g.add_argument("--format", choices=("csv", "jsonl"))
    g.add_argument("--strict", action="store_true", default=None, help="fail on the first malformed row")
    g.add_argument("--drop-duplicates", action="store_true", default=None, help="drop exact-text duplicates")
    g.add_argument("--no-mentions", dest="keep_mentions", action="store_false", default=None,
                   help="drop @-mention tokens")
    g.add_argument("--granularity", choices=GRANULARITIES, help="corpus-network window size")
    g.add_argument("--anchor", help="ISO date starting one biweekly window")
    g.add_argument("--range-start", help="first ISO date of the observation range")
    g.add_argument("--range-end", help="last ISO date of the observation range")


def _add_lexicon_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("terms")
    g.add_argument("--lexicon", help="reference word-frequency CSV (word,count)")
    g.add_argument("--min-count", type=int)
    g.add_argument("--max-base-terms", type=int)
    g.add_argument("--per-author-base-terms", action="store_true", default=None,
                   help="select base terms from --author's documents only")
    g.add_argument("--rare-multiplier", type=float)
    g.add_argument("--sig-multiplier", type=float)
    g.add_argument("--min-occurrences", type=int)
    g.add_argument("--min-ngram-count", type=int)
    g.add_argument("--min-word-count", type=int)


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("corpus network")
    g.add_argument("--threshold", type=float, help="minimum Pearson correlation for an edge")
    g.add_argument("--seed", type=int, help="seed for every Louvain run")
    g.add_argument("--author", dest="corpus_author", help="restrict the corpus network to one author")


def _add_topic_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("topics")
    g.add_argument("--min-jaccard", type=float)
    g.add_argument("--keep-isolated", action="store_true", default=None)
    g.add_argument("--top", dest="top_k", type=int, help="terms listed per topic")


def _add_dynamics_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dynamics")
    g.add_argument("--coverage-threshold", type=float)
    g.add_argument("--score-unit", choices=("event", "window"))


ALL_FLAG_GROUPS = (_add_ingest_flags, _add_lexicon_flags, _add_corpus_flags, _add_topic_flags, _add_dynamics_flags)
CONFIG_KEYS = {f.name for f in dataclasses.fields(pl.PipelineConfig)}


def _stage_parser(sub, name: str, help: str, actions=None):
    p = sub.add_parser(name, help=help)
    if actions:
        p.add_argument("action", choices=actions)
    p.add_argument("--workdir", required=True, type=Path, help="artifact directory")
    p.add_argument("--config", type=Path, help="JSON config file (flags win)")
    for add in ALL_FLAG_GROUPS:
        add(p)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="campaignnet",
                                     description="Topic dynamics and leader/follower analysis of candidate corpora.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthetic corpora with planted structure")
    synth.add_argument("action", choices=("generate",))
    synth.add_argument("--spec", required=True, type=Path)
    synth.add_argument("--out", required=True, type=Path)
    synth.add_argument("--lexicon-out", type=Path, help="also write a matching reference lexicon")

    _stage_parser(sub, "ingest", "load, tokenize and bucket an archive")
    _stage_parser(sub, "terms", "select base terms and extract topic terms")
    _stage_parser(sub, "corpusnet", "corpus-similarity network", ("build", "cluster", "diagnose"))
    _stage_parser(sub, "topics", "subtopics and recurring topics", ("build", "merge", "show"))
    _stage_parser(sub, "dynamics", "coverage, follow events and scores", ("coverage", "events", "scores"))

    run = sub.add_parser("run", help="run every stage")
    run.add_argument("--config", type=Path, help="JSON config file (flags win)")
    run.add_argument("--manifest", type=Path, help="replay the config recorded in a run manifest")
    where = run.add_mutually_exclusive_group()
    where.add_argument("--out-root", type=Path, default=Path("runs"),
                       help="parent of the content-addressed artifact directory")
    where.add_argument("--out", type=Path, help="exact artifact directory")
    for add in ALL_FLAG_GROUPS:
        add(run)

    rep = sub.add_parser("report", help="summarize a completed artifact directory")
    rep.add_argument("artifact_dir", type=Path)
    rep.add_argument("--format", choices=("text", "json"), default="text")
    rep.add_argument("--top", type=int, default=5)
    return parser


def _overrides(args) -> dict:
    return {k: v for k, v in vars(args).items() if k in CONFIG_KEYS and v is not None}


def _config(args, workdir: Optional[Path] = None) -> pl.PipelineConfig:
    if getattr(args, "manifest", None):
        cfg = pl.manifest_config(args.manifest)
    elif getattr(args, "config", None):
        cfg = pl.PipelineConfig.load(args.config)
    elif workdir is not None and (workdir / pl.MANIFEST).is_file():
        cfg = pl.manifest_config(workdir / pl.MANIFEST)
    else:
        cfg = pl.PipelineConfig()
    return cfg.updated(**_overrides(args))


def _cmd_synth(args) -> int:
    spec = SynthSpec.from_json(args.spec)
    write_documents(generate(spec), args.out)
    if args.lexicon_out:
        reference_lexicon(spec).write_csv(args.lexicon_out)
    print(f"wrote {args.out}")
    return EXIT_OK


STEP_FUNCS = {
    ("corpusnet", "build"): pl.corpusnet_build,
    ("corpusnet", "cluster"): pl.corpusnet_cluster,
    ("corpusnet", "diagnose"): pl.corpusnet_diagnose,
    ("topics", "build"): pl.topics_build,
    ("topics", "merge"): pl.topics_merge,
    ("dynamics", "coverage"): pl.dynamics_coverage,
    ("dynamics", "events"): pl.dynamics_events,
    ("dynamics", "scores"): pl.dynamics_scores,
}
STAGE_OF = {"ingest": "ingest", "terms": "lexicon", "corpusnet": "corpusnet", "topics": "topicnet",
            "dynamics": "dynamics"}


def _cmd_stage(args) -> int:
    workdir: Path = args.workdir
    cfg = _config(args, workdir)
    stage = STAGE_OF[args.command]
    action = getattr(args, "action", None)
    if args.command == "topics" and action == "show":
        topics = pl.load_topics(workdir, "topicnet")
        sys.stdout.write(topic_listing(topics, cfg.top_k))
        return EXIT_OK
    if action is None:
        pl.run_stage(stage, cfg, workdir)
    else:
        # Single sub-steps do not touch the manifest's stage records.
        workdir.mkdir(parents=True, exist_ok=True)
        try:
            STEP_FUNCS[(args.command, action)](cfg, workdir)
        except pl.INPUT_ERRORS as exc:
            raise pl.StageError(stage, str(exc), EXIT_INPUT) from exc
    print(f"{args.command}{' ' + action if action else ''}: ok ({workdir})")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _config(args)
    workdir = args.out if args.out is not None else pl.artifact_dir(cfg, args.out_root)
    manifest = pl.run_pipeline(cfg, workdir)
    s = manifest["summary"]
    print(f"artifacts: {workdir}")
    print(f"topics: {s['topics']}  corpus modularity: "
          f"{'n/a' if s['corpus_modularity'] is None else format(s['corpus_modularity'], '.4f')}  "
          f"follow events: {s['follow_events']}")
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        sys.stdout.write(pl.report(args.artifact_dir, args.format, args.top))
    except pl.ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for name in exc.missing:
            print(f"  missing: {name}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


COMMANDS = {"synth": _cmd_synth, "run": _cmd_run, "report": _cmd_report}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handler = COMMANDS.get(args.command, _cmd_stage)
    try:
        return handler(args)
    except pl.StageError as exc:
        print(f"error: stage {exc.stage} failed: {exc}", file=sys.stderr)
        return exc.exit_code
    except (pl.ConfigError, SynthError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - top-level guard maps to exit 1
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
