"""End-to-end pipeline over an artifact directory.

Every step reads only files written by earlier steps, so any step can be
rerun on its own. ``run_pipeline`` chains them and records a manifest holding
every parameter and seed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import csv
import logging
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import corpusnet as cn
from . import dynamics as dyn
from . import topicnet as tn
from .export import (atomic_open, read_graphml, read_json, read_partition, write_dot, write_graphml, write_json,
                     write_partition, write_rows, write_text)
from .graph import Partition, louvain, modularity
from .ingest import (BIWEEKLY, GRANULARITIES, CorpusBucket, Document, IngestError, TimeWindow, TokenizerConfig,
                     bucket, drop_duplicate_texts, load_documents, parse_timestamp, tokenize,
                     window_for)
from .lexicon import BASE, LexiconError, ReferenceLexicon, TermSet, extract_terms, select_base_terms

log = logging.getLogger(__name__)

STAGES = ("ingest", "lexicon", "corpusnet", "topicnet", "dynamics")

DOCUMENTS = "documents.jsonl"
BUCKETS = "buckets.csv"
BASE_TERMS = "base_terms.csv"
TERMS = "terms.csv"
CORPUS_GRAPHML = "corpus_network.graphml"
CORPUS_DOT = "corpus_network.dot"
CORPUS_PARTITION = "corpus_partition.csv"
CORPUS_DIAG = "corpus_diagnostics.json"
CORPUS_DIAG_TXT = "corpus_diagnostics.txt"
SEMANTIC_SUMMARY = "semantic_networks.csv"
SUBTOPICS = "subtopics.jsonl"
SUBTOPIC_GRAPHML = "subtopic_network.graphml"
TOPICS = "topics.json"
TOPICS_TXT = "topics.txt"
COVERAGE = "coverage.csv"
EVENTS = "events.csv"
FOLLOWER_GRAPHML = "follower_network.graphml"
FOLLOWER_DOT = "follower_network.dot"
SCORES = "scores.csv"
SENSITIVITY = "coverage_sensitivity.json"
MANIFEST = "manifest.json"

STAGE_OUTPUTS = {
    "ingest": (DOCUMENTS, BUCKETS),
    "lexicon": (BASE_TERMS, TERMS),
    "corpusnet": (CORPUS_GRAPHML, CORPUS_DOT, CORPUS_PARTITION, CORPUS_DIAG, CORPUS_DIAG_TXT),
    "topicnet": (SEMANTIC_SUMMARY, SUBTOPICS, SUBTOPIC_GRAPHML, TOPICS, TOPICS_TXT),
    "dynamics": (COVERAGE, EVENTS, FOLLOWER_GRAPHML, FOLLOWER_DOT, SCORES, SENSITIVITY),
}
REPORT_INPUTS = (MANIFEST, CORPUS_DIAG, TOPICS, FOLLOWER_GRAPHML, SCORES)


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str, exit_code: int = 1):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code


# Exceptions that mean bad user input rather than an internal fault.
INPUT_ERRORS = (ConfigError, IngestError, LexiconError, cn.CorpusNetError, FileNotFoundError)


@dataclass
class PipelineConfig:
    input: Optional[str] = None
    format: str = "jsonl"
    strict: bool = False
    drop_duplicates: bool = False
    keep_mentions: bool = True
    range_start: Optional[str] = None
    range_end: Optional[str] = None
    anchor: str = "2015-01-04"
    granularity: str = "monthly"
    corpus_author: Optional[str] = None
    lexicon: Optional[str] = None
    min_count: int = 100
    max_base_terms: int = 300
    per_author_base_terms: bool = False
    rare_multiplier: float = 25.0
    sig_multiplier: float = 25.0
    min_occurrences: int = 10
    min_ngram_count: int = 10
    min_word_count: int = 1
    threshold: float = 0.6
    seed: int = 42
    min_jaccard: float = 0.1
    keep_isolated: bool = False
    coverage_threshold: float = 0.5
    score_unit: str = "event"
    top_k: int = 5

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            data = read_json(path)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def updated(self, **overrides) -> "PipelineConfig":
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return self.from_dict(data)

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]

    def validate(self) -> None:
        def check(ok, name, why):
            if not ok:
                raise ConfigError(f"{name}: {why}")

        check(self.format in ("csv", "jsonl"), "format", "must be csv or jsonl")
        check(self.granularity in GRANULARITIES, "granularity", f"must be one of {GRANULARITIES}")
        check(self.score_unit in ("event", "window"), "score_unit", "must be 'event' or 'window'")
        for name in ("range_start", "range_end", "anchor"):
            value = getattr(self, name)
            if value is not None:
                try:
                    date.fromisoformat(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"{name}: not an ISO date: {value!r}") from None
        if self.range_start and self.range_end:
            check(self.range_start <= self.range_end, "range_start", "must not follow range_end")
        check(0.0 <= self.threshold <= 1.0, "threshold", "must lie in [0, 1]")
        check(0.0 < self.min_jaccard <= 1.0, "min_jaccard", "must lie in (0, 1]")
        check(-1.0 <= self.coverage_threshold <= 1.0, "coverage_threshold", "must lie in [-1, 1]")
        check(self.rare_multiplier > 0, "rare_multiplier", "must be > 0")
        check(self.sig_multiplier > 0, "sig_multiplier", "must be > 0")
        for name in ("min_count", "max_base_terms", "min_occurrences", "min_ngram_count", "min_word_count", "top_k"):
            check(isinstance(getattr(self, name), int) and getattr(self, name) >= 1, name, "must be an integer >= 1")
        check(isinstance(self.seed, int), "seed", "must be an integer")

    @property
    def anchor_date(self) -> date:
        return date.fromisoformat(self.anchor)

    @property
    def range_dates(self) -> Tuple[Optional[date], Optional[date]]:
        return (date.fromisoformat(self.range_start) if self.range_start else None,
                date.fromisoformat(self.range_end) if self.range_end else None)


def file_sha256(path) -> Optional[str]:
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError:
        return None


# -- intermediate file access -------------------------------------------------

def _need(workdir: Path, name: str, stage: str) -> Path:
    path = workdir / name
    if not path.is_file():
        raise StageError(stage, f"missing input {name}; run the earlier stage first", 2)
    return path


def read_documents(path) -> Tuple[List[Document], Dict[str, List[str]]]:
    docs, tokens = [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                doc = Document(d["id"], d["author"], parse_timestamp(d["timestamp"]), d["text"])
                docs.append(doc)
                tokens[doc.id] = d["tokens"]
    return docs, tokens


def _buckets(cfg: PipelineConfig, workdir: Path, stage: str, granularity: str, per_author: bool,
             author: Optional[str] = None) -> List[CorpusBucket]:
    docs, tokens = read_documents(_need(workdir, DOCUMENTS, stage))
    if author is not None:
        docs = [d for d in docs if d.author == author]
        if not docs:
            raise StageError(stage, f"no documents by author {author!r}", 2)
    start, end = cfg.range_dates
    return bucket(docs, granularity, cfg.anchor_date, per_author, start, end, tokens=tokens)


# -- stages -------------------------------------------------------------------

def stage_ingest(cfg: PipelineConfig, workdir: Path) -> dict:
    if not cfg.input:
        raise ConfigError("input: no archive path given")
    loaded = load_documents(cfg.input, cfg.format, cfg.strict)
    docs = loaded.documents
    duplicates = 0
    if cfg.drop_duplicates:
        kept = drop_duplicate_texts(docs)
        duplicates = len(docs) - len(kept)
        docs = kept
    start, end = cfg.range_dates
    in_range = [d for d in docs if (start is None or d.timestamp.date() >= start)
                and (end is None or d.timestamp.date() <= end)]
    tok = TokenizerConfig(keep_mentions=cfg.keep_mentions)
    in_range.sort(key=lambda d: (d.timestamp, d.id))
    with atomic_open(workdir / DOCUMENTS) as fh:
        for d in in_range:
            row = d.to_json()
            row["tokens"] = tokenize(d.text, tok)
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    buckets = bucket(in_range, cfg.granularity, cfg.anchor_date, True, start, end) if in_range else []
    write_rows(workdir / BUCKETS, ["window_start", "window", "author", "documents", "empty"],
               [[b.window.start.isoformat(), b.window.label, b.author, len(b.documents), int(b.is_empty)]
                for b in buckets])
    return {"loaded": len(loaded.documents), "skipped": loaded.skipped, "duplicates_dropped": duplicates,
            "out_of_range": len(docs) - len(in_range), "documents": len(in_range)}


def stage_lexicon(cfg: PipelineConfig, workdir: Path) -> dict:
    if not cfg.lexicon:
        raise LexiconError("lexicon: no reference lexicon path given")
    ref = ReferenceLexicon.load(cfg.lexicon)
    author = cfg.corpus_author if cfg.per_author_base_terms else None
    corpus = _buckets(cfg, workdir, "lexicon", cfg.granularity, False, author)
    base = select_base_terms(corpus, cfg.min_count, cfg.max_base_terms)
    base.write_csv(workdir / BASE_TERMS)
    everything = corpus if author is None else _buckets(cfg, workdir, "lexicon", cfg.granularity, False)
    terms = extract_terms(everything, ref, cfg.rare_multiplier, cfg.sig_multiplier, cfg.min_occurrences,
                          cfg.min_ngram_count, cfg.min_word_count)
    terms.write_csv(workdir / TERMS)
    return {"base_terms": len(base), "terms": len(terms), "reference_entries": len(ref.entries)}


def corpusnet_build(cfg: PipelineConfig, workdir: Path) -> cn.CorpusNetwork:
    base = TermSet.read_csv(_need(workdir, BASE_TERMS, "corpusnet"), BASE)
    buckets = _buckets(cfg, workdir, "corpusnet", cfg.granularity, cfg.corpus_author is not None, cfg.corpus_author)
    net = cn.build_corpus_network(buckets, base, cfg.threshold, cfg.anchor_date)
    for n in net.graph.nodes:
        net.graph.node_attrs[n]["window_start"] = net.bucket_meta[n].window.start.isoformat()
        net.graph.node_attrs[n]["granularity"] = net.bucket_meta[n].window.granularity
        net.graph.node_attrs[n]["tokens"] = net.bucket_meta[n].token_total
    write_graphml(net.graph, workdir / CORPUS_GRAPHML)
    write_dot(net.graph, workdir / CORPUS_DOT, name="corpus_network")
    return net


def load_corpus_network(cfg: PipelineConfig, workdir: Path) -> cn.CorpusNetwork:
    g = read_graphml(_need(workdir, CORPUS_GRAPHML, "corpusnet"))
    meta = {}
    for n in g.nodes:
        a = g.node_attrs[n]
        window = window_for(date.fromisoformat(a["window_start"]), a["granularity"], cfg.anchor_date)
        meta[n] = cn.BucketMeta(window, a["author"], int(a["documents"]), int(a["tokens"]))
    return cn.CorpusNetwork(g, meta, cfg.threshold, cfg.anchor_date)


def corpusnet_cluster(cfg: PipelineConfig, workdir: Path) -> Partition:
    net = load_corpus_network(cfg, workdir)
    if net.graph.edge_count == 0:
        p = Partition.singletons(net.graph.nodes)
    else:
        p = louvain(net.graph, cfg.seed)
    write_partition(p, workdir / CORPUS_PARTITION, net.graph.nodes)
    write_graphml(net.graph, workdir / CORPUS_GRAPHML, p)
    write_dot(net.graph, workdir / CORPUS_DOT, p, name="corpus_network")
    return p


def corpusnet_diagnose(cfg: PipelineConfig, workdir: Path) -> dict:
    net = load_corpus_network(cfg, workdir)
    p = read_partition(_need(workdir, CORPUS_PARTITION, "corpusnet"))
    q = modularity(net.graph, p) if net.graph.edge_count else None
    d = cn.diagnostics(net, p, q)
    write_json(workdir / CORPUS_DIAG, d)
    write_text(workdir / CORPUS_DIAG_TXT, cn.diagnostics_text(d))
    return d


def stage_corpusnet(cfg: PipelineConfig, workdir: Path) -> dict:
    net = corpusnet_build(cfg, workdir)
    corpusnet_cluster(cfg, workdir)
    d = corpusnet_diagnose(cfg, workdir)
    return {"nodes": d["nodes"], "edges": d["edges"], "communities": len(d["communities"]),
            "modularity": d["modularity"], "all_contiguous": d["all_contiguous"],
            "excluded_empty": len(net.excluded_empty)}


def _biweekly(cfg: PipelineConfig, workdir: Path, stage: str) -> Tuple[List[CorpusBucket], List[TimeWindow]]:
    buckets = _buckets(cfg, workdir, stage, BIWEEKLY, True)
    windows = sorted({b.window for b in buckets}, key=lambda w: w.start)
    return buckets, windows


def topics_build(cfg: PipelineConfig, workdir: Path) -> List[tn.Subtopic]:
    terms = TermSet.read_csv(_need(workdir, TERMS, "topicnet"))
    buckets, _ = _biweekly(cfg, workdir, "topicnet")
    summary, subtopics = [], []
    for b in buckets:
        if b.is_empty or len(terms) == 0:
            continue
        net = tn.build_semantic_network(b, terms)
        subs = tn.extract_subtopics(net, cfg.seed)
        summary.append([b.author, b.window.start.isoformat(), len(net.graph), net.graph.edge_count, len(subs)])
        subtopics.extend(subs)
    write_rows(workdir / SEMANTIC_SUMMARY, ["candidate", "window_start", "nodes", "edges", "subtopics"], summary)
    tn.write_subtopics(subtopics, workdir / SUBTOPICS)
    return subtopics


def topics_merge(cfg: PipelineConfig, workdir: Path) -> List[tn.Topic]:
    subtopics = tn.read_subtopics(_need(workdir, SUBTOPICS, "topicnet"))
    g = tn.build_subtopic_network(subtopics, cfg.min_jaccard)
    topics = tn.merge_topics(g, subtopics, cfg.seed, cfg.keep_isolated)
    write_graphml(g, workdir / SUBTOPIC_GRAPHML)
    write_json(workdir / TOPICS, {"min_jaccard": cfg.min_jaccard, "keep_isolated": cfg.keep_isolated,
                                  "subtopics": len(subtopics), "isolated_subtopics": len(g.isolated_nodes()),
                                  # choices the semantic-network step makes without a flag
                                  "empty_windows_skipped": True, "isolated_terms_dropped": True,
                                  "topics": tn.topics_to_json(topics)})
    write_text(workdir / TOPICS_TXT, tn.topic_listing(topics, cfg.top_k))
    return topics


def load_topics(workdir: Path, stage: str = "dynamics") -> List[tn.Topic]:
    data = read_json(_need(workdir, TOPICS, stage))
    return tn.topics_from_json(data["topics"])


def stage_topicnet(cfg: PipelineConfig, workdir: Path) -> dict:
    subtopics = topics_build(cfg, workdir)
    topics = topics_merge(cfg, workdir)
    networks = sum(1 for _ in open(workdir / SEMANTIC_SUMMARY, encoding="utf-8")) - 1
    return {"semantic_networks": networks, "subtopics": len(subtopics), "topics": len(topics)}


def dynamics_coverage(cfg: PipelineConfig, workdir: Path) -> dyn.CoverageMatrix:
    topics = load_topics(workdir)
    buckets, windows = _biweekly(cfg, workdir, "dynamics")
    cov = dyn.coverage_matrix(buckets, topics, windows, threshold=cfg.coverage_threshold)
    cov.write_csv(workdir / COVERAGE)
    return cov


def _coverage_windows(cfg: PipelineConfig, workdir: Path) -> dyn.CoverageMatrix:
    return dyn.CoverageMatrix.read_csv(_need(workdir, COVERAGE, "dynamics"), cfg.coverage_threshold)


def dynamics_events(cfg: PipelineConfig, workdir: Path) -> List[dyn.FollowEvent]:
    cov = _coverage_windows(cfg, workdir)
    events = dyn.detect_follow_events(cov) if len(cov.windows) >= 2 else []
    dyn.write_events(events, workdir / EVENTS)
    write_json(workdir / SENSITIVITY, dyn.sensitivity(cov) if len(cov.windows) >= 2 else {})
    return events


def dynamics_scores(cfg: PipelineConfig, workdir: Path) -> Dict[str, dyn.Score]:
    cov = _coverage_windows(cfg, workdir)
    events = dyn.read_events(_need(workdir, EVENTS, "dynamics"), cov.windows)
    board = dyn.scores(events, cov.candidates, cfg.score_unit)
    g = dyn.follower_network(events, cov.candidates)
    write_graphml(g, workdir / FOLLOWER_GRAPHML)
    write_dot(g, workdir / FOLLOWER_DOT, name="follower_network")
    dyn.write_scores(board, workdir / SCORES)
    return board


def stage_dynamics(cfg: PipelineConfig, workdir: Path) -> dict:
    cov = dynamics_coverage(cfg, workdir)
    events = dynamics_events(cfg, workdir)
    board = dynamics_scores(cfg, workdir)
    return {"candidates": len(cov.candidates), "windows": len(cov.windows), "events": len(events),
            "covered_cells": int(cov.covered.sum()), "scored": len(board)}


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "lexicon": stage_lexicon,
    "corpusnet": stage_corpusnet,
    "topicnet": stage_topicnet,
    "dynamics": stage_dynamics,
}


# -- manifest and orchestration -----------------------------------------------

def read_manifest(workdir: Path) -> Optional[dict]:
    path = Path(workdir) / MANIFEST
    return read_json(path) if path.is_file() else None


def manifest_config(path) -> PipelineConfig:
    data = read_json(path)
    if "config" not in data:
        raise ConfigError(f"{path} is not a run manifest")
    return PipelineConfig.from_dict(data["config"])


def _base_manifest(cfg: PipelineConfig) -> dict:
    return {"config": cfg.to_dict(), "config_hash": cfg.digest(),
            "inputs": {"archive_sha256": file_sha256(cfg.input) if cfg.input else None,
                       "lexicon_sha256": file_sha256(cfg.lexicon) if cfg.lexicon else None},
            "seeds": {"corpusnet_louvain": cfg.seed, "semantic_louvain": cfg.seed, "topic_louvain": cfg.seed},
            "stages": {}, "status": "incomplete"}


def run_stage(stage: str, cfg: PipelineConfig, workdir, manifest: Optional[dict] = None) -> dict:
    """Run one stage and record it in the workdir manifest; raises StageError on failure."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    manifest = manifest if manifest is not None else (read_manifest(workdir) or _base_manifest(cfg))
    manifest.update({k: v for k, v in _base_manifest(cfg).items() if k not in ("stages", "status")})
    try:
        stats = STAGE_FUNCS[stage](cfg, workdir)
    except StageError as exc:
        manifest["stages"][stage] = {"status": "failed", "error": str(exc)}
        manifest.update(status="failed", failed_stage=stage)
        write_json(workdir / MANIFEST, manifest)
        raise
    except INPUT_ERRORS as exc:
        manifest["stages"][stage] = {"status": "failed", "error": str(exc)}
        manifest.update(status="failed", failed_stage=stage)
        write_json(workdir / MANIFEST, manifest)
        raise StageError(stage, str(exc), 2) from exc
    except Exception as exc:
        log.exception("stage %s failed", stage)
        manifest["stages"][stage] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
        manifest.update(status="failed", failed_stage=stage)
        write_json(workdir / MANIFEST, manifest)
        raise StageError(stage, f"{type(exc).__name__}: {exc}", 1) from exc
    manifest["stages"][stage] = {"status": "ok", "outputs": list(STAGE_OUTPUTS[stage]), "stats": stats}
    manifest.pop("failed_stage", None)
    done = all(manifest["stages"].get(s, {}).get("status") == "ok" for s in STAGES)
    manifest["status"] = "complete" if done else "incomplete"
    if done:
        manifest["summary"] = _summary(manifest)
    write_json(workdir / MANIFEST, manifest)
    return stats


def _summary(manifest: dict) -> dict:
    st = manifest["stages"]
    return {"corpus_modularity": st["corpusnet"]["stats"]["modularity"],
            "corpus_communities": st["corpusnet"]["stats"]["communities"],
            "semantic_networks": st["topicnet"]["stats"]["semantic_networks"],
            "subtopics": st["topicnet"]["stats"]["subtopics"],
            "topics": st["topicnet"]["stats"]["topics"],
            "follow_events": st["dynamics"]["stats"]["events"]}


def artifact_dir(cfg: PipelineConfig, out_root) -> Path:
    return Path(out_root) / f"run-{cfg.digest()}"


def run_pipeline(cfg: PipelineConfig, workdir) -> dict:
    """Run all stages in order into ``workdir``; returns the manifest.

    Raises:
        StageError: naming the failed stage; artifacts written so far remain.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    manifest = _base_manifest(cfg)
    for stage in STAGES:
        log.info("stage %s", stage)
        run_stage(stage, cfg, workdir, manifest)
    return manifest


# -- report -------------------------------------------------------------------

class ReportError(RuntimeError):
    def __init__(self, missing: List[str]):
        super().__init__("artifact directory incomplete; missing: " + ", ".join(missing))
        self.missing = missing


def report_data(workdir, top: int = 5) -> dict:
    workdir = Path(workdir)
    missing = [name for name in REPORT_INPUTS if not (workdir / name).is_file()]
    if missing:
        raise ReportError(missing)
    manifest = read_json(workdir / MANIFEST)
    diag = read_json(workdir / CORPUS_DIAG)
    topics = tn.topics_from_json(read_json(workdir / TOPICS)["topics"])
    g = read_graphml(workdir / FOLLOWER_GRAPHML)
    edges = sorted(((u, v, w) for (u, v), w in g.edges.items()), key=lambda e: (-e[2], e[0], e[1]))
    with open(workdir / SCORES, newline="", encoding="utf-8") as fh:
        rows = [(r["candidate"], int(r["leadership"]), int(r["engagement"])) for r in csv.DictReader(fh)]
    rows.sort(key=lambda r: (-r[1], -r[2], r[0]))
    return {
        "summary": manifest.get("summary", {}),
        "timeline": diag["communities"],
        "modularity": diag["modularity"],
        "quasi_linearity": diag["quasi_linearity"]["fraction_adjacent"],
        "topics": [{"id": t.id, "top_terms": [term for term, _ in t.ranked_terms()[:top]]} for t in topics],
        "follow_edges": [{"follower": u, "leader": v, "weight": int(w) if float(w).is_integer() else w}
                         for u, v, w in edges],
        "scoreboard": [{"candidate": c, "leadership": l, "engagement": e} for c, l, e in rows],
    }


def report(workdir, fmt: str = "text", top: int = 5) -> str:
    """Render the cluster timeline, topics, follower edges and scoreboard."""
    data = report_data(workdir, top)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    out = ["== Cluster timeline =="]
    if data["modularity"] is not None:
        out.append(f"modularity {data['modularity']:.4f}")
    for c in data["timeline"]:
        out.append(f"  cluster {c['community']}: {c['start']} .. {c['end']}  ({c['size']} buckets, "
                   f"{'contiguous' if c['contiguous'] else 'non-contiguous'}, mean docs {c['mean_docs']:.1f})")
    if data["quasi_linearity"] is not None:
        out.append(f"  quasi-linearity {data['quasi_linearity']:.3f} (over non-isolated buckets)")
    out.append("")
    out.append("== Topics ==")
    for t in data["topics"]:
        out.append(f"  {t['id']}. " + "; ".join(t["top_terms"]))
    out.append("")
    out.append("== Leader/follower edges (follower -> leader) ==")
    for e in data["follow_edges"]:
        out.append(f"  {e['follower']} -> {e['leader']}: {e['weight']}")
    if not data["follow_edges"]:
        out.append("  (none)")
    out.append("")
    out.append("== Scoreboard ==")
    out.append(f"  {'candidate':<20} {'leadership':>10} {'engagement':>10}")
    for s in data["scoreboard"]:
        out.append(f"  {s['candidate']:<20} {s['leadership']:>10} {s['engagement']:>10}")
    return "\n".join(out) + "\n"
