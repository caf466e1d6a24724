"""Semantic co-occurrence networks, subtopics, and recurring fuzzy topics."""

from __future__ import annotations

import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, Iterable, List, Sequence

from .export import atomic_open
from .graph import DEFAULT_SEED, WeightedGraph, jaccard, louvain
from .ingest import ALL_AUTHORS, BIWEEKLY, CorpusBucket, TimeWindow
from .lexicon import TermSet, count_terms, ngrams

DEFAULT_MIN_JACCARD = 0.1


@dataclass
class SemanticNetwork:
    candidate: str
    window: TimeWindow
    graph: WeightedGraph
    term_counts: Dict[str, int] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return self.graph.edge_count == 0


@dataclass
class Subtopic:
    candidate: str
    window: TimeWindow
    index: int
    terms: frozenset
    term_counts: Dict[str, int]

    @property
    def key(self) -> str:
        return f"{self.candidate}|{self.window.start.isoformat()}|{self.index}"

    def to_json(self) -> dict:
        return {"candidate": self.candidate, "window_start": self.window.start.isoformat(),
                "window_end": self.window.end.isoformat(), "granularity": self.window.granularity,
                "index": self.index,
                "terms": sorted(self.terms, key=lambda t: (-self.term_counts.get(t, 0), t)),
                "term_counts": {t: self.term_counts[t] for t in sorted(self.term_counts)}}

    @classmethod
    def from_json(cls, d: dict) -> "Subtopic":
        window = TimeWindow(date.fromisoformat(d["window_start"]), date.fromisoformat(d["window_end"]),
                            d.get("granularity", BIWEEKLY))
        return cls(d["candidate"], window, int(d["index"]), frozenset(d["terms"]),
                   {t: int(c) for t, c in d["term_counts"].items()})


@dataclass
class Topic:
    id: int
    membership: Dict[str, float]
    constituent_subtopics: List[Subtopic] = field(default_factory=list)

    def ranked_terms(self) -> List[tuple]:
        """(term, weight) pairs in decreasing weight, ties by term text."""
        return sorted(self.membership.items(), key=lambda kv: (-kv[1], kv[0]))

    @property
    def total_weight(self) -> float:
        return sum(self.membership.values())

    def to_json(self) -> dict:
        return {"id": self.id,
                "terms": [{"text": t, "weight": w} for t, w in self.ranked_terms()],
                "subtopics": [s.key for s in self.constituent_subtopics]}


def document_terms(tokens: Sequence[str], terms: TermSet) -> set:
    found = set()
    for n in sorted({t.arity for t in terms}):
        for gram in ngrams(tokens, n):
            if gram in terms:
                found.add(gram)
    return found


def build_semantic_network(bucket: CorpusBucket, terms: TermSet) -> SemanticNetwork:
    """Terms occurring in the bucket as nodes; edge weight = documents containing both.

    A network whose bucket has fewer than two term occurrences is returned
    without nodes.
    """
    if bucket.author == ALL_AUTHORS:
        raise ValueError("semantic networks are built per candidate")
    counts = count_terms(bucket.token_lists, terms)
    term_counts = {terms.terms[i].text: int(c) for i, c in enumerate(counts) if c > 0}
    g = WeightedGraph()
    if sum(term_counts.values()) < 2:
        return SemanticNetwork(bucket.author, bucket.window, g, {})
    for t in sorted(term_counts, key=lambda t: terms.index(t)):
        g.add_node(t)
    pair_docs: Counter = Counter()
    for tokens in bucket.token_lists:
        present = sorted(document_terms(tokens, terms), key=terms.index)
        for a, b in itertools.combinations(present, 2):
            pair_docs[(a, b)] += 1
    for (a, b), c in sorted(pair_docs.items(), key=lambda kv: (terms.index(kv[0][0]), terms.index(kv[0][1]))):
        g.add_edge(a, b, c)
    return SemanticNetwork(bucket.author, bucket.window, g, term_counts)


def extract_subtopics(net: SemanticNetwork, seed: int = DEFAULT_SEED) -> List[Subtopic]:
    """One subtopic per Louvain community of the semantic network.

    Isolated single terms are dropped. Indices run in decreasing community size.
    """
    if net.is_empty:
        return []
    p = louvain(net.graph, seed)
    isolated = set(net.graph.isolated_nodes())
    groups = [c for c in p.communities() if not (len(c) == 1 and c[0] in isolated)]
    groups.sort(key=lambda c: (-len(c), min(net.graph.index(t) for t in c)))
    return [Subtopic(net.candidate, net.window, i, frozenset(c), {t: net.term_counts[t] for t in c})
            for i, c in enumerate(groups)]


def build_subtopic_network(subtopics: Sequence[Subtopic], min_jaccard: float = DEFAULT_MIN_JACCARD) -> WeightedGraph:
    """Subtopics as nodes, joined when their term sets' Jaccard index reaches ``min_jaccard``."""
    g = WeightedGraph()
    for s in subtopics:
        g.add_node(s.key)
    by_term: Dict[str, List[int]] = defaultdict(list)
    for i, s in enumerate(subtopics):
        for t in s.terms:
            by_term[t].append(i)
    pairs = set()
    for idx in by_term.values():
        pairs.update(itertools.combinations(idx, 2))
    for i, j in sorted(pairs):
        j_val = jaccard(subtopics[i].terms, subtopics[j].terms)
        if j_val > 0 and j_val >= min_jaccard:
            g.add_edge(subtopics[i].key, subtopics[j].key, j_val)
    return g


def merge_topics(subtopic_net: WeightedGraph, subtopics: Sequence[Subtopic], seed: int = DEFAULT_SEED,
                 keep_isolated: bool = False) -> List[Topic]:
    """Cluster the subtopic network into recurring topics with fuzzy term membership.

    A term's membership weight in a topic is its summed count over the topic's
    subtopics. Topics are numbered from 1 in decreasing total weight.
    """
    by_key = {s.key: s for s in subtopics}
    isolated = set(subtopic_net.isolated_nodes())
    groups: List[List[str]] = []
    if subtopic_net.edge_count:
        p = louvain(subtopic_net, seed)
        groups = [c for c in p.communities() if not (len(c) == 1 and c[0] in isolated)]
    if keep_isolated:
        groups.extend([n] for n in subtopic_net.nodes if n in isolated)
    drafts = []
    for members in groups:
        members = sorted(members, key=subtopic_net.index)
        weights: Counter = Counter()
        for key in members:
            weights.update(by_key[key].term_counts)
        drafts.append((dict(weights), [by_key[k] for k in members]))
    drafts.sort(key=lambda d: (-sum(d[0].values()), d[1][0].key))
    return [Topic(i + 1, w, subs) for i, (w, subs) in enumerate(drafts)]


def write_subtopics(subtopics: Iterable[Subtopic], path) -> None:
    with atomic_open(path) as fh:
        for s in subtopics:
            fh.write(json.dumps(s.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def read_subtopics(path) -> List[Subtopic]:
    with open(path, encoding="utf-8") as fh:
        return [Subtopic.from_json(json.loads(line)) for line in fh if line.strip()]


def topics_to_json(topics: Sequence[Topic]) -> list:
    return [t.to_json() for t in topics]


def topics_from_json(data: list, subtopics: Sequence[Subtopic] = ()) -> List[Topic]:
    by_key = {s.key: s for s in subtopics}
    return [Topic(int(d["id"]), {e["text"]: e["weight"] for e in d["terms"]},
                  [by_key[k] for k in d.get("subtopics", []) if k in by_key])
            for d in data]


def topic_listing(topics: Sequence[Topic], top: int = 5) -> str:
    """Numbered top-k term listing, one topic per line."""
    lines = []
    for t in topics:
        terms = [term for term, _ in t.ranked_terms()[:top]]
        more = "..." if len(t.membership) > top else ""
        lines.append(f"{t.id}. " + "; ".join(terms) + more)
    return "\n".join(lines) + ("\n" if lines else "")
