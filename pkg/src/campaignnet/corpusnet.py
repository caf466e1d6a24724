"""Temporal corpus-similarity network: construction, clustering diagnostics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .graph import Partition, WeightedGraph, pearson
from .ingest import DEFAULT_ANCHOR, CorpusBucket, TimeWindow, window_index
from .lexicon import TermSet, frequency_vector

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.6


class CorpusNetError(ValueError):
    pass


@dataclass
class BucketMeta:
    window: TimeWindow
    author: str
    document_count: int
    token_total: int


@dataclass
class CorpusNetwork:
    graph: WeightedGraph
    bucket_meta: Dict[str, BucketMeta]
    threshold: float = DEFAULT_THRESHOLD
    anchor: date = DEFAULT_ANCHOR
    excluded_empty: List[str] = field(default_factory=list)
    constant_nodes: List[str] = field(default_factory=list)

    def position(self, node: str) -> int:
        return window_index(self.bucket_meta[node].window, self.anchor)


def build_corpus_network(buckets: Sequence[CorpusBucket], base: TermSet, threshold: float = DEFAULT_THRESHOLD,
                         anchor: date = DEFAULT_ANCHOR) -> CorpusNetwork:
    """Connect buckets whose relative base-term frequencies correlate at or above ``threshold``.

    Edge weight is the Pearson coefficient. Empty buckets are left out and
    listed in ``excluded_empty``; buckets with a constant frequency vector stay
    as isolated nodes.
    """
    if len(base) == 0:
        raise CorpusNetError("base term set is empty")
    present = [b for b in buckets if not b.is_empty]
    if len(present) < 2:
        raise CorpusNetError(f"need at least 2 non-empty buckets, got {len(present)}")
    present.sort(key=lambda b: (b.window.start, b.author))
    g = WeightedGraph()
    meta = {}
    vectors = {}
    for b in present:
        fv = frequency_vector(b, base)
        g.add_node(b.label, window=b.window.label, author=b.author, documents=len(b.documents))
        meta[b.label] = BucketMeta(b.window, b.author, len(b.documents), b.token_total)
        vectors[b.label] = fv.relative if fv.relative is not None else np.zeros(len(base))
    constant = [n for n in g.nodes if np.ptp(vectors[n]) == 0]
    for n in constant:
        log.warning("bucket %s has a constant base-term vector; left isolated", n)
    labels = g.nodes
    for i, u in enumerate(labels):
        for v in labels[i + 1:]:
            r = pearson(vectors[u], vectors[v])
            if not math.isnan(r) and r > 0 and r >= threshold:
                g.add_edge(u, v, r)
    excluded = [b.label for b in buckets if b.is_empty]
    return CorpusNetwork(g, meta, threshold, anchor, excluded, constant)


@dataclass
class CommunitySpan:
    community: int
    contiguous: bool
    start: str
    end: str
    size: int
    nodes: List[str]


def _communities_by_time(net: CorpusNetwork, p: Partition) -> List[List[str]]:
    groups = [sorted(c, key=lambda n: (net.position(n), n)) for c in p.communities()]
    return sorted(groups, key=lambda c: (net.position(c[0]), c[0]))


def temporal_continuity(net: CorpusNetwork, p: Partition) -> List[CommunitySpan]:
    """Flag each community whose windows form an unbroken run on the window grid.

    Communities are reported in order of their earliest window.
    """
    if not p.covers(net.graph):
        raise CorpusNetError("partition does not cover the corpus network")
    spans = []
    for members in _communities_by_time(net, p):
        positions = sorted({net.position(n) for n in members})
        contiguous = positions[-1] - positions[0] + 1 == len(positions)
        first, last = members[0], members[-1]
        spans.append(CommunitySpan(p[first], contiguous, net.bucket_meta[first].window.label,
                                   net.bucket_meta[last].window.label, len(members), members))
    return spans


@dataclass
class QuasiLinearity:
    fraction_adjacent: float
    considered: int
    adjacent: int
    outliers: List[tuple]
    isolated: List[str]


def strongest_neighbors(net: CorpusNetwork) -> Dict[str, tuple]:
    """Map node -> (strongest neighbour, window gap); ties prefer the closer window."""
    best: Dict[str, tuple] = {}
    for (u, v), w in net.graph.edges.items():
        gap = abs(net.position(u) - net.position(v))
        for a, b in ((u, v), (v, u)):
            key = (-w, gap, net.position(b), b)
            if a not in best or key < best[a][0]:
                best[a] = (key, b, gap)
    return {a: (b, gap) for a, (_, b, gap) in best.items()}


def quasi_linearity(net: CorpusNetwork, outlier_gap: int = 2) -> QuasiLinearity:
    """Share of non-isolated nodes whose strongest edge reaches the next or previous window.

    Nodes whose strongest neighbour lies more than ``outlier_gap`` windows away
    are listed as ``(node, neighbour, gap)`` outliers.
    """
    best = strongest_neighbors(net)
    nodes = [n for n in net.graph.nodes if n in best]
    adjacent = sum(1 for n in nodes if best[n][1] == 1)
    outliers = [(n, best[n][0], best[n][1]) for n in nodes if best[n][1] > outlier_gap]
    isolated = [n for n in net.graph.nodes if n not in best]
    fraction = adjacent / len(nodes) if nodes else math.nan
    return QuasiLinearity(fraction, len(nodes), adjacent, outliers, isolated)


def welch_pvalue(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Welch t-test p-value; degenerate zero-variance samples give 1 or 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.ptp(a) == 0 and np.ptp(b) == 0:
        return 1.0 if a[0] == b[0] else 0.0
    return float(stats.ttest_ind(a, b, equal_var=False).pvalue)


@dataclass
class ClusterActivity:
    communities: List[dict]
    comparisons: List[dict]
    notices: List[str]


def cluster_activity(net: CorpusNetwork, p: Partition) -> ClusterActivity:
    """Mean documents per bucket for each community, with Welch tests between
    chronologically adjacent communities."""
    groups = _communities_by_time(net, p)
    rows = []
    samples = []
    for members in groups:
        docs = [net.bucket_meta[n].document_count for n in members]
        samples.append(docs)
        rows.append({"community": p[members[0]], "start": net.bucket_meta[members[0]].window.label,
                     "end": net.bucket_meta[members[-1]].window.label, "buckets": len(docs),
                     "mean_docs": float(np.mean(docs))})
    comparisons, notices = [], []
    for (ra, sa), (rb, sb) in zip(zip(rows, samples), zip(rows[1:], samples[1:])):
        if len(sa) < 2 or len(sb) < 2:
            notices.append(f"skipped comparison {ra['community']} vs {rb['community']}: community of size 1")
            continue
        comparisons.append({"first": ra["community"], "second": rb["community"],
                            "p_value": welch_pvalue(sa, sb)})
    return ClusterActivity(rows, comparisons, notices)


def diagnostics(net: CorpusNetwork, p: Partition, modularity_value: Optional[float]) -> dict:
    """JSON-ready bundle of all structural diagnostics for a clustered corpus network."""
    spans = temporal_continuity(net, p)
    ql = quasi_linearity(net)
    act = cluster_activity(net, p)
    return {
        "nodes": len(net.graph),
        "edges": net.graph.edge_count,
        "threshold": net.threshold,
        "modularity": modularity_value,
        "communities": [
            {"community": s.community, "start": s.start, "end": s.end, "size": s.size,
             "contiguous": s.contiguous, "mean_docs": a["mean_docs"]}
            for s, a in zip(spans, act.communities)
        ],
        "all_contiguous": all(s.contiguous for s in spans),
        "quasi_linearity": {
            "fraction_adjacent": None if math.isnan(ql.fraction_adjacent) else ql.fraction_adjacent,
            "considered": ql.considered,
            "denominator": "non-isolated nodes",
            "outliers": [{"node": n, "strongest_neighbor": m, "gap": g} for n, m, g in ql.outliers],
            "isolated": ql.isolated,
        },
        "activity_tests": act.comparisons,
        "notices": act.notices,
        "excluded_empty": net.excluded_empty,
        "constant_nodes": net.constant_nodes,
    }


def diagnostics_text(d: dict) -> str:
    lines = [f"corpus network: {d['nodes']} nodes, {d['edges']} edges (threshold {d['threshold']})"]
    if d["modularity"] is not None:
        lines.append(f"modularity: {d['modularity']:.4f}")
    lines.append("community  start     end       size  contiguous  mean_docs")
    for c in d["communities"]:
        lines.append(f"{c['community']:>9}  {c['start']:<8}  {c['end']:<8}  {c['size']:>4}  "
                     f"{'yes' if c['contiguous'] else 'no':<10}  {c['mean_docs']:.1f}")
    ql = d["quasi_linearity"]
    frac = "n/a" if ql["fraction_adjacent"] is None else f"{ql['fraction_adjacent']:.3f}"
    lines.append(f"quasi-linearity: {frac} of {ql['considered']} non-isolated nodes strongest-linked "
                 f"to an adjacent window; {len(ql['outliers'])} outliers beyond 2 windows")
    for o in ql["outliers"]:
        lines.append(f"  outlier {o['node']} -> {o['strongest_neighbor']} (gap {o['gap']})")
    for t in d["activity_tests"]:
        lines.append(f"welch {t['first']} vs {t['second']}: p = {t['p_value']:.4g}")
    lines.extend(d["notices"])
    return "\n".join(lines) + "\n"
