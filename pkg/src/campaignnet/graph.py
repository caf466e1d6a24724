"""Weighted graphs, partitions, modularity and Louvain community detection.

All three network layers of the toolkit (corpus network, semantic networks,
subtopic network) are clustered with the same code path here.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Hashable, Iterable, List, Sequence, Tuple

import numpy as np

# Moves that improve modularity by less than this are rejected.
MIN_GAIN = 1e-9
DEFAULT_SEED = 42
EXHAUSTIVE_MAX_NODES = 12


class GraphError(ValueError):
    """Raised for structurally invalid graphs or operations undefined on them."""


@dataclass
class WeightedGraph:
    """Labeled weighted graph.

    Undirected edges are stored once, keyed by the node pair in node-insertion
    order. Directed graphs store ordered ``(source, target)`` pairs.
    """

    nodes: List[str] = field(default_factory=list)
    edges: Dict[Tuple[str, str], float] = field(default_factory=dict)
    directed: bool = False
    allow_self_loops: bool = False
    node_attrs: Dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        self._index = {}
        nodes, self.nodes = list(self.nodes), []
        for n in nodes:
            self.add_node(n)
        edges, self.edges = dict(self.edges), {}
        for (u, v), w in edges.items():
            self.add_edge(u, v, w)

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[str, str, float]], nodes: Iterable[str] = (), **kwargs):
        g = cls(nodes=list(nodes), **kwargs)
        for u, v, w in edges:
            g.add_edge(u, v, w)
        return g

    def add_node(self, label: str, **attrs) -> None:
        label = str(label)
        if label not in self._index:
            self._index[label] = len(self.nodes)
            self.nodes.append(label)
        if attrs:
            self.node_attrs.setdefault(label, {}).update(attrs)

    def _key(self, u: str, v: str) -> Tuple[str, str]:
        if self.directed or self._index[u] <= self._index[v]:
            return (u, v)
        return (v, u)

    def add_edge(self, u: str, v: str, weight: float = 1.0) -> None:
        """Add an edge, or overwrite its weight if it already exists."""
        weight = float(weight)
        if not math.isfinite(weight) or weight <= 0:
            raise GraphError(f"edge weight must be finite and > 0, got {weight!r} for ({u}, {v})")
        u, v = str(u), str(v)
        if u == v and not self.allow_self_loops:
            raise GraphError(f"self-loop on {u!r} not allowed")
        self.add_node(u)
        self.add_node(v)
        self.edges[self._key(u, v)] = weight

    def increment_edge(self, u: str, v: str, weight: float = 1.0) -> None:
        u, v = str(u), str(v)
        self.add_node(u)
        self.add_node(v)
        key = self._key(u, v)
        self.add_edge(key[0], key[1], self.edges.get(key, 0.0) + weight)

    def has_edge(self, u: str, v: str) -> bool:
        if u not in self._index or v not in self._index:
            return False
        return self._key(u, v) in self.edges

    def weight(self, u: str, v: str) -> float:
        """Edge weight, 0.0 when the edge is absent."""
        if u not in self._index or v not in self._index:
            return 0.0
        return self.edges.get(self._key(u, v), 0.0)

    def neighbors(self, u: str) -> Dict[str, float]:
        out = {}
        for (a, b), w in self.edges.items():
            if a == u:
                out[b] = w
            elif b == u and not self.directed:
                out[a] = w
        return out

    def index(self, label: str) -> int:
        return self._index[label]

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return math.fsum(self.edges.values())

    def adjacency_lists(self) -> List[Dict[int, float]]:
        """Symmetric index-based adjacency; a self-loop of weight w counts as A_ii = 2w."""
        if self.directed:
            raise GraphError("adjacency_lists is defined for undirected graphs only")
        adj: List[Dict[int, float]] = [dict() for _ in self.nodes]
        for (u, v), w in self.edges.items():
            i, j = self._index[u], self._index[v]
            if i == j:
                adj[i][i] = adj[i].get(i, 0.0) + 2.0 * w
            else:
                adj[i][j] = adj[i].get(j, 0.0) + w
                adj[j][i] = adj[j].get(i, 0.0) + w
        return adj

    def adjacency_matrix(self) -> np.ndarray:
        n = len(self.nodes)
        a = np.zeros((n, n))
        for (u, v), w in self.edges.items():
            i, j = self._index[u], self._index[v]
            if i == j:
                a[i, i] += w if self.directed else 2.0 * w
            else:
                a[i, j] += w
                if not self.directed:
                    a[j, i] += w
        return a

    def degree(self, label: str) -> float:
        """Weighted degree (out-degree for directed graphs)."""
        total = 0.0
        for (u, v), w in self.edges.items():
            if u == label:
                total += 2.0 * w if (v == u and not self.directed) else w
            elif v == label and not self.directed:
                total += w
        return total

    def in_degree(self, label: str) -> float:
        return math.fsum(w for (u, v), w in self.edges.items() if v == label)

    def out_degree(self, label: str) -> float:
        return math.fsum(w for (u, v), w in self.edges.items() if u == label)

    def isolated_nodes(self) -> List[str]:
        touched = set()
        for u, v in self.edges:
            touched.add(u)
            touched.add(v)
        return [n for n in self.nodes if n not in touched]

    def subgraph(self, keep: Iterable[str]) -> "WeightedGraph":
        keep = set(keep)
        g = WeightedGraph(directed=self.directed, allow_self_loops=self.allow_self_loops)
        for n in self.nodes:
            if n in keep:
                g.add_node(n, **self.node_attrs.get(n, {}))
        for (u, v), w in self.edges.items():
            if u in keep and v in keep:
                g.add_edge(u, v, w)
        return g


@dataclass
class Partition:
    """Node to community assignment with dense ids ``0..community_count-1``."""

    assignment: Dict[str, int]

    def __post_init__(self):
        ids = set(self.assignment.values())
        if ids != set(range(len(ids))):
            raise GraphError(f"community ids must be dense 0..k-1, got {sorted(ids)}")

    @classmethod
    def from_labels(cls, nodes: Sequence[str], labels: Sequence[Hashable]) -> "Partition":
        """Build a partition, renumbering labels by order of first appearance."""
        if len(nodes) != len(labels):
            raise GraphError("nodes and labels differ in length")
        dense: Dict[Hashable, int] = {}
        assignment = {}
        for n, lab in zip(nodes, labels):
            assignment[n] = dense.setdefault(lab, len(dense))
        return cls(assignment)

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[str]]) -> "Partition":
        assignment = {}
        for cid, group in enumerate(groups):
            for n in group:
                if n in assignment:
                    raise GraphError(f"node {n!r} assigned twice")
                assignment[n] = cid
        return cls(assignment)

    @classmethod
    def singletons(cls, nodes: Sequence[str]) -> "Partition":
        return cls({n: i for i, n in enumerate(nodes)})

    @classmethod
    def single(cls, nodes: Sequence[str]) -> "Partition":
        return cls({n: 0 for n in nodes})

    @property
    def community_count(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> List[List[str]]:
        groups: List[List[str]] = [[] for _ in range(self.community_count)]
        for n, c in self.assignment.items():
            groups[c].append(n)
        return groups

    def __getitem__(self, node: str) -> int:
        return self.assignment[node]

    def covers(self, g: WeightedGraph) -> bool:
        return set(self.assignment) == set(g.nodes)


def modularity(g: WeightedGraph, p: Partition) -> float:
    """Newman modularity of a partition on a weighted undirected graph.

    Q = sum over communities c of in_c / 2W - (tot_c / 2W)^2, where in_c is the
    (double-counted) weight inside c and tot_c the summed weighted degree.
    """
    if g.directed:
        raise GraphError("modularity is defined for undirected graphs")
    if g.edge_count == 0:
        raise GraphError("modularity is undefined on an edgeless graph")
    if not p.covers(g):
        raise GraphError("partition does not cover the graph's nodes")
    inside: Dict[int, List[float]] = defaultdict(list)
    tot: Dict[int, List[float]] = defaultdict(list)
    for (u, v), w in g.edges.items():
        cu, cv = p[u], p[v]
        tot[cu].append(w)
        tot[cv].append(w)
        if cu == cv:
            inside[cu].append(2.0 * w)
    two_w = 2.0 * g.total_weight
    q = 0.0
    for c, degs in tot.items():
        q += math.fsum(inside.get(c, [])) / two_w - (math.fsum(degs) / two_w) ** 2
    return q


def _local_moves(adj, k, two_m, membership, order, tot) -> bool:
    """Greedy single-node moves until no move gains more than MIN_GAIN.

    Mutates ``membership`` and ``tot``; returns whether anything moved.
    """
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = membership[i]
            links: Dict[int, float] = defaultdict(float)
            for j, w in adj[i].items():
                if j != i:
                    links[membership[j]] += w
            tot[ci] -= k[i]
            own_gain = links.get(ci, 0.0) - k[i] * tot[ci] / two_m
            best, best_gain = ci, own_gain
            for c in sorted(links):
                gain = links[c] - k[i] * tot[c] / two_m
                if gain > best_gain and 2.0 * (gain - own_gain) / two_m > MIN_GAIN:
                    best, best_gain = c, gain
            tot[best] += k[i]
            if best != ci:
                membership[i] = best
                improved = moved_any = True
    return moved_any


def _aggregate(adj, membership):
    """Collapse communities into super-nodes; returns (adj, dense membership)."""
    dense: Dict[int, int] = {}
    labels = [dense.setdefault(c, len(dense)) for c in membership]
    new_adj: List[Dict[int, float]] = [defaultdict(float) for _ in range(len(dense))]
    for i, row in enumerate(adj):
        ci = labels[i]
        for j, w in row.items():
            new_adj[ci][labels[j]] += w
    return [dict(r) for r in new_adj], labels


def louvain_levels(g: WeightedGraph, seed: int = DEFAULT_SEED) -> List[Partition]:
    """Run Louvain and return the partition reached after every improving level.

    The last element is the final result. Node visiting order at every level is
    a shuffle drawn from ``random.Random(seed)``. After the multilevel phase
    converges, single-node moves on the original graph are retried; if any
    succeed the multilevel phase restarts from the refined partition, so the
    result is a local optimum under single-node moves.
    """
    if g.directed:
        raise GraphError("louvain is defined for undirected graphs")
    if g.edge_count == 0:
        raise GraphError("louvain requires at least one edge")
    rng = random.Random(seed)
    base = g.adjacency_lists()
    k = [math.fsum(row.values()) for row in base]
    two_m = math.fsum(k)
    n = len(base)

    def partition_of(labels):
        return Partition.from_labels(g.nodes, labels)

    node_comm = list(range(n))
    levels: List[Partition] = []
    while True:
        adj, node_comm = _aggregate(base, node_comm)
        while True:
            size = len(adj)
            level_k = [math.fsum(row.values()) for row in adj]
            membership = list(range(size))
            tot = list(level_k)
            order = list(range(size))
            rng.shuffle(order)
            if not _local_moves(adj, level_k, two_m, membership, order, tot):
                break
            adj, dense = _aggregate(adj, membership)
            node_comm = [dense[c] for c in node_comm]
            levels.append(partition_of(node_comm))
        membership = list(node_comm)
        tot = defaultdict(float)
        for i, c in enumerate(membership):
            tot[c] += k[i]
        order = list(range(n))
        rng.shuffle(order)
        if not _local_moves(base, k, two_m, membership, order, tot):
            break
        node_comm = membership
        levels.append(partition_of(node_comm))
    if not levels:
        levels.append(partition_of(node_comm))
    return levels


def louvain(g: WeightedGraph, seed: int = DEFAULT_SEED) -> Partition:
    """Louvain community detection (local moves + aggregation until no gain).

    Args:
        g: undirected weighted graph with at least one edge.
        seed: seed of the node-order shuffle; equal seeds give equal output.

    Returns:
        Partition with ids numbered by first appearance in ``g.nodes``.
    """
    return louvain_levels(g, seed)[-1]


@lru_cache(maxsize=None)
def _restricted_growth_strings(n: int) -> np.ndarray:
    """All set partitions of n items as restricted growth strings (Bell(n) rows)."""
    rows = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        reps = (maxes + 2).astype(np.int64)
        idx = np.repeat(np.arange(len(rows)), reps)
        offsets = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
        new_col = offsets.astype(np.int8)
        rows = np.column_stack([rows[idx], new_col])
        maxes = np.maximum(maxes[idx], new_col)
    rows.setflags(write=False)
    return rows


def exhaustive_best_partition(g: WeightedGraph) -> Tuple[Partition, float]:
    """Globally modularity-maximal partition by enumerating every set partition.

    Intended as a test oracle; limited to 12 nodes (Bell(12) = 4,213,597).
    Ties resolve to the lexicographically first restricted growth string.
    """
    n = len(g.nodes)
    if n > EXHAUSTIVE_MAX_NODES:
        raise GraphError(f"exhaustive search limited to {EXHAUSTIVE_MAX_NODES} nodes, got {n}")
    if g.edge_count == 0:
        raise GraphError("modularity is undefined on an edgeless graph")
    a = g.adjacency_matrix()
    k = a.sum(axis=1)
    two_w = k.sum()
    b = a - np.outer(k, k) / two_w
    rgs = _restricted_growth_strings(n)
    q = np.full(len(rgs), np.trace(b))
    for i in range(n):
        for j in range(i + 1, n):
            if b[i, j] != 0.0:
                q += 2.0 * b[i, j] * (rgs[:, i] == rgs[:, j])
    q /= two_w
    best = int(np.argmax(q))
    p = Partition.from_labels(g.nodes, rgs[best].tolist())
    return p, modularity(g, p)


def jaccard(a: Iterable[Hashable], b: Iterable[Hashable]) -> float:
    """|a & b| / |a | b|; 0.0 when both sets are empty."""
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient.

    Returns NaN when either vector is constant (correlation undefined).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"pearson needs equal-length 1-D vectors, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise ValueError("pearson needs at least 2 observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denom == 0.0:  # spread too small to square without underflow
        return math.nan
    r = float(np.dot(dx, dy)) / denom
    return max(-1.0, min(1.0, r))


