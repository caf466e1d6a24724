"""File exports: GraphML, DOT, partition CSV, and atomic writes."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import networkx as nx

from .graph import Partition, WeightedGraph


@contextmanager
def atomic_open(path, mode: str = "w"):
    """Write to a temporary sibling file and rename it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": ""}
        with os.fdopen(fd, mode, **kwargs) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text: str) -> None:
    with atomic_open(path) as fh:
        fh.write(text)


def write_json(path, data) -> None:
    write_text(path, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_rows(path, header, rows) -> None:
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def to_networkx(g: WeightedGraph, partition: Optional[Partition] = None):
    G = nx.DiGraph() if g.directed else nx.Graph()
    for n in g.nodes:
        attrs = {k: v for k, v in g.node_attrs.get(n, {}).items() if isinstance(v, (str, int, float, bool))}
        attrs["label"] = n
        if partition is not None:
            attrs["community"] = partition[n]
        G.add_node(n, **attrs)
    for (u, v), w in g.edges.items():
        G.add_edge(u, v, weight=w)
    return G


def write_graphml(g: WeightedGraph, path, partition: Optional[Partition] = None) -> None:
    buf = io.BytesIO()
    nx.write_graphml(to_networkx(g, partition), buf)
    with atomic_open(path, "wb") as fh:
        fh.write(buf.getvalue())


def read_graphml(path) -> WeightedGraph:
    G = nx.read_graphml(path)
    g = WeightedGraph(directed=G.is_directed())
    for n, attrs in G.nodes(data=True):
        g.add_node(n, **{k: v for k, v in attrs.items() if k not in ("label", "community")})
    for u, v, attrs in G.edges(data=True):
        g.add_edge(u, v, attrs.get("weight", 1.0))
    return g


def _dot_id(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_string(g: WeightedGraph, partition: Optional[Partition] = None, name: str = "G") -> str:
    kind, arrow = ("digraph", "->") if g.directed else ("graph", "--")
    lines = [f"{kind} {_dot_id(name)} {{"]
    for n in g.nodes:
        attrs = [f"label={_dot_id(n)}"]
        if partition is not None:
            attrs.append(f"community={partition[n]}")
        lines.append(f"  {_dot_id(n)} [{', '.join(attrs)}];")
    for (u, v), w in g.edges.items():
        lines.append(f"  {_dot_id(u)} {arrow} {_dot_id(v)} [weight={w!r}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(g: WeightedGraph, path, partition: Optional[Partition] = None, name: str = "G") -> None:
    write_text(path, dot_string(g, partition, name))


def write_partition(p: Partition, path, order=None) -> None:
    nodes = order if order is not None else list(p.assignment)
    write_rows(path, ["node", "community"], [[n, p[n]] for n in nodes])


def read_partition(path) -> Partition:
    with open(path, newline="", encoding="utf-8") as fh:
        return Partition({r["node"]: int(r["community"]) for r in csv.DictReader(fh)})
