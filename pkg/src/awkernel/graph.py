"""Graph container, TUDataset I/O and attribute helpers."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

ATTRIBUTE_KINDS = ("categorical-one-hot", "continuous", "none")


class DatasetError(Exception):
    """Raised when a dataset directory is missing files or is malformed."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with per-node attribute vectors.

    ``edges`` holds each undirected edge once as a row ``(u, v)``.  Use
    :meth:`from_edges` to build a normalized graph from arbitrary edge lists;
    the raw constructor keeps its inputs untouched so that :func:`validate`
    can report problems.
    """

    node_count: int
    edges: np.ndarray
    attributes: np.ndarray
    label: Optional[int] = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_edges(cls, node_count, edges, attributes=None, label=None, meta=None):
        """Build a graph, symmetrizing and deduplicating ``edges``.

        Self-loops are dropped. Missing attributes become a constant column.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            e = e[e[:, 0] != e[:, 1]]
            e = np.unique(np.sort(e, axis=1), axis=0)
        if attributes is None:
            attributes = np.ones((node_count, 1))
        x = np.asarray(attributes, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        return cls(int(node_count), e, x, label, dict(meta or {}))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def dim(self) -> int:
        return int(np.shape(self.attributes)[1])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` adjacency with neighbor lists sorted ascending."""
        n = self.node_count
        if len(self.edges) == 0:
            return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        return np.cumsum(indptr), dst.astype(np.int64)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    def neighbors(self, u: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[u]:indptr[u + 1]]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count))
        if len(self.edges):
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def component_count(self) -> int:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import connected_components

        indptr, indices = self.csr
        m = csr_matrix((np.ones(len(indices)), indices, indptr),
                       shape=(self.node_count, self.node_count))
        return int(connected_components(m, directed=False)[0])

    def with_attributes(self, attributes) -> "Graph":
        return replace(self, attributes=np.asarray(attributes, dtype=np.float64))

    def permute(self, perm: Sequence[int]) -> "Graph":
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        x = np.empty_like(self.attributes)
        x[perm] = self.attributes
        meta = dict(self.meta)
        if "node_labels" in meta:
            lab = np.asarray(meta["node_labels"])
            meta["node_labels"] = np.empty_like(lab)
            meta["node_labels"][perm] = lab
        return Graph.from_edges(self.node_count, perm[self.edges], x, self.label, meta)


def disjoint_union(*graphs: Graph, label=None) -> Graph:
    offset = 0
    edges, attrs = [], []
    for g in graphs:
        edges.append(g.edges + offset)
        attrs.append(g.attributes)
        offset += g.node_count
    meta = {}
    if graphs and all("node_labels" in g.meta for g in graphs):
        meta["node_labels"] = np.concatenate([g.meta["node_labels"] for g in graphs])
    return Graph.from_edges(offset, np.concatenate(edges), np.concatenate(attrs), label, meta)


@dataclass
class GraphCollection:
    graphs: list
    class_count: int
    attribute_kind: str = "none"
    name: str = ""

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    @property
    def labels(self) -> np.ndarray:
        return np.array([g.label for g in self.graphs])

    @property
    def max_degree(self) -> int:
        return max((int(g.degrees.max()) if g.node_count else 0) for g in self.graphs)

    def subset(self, idx) -> "GraphCollection":
        return GraphCollection([self.graphs[i] for i in idx], self.class_count,
                               self.attribute_kind, self.name)


def validate(g: Graph) -> list[str]:
    """Return every invariant violation of ``g``; an empty list means ok."""
    problems = []
    n = g.node_count
    if n < 0:
        problems.append(f"negative node_count {n}")
    edges = np.asarray(g.edges).reshape(-1, 2)
    seen = set()
    for u, v in edges.tolist():
        if u == v:
            problems.append(f"self-loop at node {u}")
        for x in (u, v):
            if not 0 <= x < n:
                problems.append(f"dangling endpoint {x} in edge ({u}, {v}) with {n} nodes")
        key = (min(u, v), max(u, v))
        if key in seen:
            problems.append(f"duplicate edge ({u}, {v})")
        seen.add(key)
    rows = list(g.attributes)
    if len(rows) != n:
        problems.append(f"{len(rows)} attribute rows for {n} nodes")
    widths = {len(np.atleast_1d(r)) for r in rows}
    if len(widths) > 1:
        problems.append(f"ragged attributes with widths {sorted(widths)}")
    elif widths and widths.pop() < 1:
        problems.append("attribute dimension is zero")
    return problems


def degree_attributes(g: Graph, max_degree: int) -> Graph:
    """One-hot degree attributes of width ``max_degree + 1`` (clamped)."""
    deg = np.minimum(g.degrees, max_degree)
    x = np.zeros((g.node_count, max_degree + 1))
    x[np.arange(g.node_count), deg] = 1.0
    return g.with_attributes(x)


def with_degree_attributes(coll: GraphCollection, max_degree=None) -> GraphCollection:
    cap = coll.max_degree if max_degree is None else max_degree
    return GraphCollection([degree_attributes(g, cap) for g in coll.graphs],
                           coll.class_count, "categorical-one-hot", coll.name)


# --- TUDataset format -------------------------------------------------------

def _path(dir_path, name, suffix):
    return os.path.join(dir_path, f"{name}_{suffix}.txt")


def _read_rows(path, dtype):
    with open(path) as fh:
        rows = [line.strip() for line in fh if line.strip()]
    return np.array([[dtype(t) for t in r.split(",")] for r in rows], dtype=dtype)


def load_tu_dataset(dir_path, name=None) -> GraphCollection:
    """Load a TUDataset-format directory.

    Node ids are remapped to 0-based ids per graph, duplicate directed edge
    lines collapse to one undirected edge, categorical node labels become
    one-hot vectors and graph labels are remapped to ``0..C-1``.
    """
    if name is None:
        name = os.path.basename(os.path.normpath(dir_path))
    for suffix in ("A", "graph_indicator", "graph_labels"):
        if not os.path.isfile(_path(dir_path, name, suffix)):
            raise DatasetError(f"missing file {_path(dir_path, name, suffix)}")

    indicator = _read_rows(_path(dir_path, name, "graph_indicator"), int)[:, 0]
    graph_labels = _read_rows(_path(dir_path, name, "graph_labels"), int)[:, 0]
    edges = _read_rows(_path(dir_path, name, "A"), int).reshape(-1, 2) - 1
    n_total = len(indicator)
    n_graphs = len(graph_labels)
    if indicator.min() < 1 or indicator.max() > n_graphs:
        raise DatasetError("graph indicator references a graph without a label")

    kind = "none"
    labels_path = _path(dir_path, name, "node_labels")
    attrs_path = _path(dir_path, name, "node_attributes")
    codes = None
    if os.path.isfile(labels_path):
        raw = _read_rows(labels_path, int)[:, 0]
        if len(raw) != n_total:
            raise DatasetError(f"{len(raw)} node labels for {n_total} nodes")
        values, codes = np.unique(raw, return_inverse=True)
    if os.path.isfile(attrs_path):
        x = _read_rows(attrs_path, float)
        kind = "continuous"
    elif codes is not None:
        x = np.zeros((n_total, len(values)))
        x[np.arange(n_total), codes] = 1.0
        kind = "categorical-one-hot"
    else:
        x = np.ones((n_total, 1))
    if len(x) != n_total:
        raise DatasetError(f"{len(x)} node attribute rows for {n_total} nodes")

    if len(edges) and (edges.min() < 0 or edges.max() >= n_total):
        raise DatasetError("edge references a node id outside the indicator range")
    gid = indicator - 1
    if len(edges) and np.any(gid[edges[:, 0]] != gid[edges[:, 1]]):
        bad = edges[np.flatnonzero(gid[edges[:, 0]] != gid[edges[:, 1]])[0]] + 1
        raise DatasetError(f"edge {tuple(bad)} crosses graph boundaries")

    classes, y = np.unique(graph_labels, return_inverse=True)
    order = np.argsort(gid, kind="stable")
    starts = np.searchsorted(gid[order], np.arange(n_graphs + 1))
    local = np.empty(n_total, dtype=np.int64)
    local[order] = np.arange(n_total) - np.repeat(starts[:-1], np.diff(starts))
    edge_graph = gid[edges[:, 0]] if len(edges) else np.zeros(0, dtype=np.int64)
    edge_order = np.argsort(edge_graph, kind="stable")
    edge_starts = np.searchsorted(edge_graph[edge_order], np.arange(n_graphs + 1))

    graphs = []
    for k in range(n_graphs):
        nodes = order[starts[k]:starts[k + 1]]
        e = edges[edge_order[edge_starts[k]:edge_starts[k + 1]]]
        meta = {} if codes is None else {"node_labels": codes[nodes]}
        graphs.append(Graph.from_edges(len(nodes), local[e], x[nodes], int(y[k]), meta))
    return GraphCollection(graphs, len(classes), kind, name)


def _fmt_float(v: float) -> str:
    return repr(float(v))


def write_tu_dataset(coll: GraphCollection, dir_path, name=None) -> None:
    """Write ``coll`` in TUDataset format (1-based global node ids)."""
    name = name or coll.name or os.path.basename(os.path.normpath(dir_path))
    os.makedirs(dir_path, exist_ok=True)
    a_lines, ind_lines, node_lines = [], [], []
    offset = 0
    for k, g in enumerate(coll.graphs, start=1):
        for u, v in g.edges.tolist():
            a_lines.append(f"{u + offset + 1}, {v + offset + 1}")
            a_lines.append(f"{v + offset + 1}, {u + offset + 1}")
        ind_lines.extend([str(k)] * g.node_count)
        if coll.attribute_kind == "categorical-one-hot":
            node_lines.extend(str(int(c)) for c in np.argmax(g.attributes, axis=1))
        elif coll.attribute_kind == "continuous":
            node_lines.extend(", ".join(_fmt_float(v) for v in row) for row in g.attributes)
        offset += g.node_count

    def dump(suffix, lines):
        with open(_path(dir_path, name, suffix), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(line + "\n" for line in lines))

    dump("A", a_lines)
    dump("graph_indicator", ind_lines)
    dump("graph_labels", [str(0 if g.label is None else g.label) for g in coll.graphs])
    if coll.attribute_kind == "categorical-one-hot":
        dump("node_labels", node_lines)
    elif coll.attribute_kind == "continuous":
        dump("node_attributes", node_lines)
