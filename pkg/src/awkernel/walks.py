"""Walk enumeration and sampling, anonymization and walk feature encodings.

Conventions used throughout the package:

* a walk of length ``l`` has ``l`` nodes (``l - 1`` steps) and may backtrack;
* anonymous-walk labels are 1-based: ``(0, 9, 8, 11, 9) -> (1, 2, 3, 4, 2)``;
* ``R(phi)`` is the concatenation of ``l`` blocks of width ``l``. Inside a
  block label ``k`` sets position ``l - k``, so the bits read right to left:
  ``(1, 2, 3, 1)`` encodes as ``0001 0010 0100 0001``.

Walk sets are returned as integer arrays with one walk per row.
"""

from __future__ import annotations

import itertools

import numpy as np

from .graph import Graph

DEFAULT_ENUM_CAP = 200_000


class EnumerationOverflow(RuntimeError):
    """Too many walks to enumerate; sample instead."""


class EncodingError(ValueError):
    pass


def node_seed(seed: int, u: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(u)])


def graph_seed(seed: int, graph_index: int) -> int:
    """Stable per-graph seed derived from a global seed."""
    return int(np.random.SeedSequence([int(seed), int(graph_index)]).generate_state(1)[0])


def count_walks(g: Graph, l: int) -> np.ndarray:
    """Number of ``l``-node walks starting at every node (float, exact up to 2**53)."""
    counts = np.ones(g.node_count)
    indptr, indices = g.csr
    for _ in range(l - 1):
        counts = np.add.reduceat(np.append(counts[indices], 0.0), indptr[:-1]) * (g.degrees > 0)
    return counts


def _expand(g: Graph, walks: np.ndarray, l: int) -> np.ndarray:
    indptr, indices = g.csr
    deg = g.degrees
    for _ in range(l - 1):
        last = walks[:, -1]
        reps = deg[last]
        parent = np.repeat(np.arange(len(walks)), reps)
        starts = np.repeat(indptr[last], reps)
        offs = np.arange(len(parent)) - np.repeat(np.cumsum(reps) - reps, reps)
        walks = np.concatenate([walks[parent], indices[starts + offs][:, None]], axis=1)
    return walks


def enumerate_walks(g: Graph, u: int, l: int, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """All walks of ``l`` nodes starting at ``u``, in lexicographic order."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if not 0 <= u < g.node_count:
        raise ValueError(f"node {u} not in graph")
    total = count_walks(g, l)[u]
    if total > cap:
        raise EnumerationOverflow(f"{int(total)} walks from node {u} exceed cap {cap}; use sampling")
    if l >= 2 and g.degrees[u] == 0:
        return np.zeros((0, l), dtype=np.int64)
    return _expand(g, np.array([[u]], dtype=np.int64), l)


def enumerate_graph_walks(g: Graph, l: int, cap: int = DEFAULT_ENUM_CAP):
    """All ``l``-node walks from every node.

    Returns ``(walks, owner)`` where ``owner[i]`` is the start node of row i.
    ``cap`` bounds the per-node count.
    """
    counts = count_walks(g, l)
    if len(counts) and counts.max() > cap:
        raise EnumerationOverflow(f"{int(counts.max())} walks from one node exceed cap {cap}")
    start = np.arange(g.node_count, dtype=np.int64)
    if l >= 2:
        start = start[g.degrees > 0]
    walks = _expand(g, start[:, None], l)
    return walks, walks[:, 0].copy()


def _walk_from_uniforms(g: Graph, starts: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    indptr, indices = g.csr
    deg = g.degrees
    walks = np.empty((len(starts), uniforms.shape[1] + 1), dtype=np.int64)
    walks[:, 0] = cur = starts
    for s in range(uniforms.shape[1]):
        pick = np.minimum((uniforms[:, s] * deg[cur]).astype(np.int64), deg[cur] - 1)
        cur = indices[indptr[cur] + pick]
        walks[:, s + 1] = cur
    return walks


def sample_walks(g: Graph, u: int, l: int, m: int, seed: int) -> np.ndarray:
    """``m`` uniform random walks of ``l`` nodes from ``u``; deterministic in (seed, u)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if l >= 2 and g.degrees[u] == 0:
        return np.zeros((0, l), dtype=np.int64)
    uniforms = node_seed(seed, u).random((m, l - 1))
    return _walk_from_uniforms(g, np.full(m, u, dtype=np.int64), uniforms)


def sample_graph_walks(g: Graph, l: int, m: int, seed: int):
    """``sample_walks`` for every node, batched. Returns ``(walks, owner)``."""
    nodes = np.arange(g.node_count)
    if l >= 2:
        nodes = nodes[g.degrees > 0]
    if len(nodes) == 0:
        return np.zeros((0, l), dtype=np.int64), np.zeros(0, dtype=np.int64)
    uniforms = np.concatenate([node_seed(seed, u).random((m, l - 1)) for u in nodes])
    owner = np.repeat(nodes, m).astype(np.int64)
    return _walk_from_uniforms(g, owner, uniforms), owner


def anonymize_many(walks: np.ndarray) -> np.ndarray:
    """Vectorized :func:`anonymize` over the rows of ``walks``."""
    walks = np.asarray(walks)
    if walks.ndim != 2:
        raise ValueError("expected a 2-D array of walks")
    if walks.size == 0:
        return np.zeros(walks.shape, dtype=np.int64)
    first = np.argmax(walks[:, :, None] == walks[:, None, :], axis=2)
    is_new = first == np.arange(walks.shape[1])
    rank = np.cumsum(is_new, axis=1)
    return np.take_along_axis(rank, first, axis=1).astype(np.int64)


def anonymize(walk) -> tuple:
    return tuple(int(x) for x in anonymize_many(np.asarray(walk)[None, :])[0])


def sample_anonymous_walks(g: Graph, u: int, l: int, m: int, seed: int) -> np.ndarray:
    return anonymize_many(sample_walks(g, u, l, m, seed))


def is_anonymous_walk(labels) -> bool:
    top = 0
    for x in labels:
        if x < 1 or x > top + 1:
            return False
        top = max(top, x)
    return len(labels) > 0 and labels[0] == 1


def aw_universe(l: int) -> np.ndarray:
    """Every anonymous walk of ``l`` nodes a simple graph can produce.

    These are the restricted-growth strings with no two equal neighbours.
    """
    out = []

    def grow(prefix, top):
        if len(prefix) == l:
            out.append(prefix)
            return
        for x in range(1, top + 2):
            if x != prefix[-1]:
                grow(prefix + (x,), max(top, x))

    grow((1,), 1)
    return np.array(out, dtype=np.int64).reshape(-1, l)


def encode_aws(labels: np.ndarray, l: int | None = None) -> np.ndarray:
    """Rows of anonymous walks -> rows of ``R(phi)`` in ``R^{l*l}``."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim == 1:
        labels = labels[None, :]
    n, width = labels.shape
    l = width if l is None else l
    if width != l:
        raise EncodingError(f"walk has {width} positions, expected {l}")
    if labels.size and (labels.min() < 1 or labels.max() > l):
        raise EncodingError(f"labels must lie in [1, {l}]")
    out = np.zeros((n, l * l))
    cols = np.arange(l) * l + (l - labels)
    out[np.arange(n)[:, None], cols] = 1.0
    return out


def encode_aw(phi, l: int | None = None) -> np.ndarray:
    return encode_aws(np.asarray(phi)[None, :], l)[0]


def normalize_rows(x: np.ndarray) -> np.ndarray:
    """Unit-normalize rows; zero rows stay zero."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)


def encode_walks(walks: np.ndarray, x: np.ndarray, normalized: bool = False) -> np.ndarray:
    """Concatenate unit-normalized node attributes along each walk.

    Pass ``normalized=True`` when ``x`` is already row-normalized.
    """
    xn = np.asarray(x, dtype=np.float64) if normalized else normalize_rows(x)
    walks = np.asarray(walks, dtype=np.int64)
    return xn[walks].reshape(len(walks), walks.shape[1] * xn.shape[1])


def encode_walk(walk, x: np.ndarray) -> np.ndarray:
    return encode_walks(np.asarray(walk)[None, :], x)[0]


def all_restricted_growth(l: int):
    """All restricted-growth strings of length ``l`` (consecutive repeats allowed)."""
    for tail in itertools.product(range(1, l + 1), repeat=l - 1):
        seq = (1,) + tail
        if is_anonymous_walk(seq):
            yield seq
