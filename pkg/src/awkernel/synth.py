"""Deterministic generators for the synthetic benchmark collections."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph, GraphCollection, disjoint_union

log = logging.getLogger(__name__)

STRUCTURE_FAMILIES = ("cycle", "wheel", "path", "ladder")
REGULAR_RETRY_CAP = 10_000


class GenerationError(Exception):
    pass


@dataclass(frozen=True)
class SynthSpec:
    """``family`` is a collection name (structure, regular, rings) or a basic family.

    ``noise_fraction=None`` means the collection default (0.1 for structure,
    0 otherwise).
    """

    family: str
    sizes: tuple = ()
    noise_fraction: Optional[float] = None
    seed: int = 0


def _cycle_edges(n, offset=0):
    return [(offset + i, offset + (i + 1) % n) for i in range(n)]


def gen_basic(family: str, n: int) -> Graph:
    """Cycle, wheel, path or ladder.

    For ``ladder`` ``n`` is the number of rungs (``2n`` nodes). A wheel of
    size ``n`` has a hub (node 0) joined to an ``(n-1)``-cycle.
    """
    minimum = {"cycle": 3, "wheel": 3, "path": 2, "ladder": 2}
    if family not in minimum:
        raise ValueError(f"unknown family {family!r}")
    if n < minimum[family]:
        raise ValueError(f"{family} needs n >= {minimum[family]}, got {n}")
    if family == "cycle":
        return Graph.from_edges(n, _cycle_edges(n))
    if family == "wheel":
        rim = [(u + 1, v + 1) for u, v in _cycle_edges(n - 1)]
        return Graph.from_edges(n, rim + [(0, i) for i in range(1, n)])
    if family == "path":
        return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    rails = [(i, i + 1) for i in range(n - 1)] + [(n + i, n + i + 1) for i in range(n - 1)]
    rungs = [(i, n + i) for i in range(n)]
    return Graph.from_edges(2 * n, rails + rungs)


def add_noise_edges(g: Graph, fraction: float, seed) -> Graph:
    """Add ``ceil(fraction * |E|)`` uniformly drawn new edges."""
    if fraction < 0:
        raise ValueError("fraction must be non-negative")
    want = math.ceil(fraction * g.num_edges - 1e-9)
    if want == 0:
        return g
    n = g.node_count
    iu, ju = np.triu_indices(n, k=1)
    present = g.adjacency()[iu, ju] > 0
    free = np.flatnonzero(~present)
    if len(free) < want:
        log.warning("only %d of %d noise edges can be added", len(free), want)
        want = len(free)
    rng = np.random.default_rng(seed)
    pick = rng.choice(free, size=want, replace=False)
    new = np.stack([iu[pick], ju[pick]], axis=1)
    return Graph.from_edges(n, np.concatenate([g.edges, new]), g.attributes, g.label, g.meta)


def random_regular(n: int, d: int, rng, connected=False, retry_cap=REGULAR_RETRY_CAP) -> Graph:
    """Pairing-model sample of a simple d-regular graph on n nodes."""
    if n * d % 2 or d >= n or d < 1:
        raise ValueError(f"no simple {d}-regular graph on {n} nodes")
    stubs = np.repeat(np.arange(n), d)
    for _ in range(retry_cap):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        key = np.sort(pairs, axis=1)
        if len(np.unique(key, axis=0)) != len(key):
            continue
        g = Graph.from_edges(n, key)
        if connected and g.component_count() != 1:
            continue
        return g
    raise GenerationError(f"no simple {d}-regular graph on {n} nodes after {retry_cap} draws")


def gen_structure_dataset(seed=0, per_class=100, size_range=(20, 80), noise=0.1) -> GraphCollection:
    """Cycle/wheel/path/ladder graphs with noise edges; class id = family index.

    Node counts are drawn uniformly from ``size_range`` inclusive; for the
    ladder the rung count is ``n // 2``.
    """
    root = np.random.SeedSequence(seed)
    graphs = []
    children = root.spawn(len(STRUCTURE_FAMILIES) * per_class)
    for c, family in enumerate(STRUCTURE_FAMILIES):
        for i in range(per_class):
            rng = np.random.default_rng(children[c * per_class + i])
            n = int(rng.integers(size_range[0], size_range[1] + 1))
            base = gen_basic(family, n // 2 if family == "ladder" else n)
            g = add_noise_edges(base, noise, rng)
            graphs.append(Graph.from_edges(g.node_count, g.edges, None, c, {"family": family}))
    return GraphCollection(graphs, len(STRUCTURE_FAMILIES), "none", "Structure")


def gen_regular_dataset(seed=0, count=100, n=20, d=5) -> GraphCollection:
    """Class 0: connected d-regular on n nodes; class 1: two disjoint halves."""
    children = np.random.SeedSequence(seed).spawn(count)
    graphs = []
    for i in range(count):
        rng = np.random.default_rng(children[i])
        if i % 2 == 0:
            g = random_regular(n, d, rng, connected=True)
            graphs.append(Graph.from_edges(n, g.edges, None, 0, {"family": f"Reg-{n}-{d}"}))
        else:
            a = random_regular(n // 2, d, rng)
            b = random_regular(n // 2, d, rng)
            g = disjoint_union(a, b)
            graphs.append(Graph.from_edges(n, g.edges, None, 1, {"family": f"2-Reg-{n // 2}-{d}"}))
    return GraphCollection(graphs, 2, "none", "Regular")


def gen_ring_pair(k: int) -> tuple[Graph, Graph]:
    """A ``2k``-cycle and two disjoint ``k``-cycles."""
    if k < 3:
        raise ValueError("k must be >= 3")
    big = Graph.from_edges(2 * k, _cycle_edges(2 * k))
    two = Graph.from_edges(2 * k, _cycle_edges(k) + _cycle_edges(k, offset=k))
    return big, two


def generate(spec: SynthSpec) -> GraphCollection:
    noise = spec.noise_fraction
    if spec.family == "structure":
        kw = {"size_range": tuple(spec.sizes)} if spec.sizes else {}
        return gen_structure_dataset(spec.seed, noise=0.1 if noise is None else noise, **kw)
    if spec.family == "regular":
        kw = {"count": spec.sizes[0]} if spec.sizes else {}
        return gen_regular_dataset(spec.seed, **kw)
    if spec.family in ("ring", "two-rings", "rings"):
        ks = spec.sizes or (4, 6, 8)
        graphs = []
        for k in ks:
            big, two = gen_ring_pair(int(k))
            graphs.append(Graph.from_edges(2 * k, big.edges, None, 0, {"family": f"R{2 * k}"}))
            graphs.append(Graph.from_edges(2 * k, two.edges, None, 1, {"family": f"R{k},{k}"}))
        return GraphCollection(graphs, 2, "none", "Rings")
    if spec.family in STRUCTURE_FAMILIES:
        rng = np.random.default_rng(spec.seed)
        graphs = [add_noise_edges(gen_basic(spec.family, int(n)), noise or 0.0, rng)
                  for n in (spec.sizes or (10,))]
        return GraphCollection([Graph.from_edges(g.node_count, g.edges, None, 0,
                                                 {"family": spec.family}) for g in graphs],
                               1, "none", spec.family)
    raise ValueError(f"unknown synthetic collection {spec.family!r}")
