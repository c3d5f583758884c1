"""Executable property checks shared by ``oracle-check`` and the test suite.

Every check returns a :class:`CheckResult` carrying the measured margin so
callers can print how close a property came to failing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from . import walks as W
from .featuremaps import EmbedConfig, GSKN, LandmarkSet, inv_sqrt_psd, unique_rows
from .graph import Graph, degree_attributes
from .landmarks import kmeans
from .synth import gen_basic, gen_ring_pair


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value={self.value:.3e} threshold={self.threshold:.1e}"


def _with_landmarks(cfg: EmbedConfig, **sets) -> GSKN:
    model = GSKN(cfg)
    model.landmarks = {b: [lm] for b, lm in sets.items()}
    return model


def aw_embedding(g: Graph, l: int, alpha: float = 1.5, epsilon: float = 1e-7) -> np.ndarray:
    """Graph AW map in enumeration mode with every AW of length ``l`` as a landmark."""
    lm = LandmarkSet.from_points(W.encode_aws(W.aw_universe(l), l), alpha, l, epsilon)
    cfg = EmbedConfig(branch="aw", l_aw=l, aw_mode="enumerate", alpha=alpha, epsilon=epsilon)
    return _with_landmarks(cfg, aw=lm).embed_graphs([g])[0]


def ring_separation(ks=(4, 6, 8), alpha: float = 1.5, threshold: float = 1e-3) -> list:
    out = []
    for k in ks:
        big, two = gen_ring_pair(k)
        wl_same = oracle.wl_equivalent(big, two, 2 * k)
        l = k + 2
        cfg = EmbedConfig(branch="aw", l_aw=l, aw_mode="enumerate", q_aw=10_000, alpha=alpha)
        model = GSKN(cfg).fit([big, two])
        e = model.embed_graphs([big, two])
        gap = float(np.linalg.norm(e[0] - e[1]))
        out.append(CheckResult(f"rings k={k}: WL-equal and AW-separated (l={l})",
                               wl_same and gap > threshold, gap, threshold,
                               {"wl_equal": wl_same, "q": model.branch_dims["aw"]}))
    return out


def nystrom_exactness(l: int = 4, alpha: float = 1.5, threshold: float = 1e-6) -> CheckResult:
    feats = W.encode_aws(W.aw_universe(l), l)
    lm = LandmarkSet.from_points(feats, alpha, l, epsilon=0.0)
    gap = oracle.nystrom_gap(feats, lm)
    return CheckResult(f"full-landmark Nystrom gap (l={l}, {len(feats)} AWs)", gap < threshold,
                       gap, threshold)


def small_corpus() -> list:
    """Rings, paths and wheels with at most 10 nodes, degree one-hot attributes."""
    graphs = [gen_basic("cycle", n) for n in (3, 5, 8)]
    graphs += [gen_basic("path", n) for n in (2, 4, 7)]
    graphs += [gen_basic("wheel", n) for n in (4, 6, 10)]
    graphs += list(gen_ring_pair(4)) + list(gen_ring_pair(5))
    return [degree_attributes(g, 9) for g in graphs]


def _relative(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def kernel_consistency(l_aw: int = 4, l_rw: int = 3, alpha: float = 1.5,
                       threshold: float = 1e-5, graphs=None) -> list:
    graphs = small_corpus() if graphs is None else graphs
    pairs = list(itertools.combinations_with_replacement(range(len(graphs)), 2))

    lm = LandmarkSet.from_points(W.encode_aws(W.aw_universe(l_aw), l_aw), alpha, l_aw, 0.0)
    cfg = EmbedConfig(branch="aw", l_aw=l_aw, aw_mode="enumerate", alpha=alpha, epsilon=0.0)
    e = _with_landmarks(cfg, aw=lm).embed_graphs(graphs)
    approx = np.array([e[i] @ e[j] for i, j in pairs])
    exact = np.array([oracle.exact_awgk(graphs[i], graphs[j], l_aw, alpha=alpha) for i, j in pairs])
    aw = CheckResult(f"AW kernel vs exact over {len(pairs)} pairs (relative)",
                     _relative(approx, exact) < threshold, _relative(approx, exact), threshold)

    feats = np.concatenate([W.encode_walks(W.enumerate_graph_walks(g, l_rw)[0], g.attributes)
                            for g in graphs])
    z, _ = unique_rows(feats)
    lm = LandmarkSet.from_points(z, alpha, l_rw, 0.0, branch="walk")
    cfg = EmbedConfig(branch="walk", l_rw=l_rw, walk_mode="enumerate", alpha=alpha, epsilon=0.0)
    e = _with_landmarks(cfg, walk=lm).embed_graphs(graphs)
    approx = np.array([e[i] @ e[j] for i, j in pairs])
    exact = np.array([oracle.exact_rwgk(graphs[i], graphs[j], l_rw, "gauss", alpha)
                      for i, j in pairs])
    rw = CheckResult(f"walk kernel vs exact over {len(pairs)} pairs (relative, {len(z)} landmarks)",
                     _relative(approx, exact) < threshold, _relative(approx, exact), threshold)
    return [aw, rw]


def random_psd(rng, n: int):
    """Random PSD matrix and a shift that keeps ``M + eps I`` well conditioned."""
    rank = int(rng.integers(1, n + 1))
    b = rng.standard_normal((n, rank))
    eps = 0.0 if rank == n else 1e-3
    return b @ b.T / rank, eps


def inv_sqrt_suite(count: int = 100, sizes=(2, 64), seed: int = 0,
                   threshold: float = 1e-6) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(sizes[0], sizes[1] + 1))
        m, eps = random_psd(rng, n)
        r = inv_sqrt_psd(m, eps)
        err = float(np.linalg.norm(r @ r @ (m + eps * np.eye(n)) - np.eye(n)))
        worst = max(worst, err)
    return CheckResult(f"inv_sqrt_psd residual on {count} PSD matrices", worst < threshold,
                       worst, threshold)


def kmeans_monotone_suite(runs: int = 20, points: int = 1000, seed: int = 0,
                          rel_slack: float = 1e-12) -> CheckResult:
    """Largest relative inertia increase between consecutive iterations."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for r in range(runs):
        dim = int(rng.integers(1, 9))
        centers = rng.normal(scale=4.0, size=(int(rng.integers(2, 8)), dim))
        x = centers[rng.integers(len(centers), size=points)] + rng.normal(size=(points, dim))
        res = kmeans(x, int(rng.integers(1, 33)), seed=r)
        h = np.asarray(res.inertia_history)
        if len(h) > 1:
            worst = max(worst, float(np.max((h[1:] - h[:-1]) / np.maximum(h[:-1], 1e-300))))
    return CheckResult(f"kmeans inertia monotone over {runs} runs of {points} points",
                       worst <= rel_slack, worst, rel_slack)


def random_small_graph(rng, max_nodes: int = 10) -> Graph:
    n = int(rng.integers(2, max_nodes + 1))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < rng.uniform(0.2, 0.7)
    keep[int(rng.integers(len(iu)))] = True
    g = Graph.from_edges(n, np.stack([iu[keep], ju[keep]], axis=1))
    return degree_attributes(g, n - 1)


def permutation_suite(count: int = 50, seed: int = 0, threshold: float = 1e-9) -> list:
    rng = np.random.default_rng(seed)
    cfg = EmbedConfig(l_aw=5, l_rw=3, q_aw=16, q_walk=16, aw_mode="enumerate",
                      walk_mode="enumerate")
    worst, reproducible = 0.0, True
    for _ in range(count):
        g = random_small_graph(rng)
        h = g.permute(rng.permutation(g.node_count))
        e1 = GSKN(cfg).fit([g]).embed_graphs([g])[0]
        e2 = GSKN(cfg).fit([g]).embed_graphs([g])[0]
        ep = GSKN(cfg).fit([h]).embed_graphs([h])[0]
        reproducible &= bool(np.array_equal(e1, e2))
        worst = max(worst, float(np.max(np.abs(e1 - ep))))
    return [CheckResult(f"bitwise reproducibility on {count} graphs", reproducible,
                        0.0 if reproducible else 1.0, 0.0),
            CheckResult(f"permutation invariance on {count} graphs", worst <= threshold,
                        worst, threshold)]


def run_all() -> list:
    out = ring_separation()
    out.append(nystrom_exactness())
    out += kernel_consistency()
    out.append(inv_sqrt_suite())
    out.append(kmeans_monotone_suite())
    out += permutation_suite()
    return out
