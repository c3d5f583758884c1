"""Nystrom feature maps for the anonymous-walk and random-walk kernels.

A branch layer maps a bag of walk features ``x`` (each with ``|x|^2 = l``)
to ``sum_x sigma(Z^T Z)^{-1/2} sigma(Z^T x)`` where ``Z`` holds the landmark
rows and ``sigma(t) = exp(alpha * t - alpha * l)``.  Under the norm
constraint ``sigma(x^T y)`` is exactly the Gaussian kernel
``exp(-alpha/2 |x - y|^2)``, so inner products of projections approximate
kernel values and become exact when every feature is a landmark.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from . import walks as W
from .graph import Graph
from .landmarks import MAX_ITERS, SUBSAMPLE_CAP, TOL, kmeans, subsample

log = logging.getLogger(__name__)

MODEL_FORMAT = "awkernel-model/1"
BRANCHES = ("walk", "aw")


def sigma(x, alpha: float, l: float):
    return np.exp(alpha * np.asarray(x, dtype=np.float64) - alpha * l)


def gaussian_kernel(x, y, alpha: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch {x.shape} vs {y.shape}")
    d = x - y
    return float(np.exp(-0.5 * alpha * np.dot(d, d)))


def inv_sqrt_psd(m, epsilon: float = 0.0, floor: float = 1e-12) -> np.ndarray:
    """``(M + eps I)^{-1/2}`` by eigendecomposition, eigenvalues floored at ``floor``."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-8):
        raise ValueError("matrix is not symmetric")
    m = 0.5 * (m + m.T) + epsilon * np.eye(len(m))
    lam, v = np.linalg.eigh(m)
    lam = np.maximum(lam, floor)
    r = (v / np.sqrt(lam)) @ v.T
    return 0.5 * (r + r.T)


@dataclass
class LandmarkSet:
    """Landmark rows ``Z`` (q x p) with the precomputed ``(sigma(ZZ^T)+eps I)^{-1/2}``."""

    z: np.ndarray
    alpha: float
    l: int
    epsilon: float
    inv_sqrt_gram: np.ndarray
    branch: str = "aw"
    layer: int = 1

    @classmethod
    def from_points(cls, z, alpha, l, epsilon=1e-7, branch="aw", layer=1):
        z = np.asarray(z, dtype=np.float64)
        gram = sigma(z @ z.T, alpha, l)
        return cls(z, float(alpha), int(l), float(epsilon), inv_sqrt_psd(gram, epsilon), branch, layer)

    @property
    def q(self) -> int:
        return len(self.z)

    def gram(self) -> np.ndarray:
        return sigma(self.z @ self.z.T, self.alpha, self.l)

    def kernel_rows(self, features) -> np.ndarray:
        """``sigma(Z x)`` for each feature row; summing these before
        :meth:`finish` equals summing projections."""
        f = np.asarray(features, dtype=np.float64)
        if f.shape[-1] != self.z.shape[1]:
            raise ValueError(f"feature dim {f.shape[-1]} != landmark dim {self.z.shape[1]}")
        return sigma(f @ self.z.T, self.alpha, self.l)

    def finish(self, kernel_sums) -> np.ndarray:
        return np.asarray(kernel_sums) @ self.inv_sqrt_gram


def project(features, lm: LandmarkSet) -> np.ndarray:
    """Nystrom projection of one feature vector (or of each row)."""
    return lm.finish(lm.kernel_rows(features))


def unique_rows(x, counts=None):
    """Distinct rows of ``x`` with multiplicities.

    Rows are compared by their raw bytes, so the output order depends only
    on the set of rows, not on their input order.
    """
    x = np.ascontiguousarray(x)
    if len(x) == 0:
        return x, np.zeros(0, dtype=np.int64)
    keys = x.view(np.dtype((np.void, x.dtype.itemsize * x.shape[1]))).reshape(-1)
    _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    c = np.bincount(inv.reshape(-1), weights=counts, minlength=len(first))
    return x[first], np.rint(c).astype(np.int64)


def fit_landmark_set(features, q: int, alpha: float, l: int, epsilon: float = 1e-7,
                     seed: int = 0, counts=None, branch: str = "aw", layer: int = 1,
                     max_iters: int = MAX_ITERS, tol: float = TOL,
                     subsample_cap: int = SUBSAMPLE_CAP, assume_unique: bool = False) -> LandmarkSet:
    """Fit landmarks by q-means on a multiset of walk features.

    ``counts`` gives multiplicities when rows of ``features`` repeat or have
    already been merged (then pass ``assume_unique=True``).
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or len(f) == 0:
        raise ValueError("need a non-empty 2-D feature array")
    if assume_unique:
        c = np.ones(len(f), dtype=np.int64) if counts is None else np.asarray(counts)
    else:
        f, c = unique_rows(f, counts)
    f, c = subsample(f, subsample_cap, seed, weights=c)
    if q > len(f):
        log.warning("only %d distinct %s features; reducing q from %d", len(f), branch, q)
        q = len(f)
    res = kmeans(f, q, max_iters=max_iters, tol=tol, seed=seed, weights=c)
    return LandmarkSet.from_points(res.centroids, alpha, l, epsilon, branch, layer)


def segment_sum(values: np.ndarray, owner: np.ndarray, n: int) -> np.ndarray:
    if len(owner) == 0:
        return np.zeros((n, values.shape[1]))
    s = sparse.csr_matrix((np.ones(len(owner)), (owner, np.arange(len(owner)))),
                          shape=(n, len(owner)))
    return np.asarray(s @ values)


# --- single-node maps --------------------------------------------------------

def psi_aw_node(g: Graph, u: int, lm: LandmarkSet, l: int, m: int = 30, seed: int = 0,
                mode: str = "sample") -> np.ndarray:
    """Anonymous-walk map of node ``u``: sum of projections of its AW features."""
    if mode == "enumerate":
        w = W.enumerate_walks(g, u, l)
    else:
        w = W.sample_walks(g, u, l, m, seed)
    if len(w) == 0:
        return np.zeros(lm.q)
    return lm.finish(lm.kernel_rows(W.encode_aws(W.anonymize_many(w), l)).sum(axis=0))


def psi_walk_node(g: Graph, u: int, lm: LandmarkSet, l: int, cap: int = W.DEFAULT_ENUM_CAP,
                  m: int = 30, seed: int = 0) -> np.ndarray:
    """Random-walk map of node ``u`` over all its ``l``-node attributed walks."""
    try:
        w = W.enumerate_walks(g, u, l, cap)
    except W.EnumerationOverflow:
        log.warning("walk enumeration overflow at node %d; sampling %d walks", u, m)
        w = W.sample_walks(g, u, l, m, seed)
    if len(w) == 0:
        return np.zeros(lm.q)
    return lm.finish(lm.kernel_rows(W.encode_walks(w, g.attributes)).sum(axis=0))


def graph_pool(node_embeddings) -> np.ndarray:
    e = np.asarray(node_embeddings, dtype=np.float64)
    if e.shape[0] == 0:
        log.warning("pooling an empty graph")
    return e.sum(axis=0)


# --- model ---------------------------------------------------------------------

@dataclass
class EmbedConfig:
    branch: str = "both"
    l_aw: int = 6
    m: int = 30
    l_rw: int = 3
    q_aw: int = 32
    q_walk: int = 32
    alpha: float = 1.5
    epsilon: float = 1e-7
    layers: int = 1
    stack_aw: bool = False
    aw_mode: str = "sample"
    walk_mode: str = "auto"
    enum_cap: int = W.DEFAULT_ENUM_CAP
    kmeans_iters: int = MAX_ITERS
    kmeans_tol: float = TOL
    subsample_cap: int = SUBSAMPLE_CAP
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.branch not in ("both", "walk", "aw"):
            raise ValueError(f"branch must be walk, aw or both, not {self.branch!r}")
        if min(self.l_aw, self.l_rw) < 2:
            raise ValueError("walk lengths must be >= 2")
        if min(self.q_aw, self.q_walk, self.m, self.layers) < 1:
            raise ValueError("q, m and layers must be >= 1")
        if self.alpha <= 0 or self.epsilon < 0:
            raise ValueError("alpha must be positive and epsilon non-negative")
        if self.aw_mode not in ("sample", "enumerate", "auto"):
            raise ValueError(f"bad aw_mode {self.aw_mode!r}")
        if self.walk_mode not in ("sample", "enumerate", "auto"):
            raise ValueError(f"bad walk_mode {self.walk_mode!r}")

    @property
    def branches(self) -> tuple:
        return BRANCHES if self.branch == "both" else (self.branch,)

    def length(self, branch):
        return self.l_aw if branch == "aw" else self.l_rw

    def q(self, branch):
        return self.q_aw if branch == "aw" else self.q_walk

    def mode(self, branch):
        return self.aw_mode if branch == "aw" else self.walk_mode

    def layer_count(self, branch):
        return 1 if branch == "aw" and not self.stack_aw else self.layers


@dataclass
class GraphWalks:
    """Walk bags of one graph, keyed by branch: ``(walks, owner)``."""

    node_count: int
    bags: dict
    aw_labels: Optional[np.ndarray] = None


def _walks_for(g: Graph, l: int, mode: str, m: int, seed: int, cap: int):
    if mode != "sample":
        try:
            return W.enumerate_graph_walks(g, l, cap)
        except W.EnumerationOverflow:
            if mode == "enumerate":
                raise
            log.warning("enumeration of %d-node walks overflows cap %d; sampling %d per node",
                        l, cap, m)
    return W.sample_graph_walks(g, l, m, seed)


def extract_walks(graphs: Sequence[Graph], config: EmbedConfig, start_index: int = 0) -> list:
    """Walk bags for each graph; graph ``i`` draws from seed stream ``start_index + i``."""

    def one(item):
        i, g = item
        bags = {}
        for b in config.branches:
            seed = W.graph_seed(config.seed, start_index + i) + (b == "walk")
            bags[b] = _walks_for(g, config.length(b), config.mode(b), config.m, seed,
                                 config.enum_cap)
        labels = W.anonymize_many(bags["aw"][0]) if "aw" in bags else None
        return GraphWalks(g.node_count, bags, labels)

    items = list(enumerate(graphs))
    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]


@dataclass
class EmbeddingMatrix:
    rows: np.ndarray
    ids: list
    branch_dims: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    id_header: tuple = ("graph_id",)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def to_csv(self, path) -> None:
        header = list(self.id_header) + [f"d{j}" for j in range(self.dim)]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if self.meta:
                fh.write("# " + json.dumps(self.meta, sort_keys=True) + "\n")
            fh.write(",".join(header) + "\n")
            for key, row in zip(self.ids, self.rows):
                key = key if isinstance(key, tuple) else (key,)
                fh.write(",".join([str(k) for k in key] + ["%.9g" % v for v in row]) + "\n")


def read_embedding_csv(path) -> EmbeddingMatrix:
    meta, rows, ids = {}, [], []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("# "):
        meta = json.loads(lines[0][2:])
        lines = lines[1:]
    header = lines[0].split(",")
    n_ids = sum(not h.startswith("d") for h in header)
    for line in lines[1:]:
        parts = line.split(",")
        key = tuple(int(p) for p in parts[:n_ids])
        ids.append(key if n_ids > 1 else key[0])
        rows.append([float(p) for p in parts[n_ids:]])
    return EmbeddingMatrix(np.array(rows), ids, meta=meta, id_header=tuple(header[:n_ids]))


class GSKN:
    """Walk + anonymous-walk Nystrom embedding model.

    Landmarks are fitted layer by layer with q-means on the features of the
    graphs passed to :meth:`fit`; :meth:`transform` maps any graph with the
    fitted landmarks.
    """

    def __init__(self, config: Optional[EmbedConfig] = None):
        self.config = config or EmbedConfig()
        self.landmarks: dict = {}
        self.fit_meta: dict = {}

    # features ---------------------------------------------------------------
    def _layer_features(self, g: Graph, gw: GraphWalks, branch: str, layer: int, prev):
        walks, owner = gw.bags[branch]
        if layer == 1 and branch == "aw":
            return W.encode_aws(gw.aw_labels, self.config.l_aw), owner
        x = g.attributes if layer == 1 else prev
        return W.encode_walks(walks, x), owner

    def _branch_layer(self, g, gw, branch, layer, prev, lm):
        n = gw.node_count
        if layer == 1 and branch == "aw":
            owner = gw.bags["aw"][1]
            if len(owner) == 0:
                return np.zeros((n, lm.q))
            lab = np.ascontiguousarray(gw.aw_labels)
            keys = lab.view(np.dtype((np.void, lab.dtype.itemsize * lab.shape[1]))).reshape(-1)
            _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
            k = lm.kernel_rows(W.encode_aws(lab[first], self.config.l_aw))[inv.reshape(-1)]
        else:
            f, owner = self._layer_features(g, gw, branch, layer, prev)
            k = lm.kernel_rows(f) if len(f) else np.zeros((0, lm.q))
        return lm.finish(segment_sum(k, owner, n))

    # fitting ------------------------------------------------------------------
    def fit(self, graphs: Sequence[Graph], walks: Optional[list] = None, start_index: int = 0):
        walks = walks if walks is not None else extract_walks(graphs, self.config, start_index)
        cfg = self.config
        self.landmarks = {}
        for b in cfg.branches:
            sets = []
            prev = [None] * len(graphs)
            for layer in range(1, cfg.layer_count(b) + 1):
                pooled, counts = [], []
                for g, gw, p in zip(graphs, walks, prev):
                    if b == "aw" and layer == 1:
                        u, c = unique_rows(gw.aw_labels)
                    else:
                        u, c = unique_rows(self._layer_features(g, gw, b, layer, p)[0])
                    pooled.append(u)
                    counts.append(c)
                feats, merged = unique_rows(np.concatenate(pooled), np.concatenate(counts))
                if len(feats) == 0:
                    raise ValueError(f"no {b} walks to fit landmarks on")
                if b == "aw" and layer == 1:
                    feats = W.encode_aws(feats, cfg.l_aw)
                lm = fit_landmark_set(feats, cfg.q(b), cfg.alpha, cfg.length(b), cfg.epsilon,
                                      seed=cfg.seed + 7919 * layer + (b == "walk"),
                                      counts=merged, branch=b, layer=layer,
                                      max_iters=cfg.kmeans_iters, tol=cfg.kmeans_tol,
                                      subsample_cap=cfg.subsample_cap, assume_unique=True)
                sets.append(lm)
                if layer < cfg.layer_count(b):
                    prev = [W.normalize_rows(self._branch_layer(g, gw, b, layer, p, lm))
                            for g, gw, p in zip(graphs, walks, prev)]
            self.landmarks[b] = sets
        self.fit_meta = {"fit_graphs": len(graphs)}
        return self

    # mapping ------------------------------------------------------------------
    def node_embeddings(self, g: Graph, gw: Optional[GraphWalks] = None) -> np.ndarray:
        """``[psi_walk || psi_aw]`` for every node of ``g``."""
        if not self.landmarks:
            raise RuntimeError("model is not fitted")
        gw = gw or extract_walks([g], self.config)[0]
        parts = []
        for b in self.config.branches:
            prev = None
            for lm in self.landmarks[b]:
                out = self._branch_layer(g, gw, b, lm.layer, prev, lm)
                prev = W.normalize_rows(out)
            parts.append(out)
        return np.concatenate(parts, axis=1)

    def transform(self, graphs: Sequence[Graph], walks: Optional[list] = None,
                  start_index: int = 0) -> list:
        walks = walks if walks is not None else extract_walks(graphs, self.config, start_index)
        pairs = list(zip(graphs, walks))
        if self.config.threads > 1:
            with ThreadPoolExecutor(self.config.threads) as pool:
                return list(pool.map(lambda p: self.node_embeddings(*p), pairs))
        return [self.node_embeddings(g, gw) for g, gw in pairs]

    def embed_graphs(self, graphs: Sequence[Graph], walks: Optional[list] = None,
                     start_index: int = 0) -> np.ndarray:
        return np.stack([graph_pool(e) for e in self.transform(graphs, walks, start_index)])

    @property
    def branch_dims(self) -> dict:
        return {b: self.landmarks[b][-1].q for b in self.config.branches}

    # persistence ----------------------------------------------------------------
    def save(self, path) -> None:
        arrays, sets = {}, []
        for b, lms in self.landmarks.items():
            for lm in lms:
                key = f"{b}_{lm.layer}"
                arrays[key + "_z"] = lm.z
                arrays[key + "_inv"] = lm.inv_sqrt_gram
                sets.append({"key": key, "branch": b, "layer": lm.layer, "alpha": lm.alpha,
                             "l": lm.l, "epsilon": lm.epsilon, "q": lm.q})
        header = {"format": MODEL_FORMAT, "config": asdict(self.config), "landmarks": sets,
                  "fit": self.fit_meta}
        with open(path, "wb") as fh:
            np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **arrays)

    @classmethod
    def load(cls, path) -> "GSKN":
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("format") != MODEL_FORMAT:
                raise ValueError(f"unsupported model format {header.get('format')!r}")
            model = cls(EmbedConfig(**header["config"]))
            for s in header["landmarks"]:
                lm = LandmarkSet(data[s["key"] + "_z"], s["alpha"], s["l"], s["epsilon"],
                                 data[s["key"] + "_inv"], s["branch"], s["layer"])
                model.landmarks.setdefault(s["branch"], []).append(lm)
        for b in model.landmarks:
            model.landmarks[b].sort(key=lambda lm: lm.layer)
        model.fit_meta = header.get("fit", {})
        return model


def stack_layers(g: Graph, config: EmbedConfig, model: Optional[GSKN] = None) -> EmbeddingMatrix:
    """Node embeddings of ``g``; fits a model on ``g`` alone when none is given."""
    model = model or GSKN(config).fit([g])
    rows = model.node_embeddings(g)
    return EmbeddingMatrix(rows, list(range(g.node_count)), model.branch_dims,
                           id_header=("node_id",))


def psi_ar_node(g: Graph, u: int, model: GSKN) -> np.ndarray:
    return model.node_embeddings(g)[u]
