"""Weighted k-means (k-means++ seeding, Lloyd iterations) for Nystrom landmarks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

log = logging.getLogger(__name__)

MAX_ITERS = 100
TOL = 1e-6
SUBSAMPLE_CAP = 100_000


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: list = field(default_factory=list)


def _sq_dists(x, x_sq, c):
    d = x_sq[:, None] - 2.0 * (x @ c.T) + np.einsum("ij,ij->i", c, c)[None, :]
    return np.maximum(d, 0.0)


def _assign(x, x_sq, c, chunk=65536):
    out = np.empty(len(x), dtype=np.int64)
    for s in range(0, len(x), chunk):
        # np.argmin picks the lowest index on ties
        out[s:s + chunk] = np.argmin(_sq_dists(x[s:s + chunk], x_sq[s:s + chunk], c), axis=1)
    return out


def _point_costs(x, c, a):
    diff = x - c[a]
    return np.einsum("ij,ij->i", diff, diff)


def _plusplus(x, w, q, rng):
    n = len(x)
    x_sq = np.einsum("ij,ij->i", x, x)
    centers = np.empty((q, x.shape[1]))
    first = rng.choice(n, p=w / w.sum())
    centers[0] = x[first]
    best = _sq_dists(x, x_sq, centers[:1])[:, 0]
    best[first] = 0.0
    for j in range(1, q):
        p = w * best
        if p.sum() <= 0:
            idx = int(np.argmax(best))
        else:
            idx = rng.choice(n, p=p / p.sum())
        centers[j] = x[idx]
        best = np.minimum(best, _sq_dists(x, x_sq, centers[j:j + 1])[:, 0])
        best[idx] = 0.0
    return centers


def kmeans(points, q: int, max_iters: int = MAX_ITERS, tol: float = TOL, seed: int = 0,
           weights=None) -> KMeansResult:
    """Cluster ``points`` into ``q`` groups.

    ``weights`` lets repeated points be passed once with a multiplicity; the
    result matches clustering the expanded multiset. If ``q`` exceeds the
    number of distinct points it is reduced with a warning. Empty clusters
    are re-seeded with the point farthest from its centroid.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if len(x) == 0:
        raise ValueError("kmeans needs at least one point")
    if q < 1:
        raise ValueError("q must be >= 1")
    w = np.ones(len(x)) if weights is None else np.asarray(weights, dtype=np.float64)
    live = np.ascontiguousarray(x[w > 0])
    distinct = len(np.unique(live.view(np.dtype((np.void, live.itemsize * live.shape[1])))))
    if q > distinct:
        log.warning("q=%d exceeds %d distinct points; using q=%d", q, distinct, distinct)
        q = distinct
    rng = np.random.default_rng(seed)
    x_sq = np.einsum("ij,ij->i", x, x)
    c = _plusplus(x, w, q, rng)
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        a = _assign(x, x_sq, c)
        history.append(float(np.dot(w, _point_costs(x, c, a))))
        onehot = sparse.csr_matrix((w, (a, np.arange(len(a)))), shape=(q, len(a)))
        sums = np.asarray(onehot @ x)
        mass = np.bincount(a, weights=w, minlength=q)
        new = np.divide(sums, mass[:, None], out=c.copy(), where=mass[:, None] > 0)
        empty = np.flatnonzero(mass <= 0)
        if len(empty):
            far = _point_costs(x, new, a) * (w > 0)
            for j in empty:
                idx = int(np.argmax(far))
                new[j] = x[idx]
                far[idx] = -1.0
        shift = float(np.max(np.linalg.norm(new - c, axis=1)))
        c = new
        if shift < tol:
            break
    a = _assign(x, x_sq, c)
    inertia = float(np.dot(w, _point_costs(x, c, a)))
    history.append(inertia)
    return KMeansResult(c, a, inertia, it, history)


def subsample(points, cap: int, seed: int = 0, weights=None):
    """Uniform sample without replacement of at most ``cap`` rows (order kept).

    With ``weights`` the sample is taken from the expanded multiset and the
    sampled multiplicities are returned as ``(points, weights)``.
    """
    x = np.asarray(points)
    rng = np.random.default_rng(seed)
    if weights is None:
        if len(x) <= cap:
            return x
        return x[np.sort(rng.choice(len(x), size=cap, replace=False))]
    w = np.asarray(weights, dtype=np.int64)
    total = int(w.sum())
    if total <= cap:
        return x, w
    picked = rng.choice(total, size=cap, replace=False)
    owner = np.searchsorted(np.cumsum(w), picked, side="right")
    counts = np.bincount(owner, minlength=len(x))
    keep = counts > 0
    return x[keep], counts[keep]
