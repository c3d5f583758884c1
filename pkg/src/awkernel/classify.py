"""Linear probes on fixed embeddings and the evaluation protocols."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .featuremaps import GSKN, EmbedConfig, extract_walks

log = logging.getLogger(__name__)

REG_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)
GTOL = 1e-5


# --- preprocessing -----------------------------------------------------------

@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x):
        x = np.asarray(x, dtype=np.float64)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        # constant columns map to zero
        scale = np.where(std > 1e-12 * np.maximum(1.0, np.abs(mean)), std, np.inf)
        return cls(mean, scale)

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.scale


# --- linear models -------------------------------------------------------------

def _objective(kind, x, s, reg):
    n = len(x)

    def f(theta):
        w, b = theta[:-1], theta[-1]
        z = s * (x @ w + b)
        if kind == "logistic":
            loss = np.logaddexp(0.0, -z).sum()
            dz = -expit(-z)
        else:
            h = np.maximum(0.0, 1.0 - z)
            loss = np.dot(h, h)
            dz = -2.0 * h
        g = dz * s
        grad = np.concatenate([x.T @ g / n + reg * w, [g.sum() / n]])
        return loss / n + 0.5 * reg * np.dot(w, w), grad

    return f


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: np.ndarray
    classes: np.ndarray
    kind: str
    multilabel: bool = False
    constant: Optional[int] = None

    def decision_function(self, x):
        return np.asarray(x, dtype=np.float64) @ self.weights.T + self.bias

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.constant is not None:
            return np.full(len(x), self.classes[self.constant])
        scores = self.decision_function(x)
        if self.multilabel:
            return (scores > 0).astype(np.int64)
        if len(self.classes) == 2:
            return self.classes[(scores[:, 0] > 0).astype(np.int64)]
        return self.classes[np.argmax(scores, axis=1)]


def _fit_head(kind, x, s, reg, max_iter):
    theta0 = np.zeros(x.shape[1] + 1)
    res = minimize(_objective(kind, x, s, reg), theta0, jac=True, method="L-BFGS-B",
                   options={"gtol": GTOL, "maxiter": max_iter})
    return res.x


def fit_linear(x, y, reg: float = 1.0, kind: str = "logistic", seed: int = 0,
               max_iter: int = 1000) -> LinearModel:
    """L2-regularized linear classifier, one-vs-rest for more than two classes.

    ``kind`` is ``"logistic"`` or ``"squared-hinge-svm"``. A 2-D ``y`` is
    treated as a multi-label indicator matrix with one head per column.
    The optimizer starts from zero, so ``seed`` does not change the result.
    """
    if kind not in ("logistic", "squared-hinge-svm"):
        raise ValueError(f"unknown classifier {kind!r}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if y.ndim == 2:
        heads = [_fit_head(kind, x, np.where(y[:, j] > 0, 1.0, -1.0), reg, max_iter)
                 for j in range(y.shape[1])]
        th = np.array(heads)
        return LinearModel(th[:, :-1], th[:, -1], np.arange(y.shape[1]), kind, multilabel=True)
    classes = np.unique(y)
    if len(classes) < 2:
        log.warning("training data holds a single class; using a constant predictor")
        return LinearModel(np.zeros((1, x.shape[1])), np.zeros(1), classes, kind, constant=0)
    targets = [classes[1]] if len(classes) == 2 else classes
    th = np.array([_fit_head(kind, x, np.where(y == c, 1.0, -1.0), reg, max_iter)
                   for c in targets])
    return LinearModel(th[:, :-1], th[:, -1], classes, kind)


# --- metrics -------------------------------------------------------------------

def confusion(y_true, y_pred, n_classes):
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def f1_scores(y_true, y_pred) -> tuple[float, float]:
    """Macro and micro F1 for single-label or multi-label indicator input."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.ndim == 2:
        tp = np.sum((y_true > 0) & (y_pred > 0), axis=0)
        fp = np.sum((y_true <= 0) & (y_pred > 0), axis=0)
        fn = np.sum((y_true > 0) & (y_pred <= 0), axis=0)
        present = (tp + fp + fn) > 0
    else:
        labels = np.union1d(y_true, y_pred)
        tp = np.array([np.sum((y_true == c) & (y_pred == c)) for c in labels])
        fp = np.array([np.sum((y_true != c) & (y_pred == c)) for c in labels])
        fn = np.array([np.sum((y_true == c) & (y_pred != c)) for c in labels])
        present = np.ones(len(labels), dtype=bool)
    denom = 2 * tp + fp + fn
    per = np.divide(2 * tp, denom, out=np.ones(len(tp)), where=denom > 0)
    macro = float(per[present].mean()) if present.any() else 1.0
    total = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = float(2 * tp.sum() / total) if total else 1.0
    return macro, micro


# --- folds -----------------------------------------------------------------------

@dataclass
class FoldPlan:
    assignment: np.ndarray
    folds: int
    seed: int

    def train_test(self, k):
        return (np.flatnonzero(self.assignment != k), np.flatnonzero(self.assignment == k))


def stratified_folds(y, folds: int = 10, seed: int = 0) -> FoldPlan:
    """Shuffle within each class, then deal samples to folds round-robin.

    Dealing continues across classes, so fold sizes differ by at most one
    and every class is spread as evenly as possible.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)])
    assignment = np.empty(len(y), dtype=np.int64)
    assignment[order] = np.arange(len(y)) % folds
    return FoldPlan(assignment, folds, seed)


def select_reg(x, y, kind="logistic", grid=REG_GRID, inner_folds=5, seed=0) -> float:
    """Pick the regularization with best inner cross-validated accuracy."""
    y = np.asarray(y)
    counts = np.unique(y, return_counts=True)[1]
    k = int(min(inner_folds, counts.min())) if len(counts) > 1 else 1
    if k < 2:
        return grid[len(grid) // 2]
    plan = stratified_folds(y, k, seed)
    scores = []
    for reg in grid:
        acc = []
        for f in range(k):
            tr, te = plan.train_test(f)
            sc = Standardizer.fit(x[tr])
            model = fit_linear(sc.transform(x[tr]), y[tr], reg, kind)
            acc.append(np.mean(model.predict(sc.transform(x[te])) == y[te]))
        scores.append(np.mean(acc))
    # ties resolve to the stronger penalty
    best = max(range(len(grid)), key=lambda i: (round(scores[i], 12), i))
    return grid[best]


# --- reports ---------------------------------------------------------------------

@dataclass
class EvalReport:
    fold_accuracies: list
    mean: float
    std: float
    macro_f1: float
    micro_f1: float
    per_class_accuracy: dict = field(default_factory=dict)
    confusion: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    folds: list = field(default_factory=list)

    @classmethod
    def from_folds(cls, accs, y_true, y_pred, n_classes, config, folds):
        accs = [float(a) for a in accs]
        macro, micro = f1_scores(y_true, y_pred)
        cm = confusion(y_true, y_pred, n_classes) if np.ndim(y_true) == 1 else np.zeros((0, 0))
        per_class = {int(c): float(cm[c, c] / cm[c].sum()) for c in range(len(cm)) if cm[c].sum()}
        return cls(accs, float(np.mean(accs)), float(np.std(accs)), macro, micro, per_class,
                   cm.tolist(), config, folds)

    def to_table(self) -> str:
        lines = ["fold  accuracy"]
        lines += [f"{i:>4}  {100 * a:8.2f}" for i, a in enumerate(self.fold_accuracies)]
        lines.append(f"mean  {100 * self.mean:8.2f} +/- {100 * self.std:.2f}")
        lines.append(f"macro-F1 {self.macro_f1:.4f}  micro-F1 {self.micro_f1:.4f}")
        for c, a in sorted(self.per_class_accuracy.items()):
            lines.append(f"class {c}: {100 * a:.2f}")
        return "\n".join(lines)

    def to_records(self) -> str:
        """One JSON record per fold followed by a summary record."""
        out = []
        for i, a in enumerate(self.fold_accuracies):
            rec = {"fold": i, "accuracy": a}
            if i < len(self.folds):
                rec.update(self.folds[i])
            out.append(json.dumps(rec, sort_keys=True))
        summary = {k: v for k, v in asdict(self).items() if k not in ("folds", "fold_accuracies")}
        summary["record"] = "summary"
        out.append(json.dumps(summary, sort_keys=True))
        return "\n".join(out) + "\n"


# --- protocols ---------------------------------------------------------------------

def cross_validate(collection, embed_config: EmbedConfig, folds: int = 10, seed: int = 0,
                   kind: str = "logistic", reg: Optional[float] = None,
                   walks: Optional[list] = None) -> EvalReport:
    """Stratified k-fold graph classification with per-fold landmark fitting.

    Landmarks and feature standardization use training graphs only; the
    regularization is picked by an inner split of the training fold unless
    ``reg`` is given.
    """
    graphs = collection.graphs
    y = collection.labels
    for c in range(collection.class_count):
        if np.sum(y == c) < folds:
            log.warning("class %d has fewer members than folds; some training folds lack it", c)
    plan = stratified_folds(y, folds, seed)
    walks = walks if walks is not None else extract_walks(graphs, embed_config)
    accs, y_true, y_pred, meta = [], [], [], []
    for k in range(folds):
        tr, te = plan.train_test(k)
        model = GSKN(embed_config).fit([graphs[i] for i in tr], [walks[i] for i in tr])
        emb = model.embed_graphs(graphs, walks)
        sc = Standardizer.fit(emb[tr])
        xtr, xte = sc.transform(emb[tr]), sc.transform(emb[te])
        r = reg if reg is not None else select_reg(xtr, y[tr], kind, seed=seed + k)
        clf = fit_linear(xtr, y[tr], r, kind, seed)
        pred = clf.predict(xte)
        accs.append(float(np.mean(pred == y[te])))
        y_true.append(y[te])
        y_pred.append(pred)
        meta.append({"reg": r, "train_size": len(tr), "test_size": len(te),
                     "landmark_fit_graphs": tr.tolist(), "test_graphs": te.tolist()})
    cfg = asdict(embed_config)
    cfg.update({"folds": folds, "cv_seed": seed, "classifier": kind})
    return EvalReport.from_folds(accs, np.concatenate(y_true), np.concatenate(y_pred),
                                 collection.class_count, cfg, meta)


def stratified_split(y, train_fraction, rng):
    y = np.asarray(y)
    key = y if y.ndim == 1 else np.zeros(len(y), dtype=np.int64)
    train = []
    for c in np.unique(key):
        idx = rng.permutation(np.flatnonzero(key == c))
        take = int(round(train_fraction * len(idx)))
        train.extend(idx[:take].tolist())
    train = np.sort(np.array(train, dtype=np.int64))
    test = np.setdiff1d(np.arange(len(y)), train)
    return train, test


def node_classification_eval(g, embeddings, train_fraction: float, seed: int = 0, runs: int = 10,
                             labels=None, kind: str = "logistic") -> EvalReport:
    """Repeated random stratified splits of the nodes of ``g``; logistic probe."""
    y = np.asarray(labels if labels is not None else g.meta["node_labels"])
    x = np.asarray(embeddings, dtype=np.float64)
    rng = np.random.default_rng(seed)
    accs, macros, micros, meta = [], [], [], []
    for r in range(runs):
        tr, te = stratified_split(y, train_fraction, rng)
        sc = Standardizer.fit(x[tr])
        xtr, xte = sc.transform(x[tr]), sc.transform(x[te])
        reg = select_reg(xtr, y[tr], kind, seed=seed + r) if y.ndim == 1 else 1.0
        pred = fit_linear(xtr, y[tr], reg, kind).predict(xte)
        ma, mi = f1_scores(y[te], pred)
        acc = float(np.mean(pred == y[te])) if y.ndim == 1 else float(np.mean(np.all(pred == y[te], axis=1)))
        accs.append(acc)
        macros.append(ma)
        micros.append(mi)
        meta.append({"run": r, "macro_f1": ma, "micro_f1": mi, "reg": reg})
    report = EvalReport(accs, float(np.mean(accs)), float(np.std(accs)), float(np.mean(macros)),
                        float(np.mean(micros)),
                        config={"train_fraction": train_fraction, "runs": runs, "seed": seed},
                        folds=meta)
    report.config["macro_f1_std"] = float(np.std(macros))
    report.config["micro_f1_std"] = float(np.std(micros))
    return report
