import json
import logging

import numpy as np
import pytest

from awkernel.classify import (EvalReport, Standardizer, _objective, cross_validate, f1_scores,
                               fit_linear, node_classification_eval, select_reg, stratified_folds)
from awkernel.featuremaps import EmbedConfig
from awkernel.graph import GraphCollection, degree_attributes
from awkernel.synth import gen_basic


def separable(seed=0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(size=(30, 2)) + [3, 3], rng.normal(size=(30, 2)) - [3, 3]])
    return x, np.repeat([0, 1], 30)


@pytest.mark.parametrize("kind", ["logistic", "squared-hinge-svm"])
def test_separable_training_accuracy(kind):
    x, y = separable()
    assert np.mean(fit_linear(x, y, 1e-3, kind).predict(x) == y) == 1.0


def test_constant_features_give_majority():
    y = np.array([0] * 14 + [1] * 6)
    x = Standardizer.fit(np.ones((20, 3))).transform(np.ones((20, 3)))
    assert np.all(x == 0)
    pred = fit_linear(x, y, 1.0).predict(x)
    assert np.mean(pred == y) == 0.7


def test_deterministic():
    x, y = separable(1)
    a, b = fit_linear(x, y, 0.1, seed=3), fit_linear(x, y, 0.1, seed=3)
    assert np.array_equal(a.weights, b.weights)


def test_single_class_warns(caplog):
    with caplog.at_level(logging.WARNING):
        m = fit_linear(np.zeros((4, 2)), np.array([2, 2, 2, 2]))
    assert "single class" in caplog.text
    assert m.predict(np.ones((3, 2))).tolist() == [2, 2, 2]


def test_multiclass_one_vs_rest():
    rng = np.random.default_rng(0)
    centers = np.array([[5, 0], [0, 5], [-5, -5]])
    y = np.repeat([0, 1, 2], 20)
    x = centers[y] + rng.normal(size=(60, 2))
    m = fit_linear(x, y, 1e-2)
    assert m.weights.shape == (3, 2) and np.mean(m.predict(x) == y) == 1.0


def test_multilabel_heads():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(80, 2))
    y = np.stack([x[:, 0] > 0, x[:, 1] > 0], axis=1).astype(int)
    m = fit_linear(x, y, 1e-3)
    assert m.predict(x).shape == (80, 2)
    assert np.mean(m.predict(x) == y) > 0.95


@pytest.mark.parametrize("kind", ["logistic", "squared-hinge-svm"])
def test_objective_gradient(kind):
    rng = np.random.default_rng(2)
    x, s = rng.normal(size=(15, 3)), np.sign(rng.normal(size=15))
    f = _objective(kind, x, s, 0.3)
    theta = rng.normal(size=4)
    _, g = f(theta)
    h = 1e-6
    num = [(f(theta + h * e)[0] - f(theta - h * e)[0]) / (2 * h) for e in np.eye(4)]
    assert np.allclose(g, num, atol=1e-6)


def test_solution_is_stationary():
    x, y = separable(3)
    m = fit_linear(x, y, 0.5)
    _, g = _objective("logistic", x, np.where(y == 1, 1.0, -1.0), 0.5)(
        np.concatenate([m.weights[0], m.bias]))
    assert np.linalg.norm(g, np.inf) < 1e-4


def test_standardizer_uses_given_rows_only():
    tr = np.array([[0.0, 1.0], [2.0, 1.0]])
    sc = Standardizer.fit(tr)
    assert np.allclose(sc.transform(tr), [[-1, 0], [1, 0]])
    assert np.allclose(sc.transform([[4.0, 7.0]]), [[3.0, 0.0]])


def test_fold_sizes_188():
    y = np.array([0] * 125 + [1] * 63)
    plan = stratified_folds(y, 10, 0)
    sizes = sorted(np.bincount(plan.assignment).tolist())
    assert sizes == [18, 18] + [19] * 8


def test_folds_partition_and_stratify():
    y = np.repeat([0, 1, 2], [40, 25, 13])
    plan = stratified_folds(y, 5, 7)
    for k in range(5):
        tr, te = plan.train_test(k)
        assert len(np.intersect1d(tr, te)) == 0 and len(tr) + len(te) == len(y)
        for c, n in zip((0, 1, 2), (40, 25, 13)):
            assert abs(np.sum(y[te] == c) - n / 5) <= 1
    assert np.array_equal(plan.assignment, stratified_folds(y, 5, 7).assignment)


def test_f1_single_label_micro_is_accuracy():
    yt = np.array([0, 1, 2, 2, 1, 0, 0])
    yp = np.array([0, 2, 2, 2, 1, 1, 0])
    macro, micro = f1_scores(yt, yp)
    assert np.isclose(micro, np.mean(yt == yp))
    per = [2 * 2 / (2 * 2 + 0 + 1), 2 * 1 / (2 + 1 + 1), 2 * 2 / (4 + 1 + 0)]
    assert np.isclose(macro, np.mean(per))


def test_f1_all_same():
    assert f1_scores(np.zeros(5), np.zeros(5)) == (1.0, 1.0)


def test_select_reg_in_grid():
    x, y = separable(4)
    assert select_reg(x, y) in (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)


def test_report_consistency():
    r = EvalReport.from_folds([0.5, 1.0, 0.75], np.array([0, 1, 1, 0]), np.array([0, 1, 0, 0]),
                              2, {"a": 1}, [{}, {}, {}])
    assert np.isclose(r.mean, 0.75) and np.isclose(r.std, np.std([0.5, 1.0, 0.75]))
    assert 0 <= r.macro_f1 <= 1 and 0 <= r.micro_f1 <= 1
    lines = r.to_records().strip().splitlines()
    assert len(lines) == 4 and json.loads(lines[-1])["record"] == "summary"
    assert "mean" in r.to_table()


def tiny_collection():
    graphs = []
    for i in range(12):
        fam = "cycle" if i % 2 == 0 else "path"
        g = degree_attributes(gen_basic(fam, 6 + i % 5), 3)
        graphs.append(g.__class__(g.node_count, g.edges, g.attributes, i % 2, {}))
    return GraphCollection(graphs, 2, "categorical-one-hot", "tiny")


def test_cross_validate_leakage_guard_and_determinism():
    coll = tiny_collection()
    cfg = EmbedConfig(q_aw=4, q_walk=4, l_aw=4)
    r = cross_validate(coll, cfg, folds=3, seed=1)
    for f in r.folds:
        assert not set(f["landmark_fit_graphs"]) & set(f["test_graphs"])
    assert r.mean == 1.0
    again = cross_validate(coll, cfg, folds=3, seed=1)
    assert again.fold_accuracies == r.fold_accuracies
    assert r.config["classifier"] == "logistic" and r.config["l_aw"] == 4


def test_cross_validate_warns_on_small_class(caplog):
    coll = tiny_collection()
    coll = GraphCollection(coll.graphs[:7], 2, coll.attribute_kind)
    with caplog.at_level(logging.WARNING):
        cross_validate(coll, EmbedConfig(branch="walk", q_walk=3), folds=4, seed=0, reg=1.0)
    assert "fewer members than folds" in caplog.text


def test_node_eval_all_same_label():
    g = gen_basic("cycle", 30)
    x = np.random.default_rng(0).normal(size=(30, 4))
    r = node_classification_eval(g, x, 0.7, labels=np.zeros(30, dtype=int), runs=3)
    assert r.macro_f1 == 1.0 and r.micro_f1 == 1.0 and len(r.fold_accuracies) == 3


def test_node_eval_separable():
    g = gen_basic("path", 60)
    y = np.repeat([0, 1], 30)
    x = np.stack([y * 4.0 + np.random.default_rng(1).normal(size=60), np.ones(60)], 1)
    r = node_classification_eval(g, x, 0.7, seed=2, runs=10, labels=y)
    assert r.mean > 0.95 and "micro_f1_std" in r.config
