import os

import numpy as np
import pytest

from awkernel.graph import (DatasetError, Graph, GraphCollection, degree_attributes,
                            disjoint_union, load_tu_dataset, validate, with_degree_attributes,
                            write_tu_dataset)
from awkernel.synth import gen_basic


def test_from_edges_symmetrizes_and_dedupes():
    g = Graph.from_edges(3, [(0, 1), (1, 0), (1, 2), (2, 2)])
    assert g.edges.tolist() == [[0, 1], [1, 2]]
    assert g.degrees.tolist() == [1, 2, 1]
    assert g.attributes.shape == (3, 1)
    assert validate(g) == []


def test_neighbors_and_adjacency():
    g = gen_basic("cycle", 4)
    assert sorted(g.neighbors(0).tolist()) == [1, 3]
    a = g.adjacency()
    assert np.array_equal(a, a.T) and a.sum() == 8


def test_validate_self_loop():
    g = Graph(5, np.array([[3, 3]]), np.ones((5, 1)))
    assert any("self-loop" in p for p in validate(g))


def test_validate_dangling_endpoint():
    g = Graph(5, np.array([[0, 10]]), np.ones((5, 1)))
    assert any("dangling" in p for p in validate(g))


def test_validate_ragged_attributes():
    g = Graph(3, np.array([[0, 1]]), np.ones((2, 1)))
    assert validate(g)


def test_degree_attributes_cycle():
    g = degree_attributes(gen_basic("cycle", 5), 4)
    assert g.attributes.shape == (5, 5)
    assert np.all(g.attributes == np.eye(5)[2])


@pytest.mark.parametrize("n,cap", [(6, 10), (9, 4)])
def test_degree_attributes_wheel_hub(n, cap):
    g = degree_attributes(gen_basic("wheel", n), cap)
    assert np.argmax(g.attributes[0]) == min(n - 1, cap)


def test_degree_attributes_isolated_node():
    g = degree_attributes(Graph.from_edges(3, [(0, 1)]), 3)
    assert g.attributes[2].tolist() == [1, 0, 0, 0]


def test_with_degree_attributes_uses_observed_max():
    coll = GraphCollection([gen_basic("wheel", 7), gen_basic("path", 3)], 2)
    out = with_degree_attributes(coll)
    assert {g.dim for g in out} == {7}
    assert out.attribute_kind == "categorical-one-hot"


def test_mutag_loads(mutag):
    assert len(mutag) == 188
    assert mutag.class_count == 2
    assert mutag.attribute_kind == "categorical-one-hot"
    assert {g.dim for g in mutag} == {7}
    assert abs(np.mean([g.node_count for g in mutag]) - 18) < 0.5
    assert set(mutag.labels.tolist()) == {0, 1}
    assert all(validate(g) == [] for g in mutag)


def test_mutag_edges_collapse_both_directions(mutag):
    # the edge file lists 7442 directed lines
    assert sum(g.num_edges for g in mutag) * 2 == 7442


def test_missing_a_file(tmp_path):
    (tmp_path / "X_graph_indicator.txt").write_text("1\n")
    (tmp_path / "X_graph_labels.txt").write_text("1\n")
    with pytest.raises(DatasetError, match="X_A.txt"):
        load_tu_dataset(str(tmp_path), "X")


def test_edge_crossing_graphs_rejected(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 3\n3, 1\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\n1\n2\n2\n")
    (tmp_path / "X_graph_labels.txt").write_text("0\n1\n")
    with pytest.raises(DatasetError):
        load_tu_dataset(str(tmp_path), "X")


def test_labels_remapped_to_contiguous(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 2\n2, 1\n3, 4\n4, 3\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\n1\n2\n2\n")
    (tmp_path / "X_graph_labels.txt").write_text("-1\n5\n")
    coll = load_tu_dataset(str(tmp_path), "X")
    assert coll.labels.tolist() == [0, 1]
    assert coll.graphs[1].edges.tolist() == [[0, 1]]


def test_round_trip_categorical(mutag, tmp_path):
    write_tu_dataset(mutag, str(tmp_path), "M")
    back = load_tu_dataset(str(tmp_path), "M")
    assert back.labels.tolist() == mutag.labels.tolist()
    for a, b in zip(mutag, back):
        assert np.array_equal(a.edges, b.edges)
        assert np.array_equal(a.attributes, b.attributes)


def test_round_trip_continuous(tmp_path):
    rng = np.random.default_rng(3)
    graphs = [Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], rng.normal(size=(4, 3)), i % 2)
              for i in range(4)]
    coll = GraphCollection(graphs, 2, "continuous", "C")
    write_tu_dataset(coll, str(tmp_path), "C")
    back = load_tu_dataset(str(tmp_path), "C")
    assert back.attribute_kind == "continuous"
    for a, b in zip(graphs, back):
        assert np.max(np.abs(a.attributes - b.attributes)) < 1e-12


def test_node_labels_kept_in_meta(mutag):
    g = mutag.graphs[0]
    assert np.array_equal(g.meta["node_labels"], np.argmax(g.attributes, axis=1))


def test_disjoint_union_and_permute():
    a, b = gen_basic("path", 3), gen_basic("cycle", 3)
    u = disjoint_union(a, b)
    assert u.node_count == 6 and u.num_edges == 5 and u.component_count() == 2
    p = u.permute(np.array([5, 4, 3, 2, 1, 0]))
    assert sorted(p.degrees.tolist()) == sorted(u.degrees.tolist())
    assert validate(p) == []


def test_graph_is_immutable():
    g = gen_basic("path", 3)
    with pytest.raises(Exception):
        g.node_count = 4
