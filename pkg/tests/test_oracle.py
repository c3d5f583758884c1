import itertools
import math

import numpy as np
import pytest

from awkernel import checks, oracle
from awkernel import walks as W
from awkernel.featuremaps import GSKN, EmbedConfig, LandmarkSet, extract_walks
from awkernel.graph import Graph, degree_attributes
from awkernel.synth import gen_basic, gen_ring_pair

EDGE = Graph.from_edges(2, [(0, 1)])
TRIANGLE = gen_basic("cycle", 3)
PATH3 = gen_basic("path", 3)


def brute_sequences(g, l, simple=False):
    a = g.adjacency()
    out = []
    for seq in itertools.product(range(g.node_count), repeat=l):
        if all(a[s, t] for s, t in zip(seq, seq[1:])):
            if not simple or len(set(seq)) == l:
                out.append(seq)
    return out


def brute_delta(g1, g2, l, simple=False):
    total = 0
    for w1 in brute_sequences(g1, l, simple):
        for w2 in brute_sequences(g2, l, simple):
            total += all(np.array_equal(g1.attributes[a], g2.attributes[b]) for a, b in zip(w1, w2))
    return total


def test_rwgk_two_edges():
    assert oracle.exact_rwgk(EDGE, EDGE, 2) == 4.0


def test_rwgk_disjoint_alphabets():
    a = EDGE.with_attributes(np.array([[1.0, 0.0], [1.0, 0.0]]))
    b = EDGE.with_attributes(np.array([[0.0, 1.0], [0.0, 1.0]]))
    assert oracle.exact_rwgk(a, b, 2) == 0.0


@pytest.mark.parametrize("l", [2, 3, 4])
def test_rwgk_matches_brute_force(l):
    g1 = degree_attributes(gen_basic("wheel", 5), 4)
    g2 = degree_attributes(gen_basic("ladder", 2), 4)
    assert oracle.exact_rwgk(g1, g2, l) == brute_delta(g1, g2, l)


def test_rwgk_symmetric_and_integer():
    g1 = degree_attributes(gen_basic("wheel", 5), 4)
    g2 = degree_attributes(gen_basic("path", 4), 4)
    k12, k21 = oracle.exact_rwgk(g1, g2, 3), oracle.exact_rwgk(g2, g1, 3)
    assert k12 == k21 and float(k12).is_integer()


def test_rwgk_gauss_matches_direct_sum():
    rng = np.random.default_rng(0)
    g1 = TRIANGLE.with_attributes(rng.normal(size=(3, 2)))
    g2 = PATH3.with_attributes(rng.normal(size=(3, 2)))
    x1 = W.normalize_rows(g1.attributes)
    x2 = W.normalize_rows(g2.attributes)
    want = 0.0
    for w1 in brute_sequences(g1, 3):
        for w2 in brute_sequences(g2, 3):
            d = np.concatenate(x1[list(w1)]) - np.concatenate(x2[list(w2)])
            want += math.exp(-0.75 * d @ d)
    assert math.isclose(oracle.exact_rwgk(g1, g2, 3, "gauss"), want, rel_tol=1e-12)


def test_path_kernel_triangle():
    # 6 directed 3-node paths per triangle, every pair matches
    assert len(brute_sequences(TRIANGLE, 3, simple=True)) == 6
    assert oracle.exact_path_kernel(TRIANGLE, TRIANGLE, 3) == 36.0


def test_path_kernel_matches_brute_force():
    g1 = degree_attributes(gen_basic("wheel", 5), 4)
    g2 = degree_attributes(gen_basic("ladder", 3), 4)
    assert oracle.exact_path_kernel(g1, g2, 3) == brute_delta(g1, g2, 3, simple=True)


def test_path_kernel_below_walk_kernel():
    g = gen_basic("wheel", 6)
    for l in (2, 3, 4):
        assert oracle.exact_path_kernel(g, g, l) <= oracle.exact_rwgk(g, g, l)


def test_path_kernel_edge_l3():
    assert oracle.exact_path_kernel(EDGE, EDGE, 3) == 0.0


def test_awgk_edge():
    assert oracle.exact_awgk(EDGE, EDGE, 3) == 4.0


def test_awgk_symmetric():
    a, b = gen_basic("wheel", 5), gen_basic("ladder", 3)
    assert math.isclose(oracle.exact_awgk(a, b, 4), oracle.exact_awgk(b, a, 4), rel_tol=1e-12)


def test_awgk_matches_direct_sum():
    a, b = TRIANGLE, PATH3
    want = 0.0
    for w1 in brute_sequences(a, 4):
        for w2 in brute_sequences(b, 4):
            agree = sum(x == y for x, y in zip(W.anonymize(w1), W.anonymize(w2)))
            want += math.exp(-1.5 * (4 - agree))
    assert math.isclose(oracle.exact_awgk(a, b, 4), want, rel_tol=1e-12)


def test_awgk_rings_differ():
    big, two = gen_ring_pair(8)
    assert oracle.exact_awgk(big, big, 10) != oracle.exact_awgk(big, two, 10)


def test_argk_is_sum():
    a, b = degree_attributes(TRIANGLE, 2), degree_attributes(PATH3, 2)
    assert math.isclose(oracle.exact_argk(a, b, 3, 4),
                        oracle.exact_rwgk(a, b, 3, "gauss") + oracle.exact_awgk(a, b, 4))


@pytest.mark.parametrize("kernel,kw", [(oracle.exact_awgk, {"l": 4}),
                                       (oracle.exact_rwgk, {"l": 3, "mode": "gauss"}),
                                       (oracle.exact_rwgk, {"l": 3}),
                                       (oracle.wl_subtree_kernel, {"depth": 3})])
def test_gram_psd(kernel, kw):
    k = oracle.gram_matrix(checks.small_corpus(), kernel, **kw)
    assert np.allclose(k, k.T)
    assert np.linalg.eigvalsh(k).min() >= -1e-8 * np.abs(k).max()


def test_sampled_awgk_matches_embedding():
    graphs = [gen_basic("wheel", 6), gen_basic("ladder", 4)]
    cfg = EmbedConfig(branch="aw", l_aw=5, m=7, seed=3, epsilon=0.0)
    model = GSKN(cfg)
    model.landmarks = {"aw": [LandmarkSet.from_points(W.encode_aws(W.aw_universe(5)), 1.5, 5, 0.0)]}
    e = model.embed_graphs(graphs, extract_walks(graphs, cfg))
    seeds = (W.graph_seed(3, 0), W.graph_seed(3, 1))
    want = oracle.exact_awgk(graphs[0], graphs[1], 5, "sampled", m=7, seed=seeds)
    assert math.isclose(e[0] @ e[1], want, rel_tol=1e-9)


def test_wl_rings_equal_at_every_iteration():
    for k in (4, 8):
        big, two = (degree_attributes(g, 2) for g in gen_ring_pair(k))
        cb, ct = oracle.wl_refine(big, 2 * k), oracle.wl_refine(two, 2 * k)
        assert cb.histograms() == ct.histograms()
        for d in range(5):
            assert oracle.wl_subtree_kernel(big, big, d) == oracle.wl_subtree_kernel(big, two, d)


def test_wl_triangle_vs_path():
    assert oracle.wl_equivalent(TRIANGLE, PATH3, 0)
    assert not oracle.wl_equivalent(TRIANGLE, PATH3, 1)


def test_wl_iteration_zero_is_attribute_multiset():
    g = degree_attributes(gen_basic("wheel", 5), 4)
    c = oracle.wl_refine(g, 0)
    assert c.iterations == 0 and sorted(c.histogram(0).values()) == [1, 4]


def test_wl_stabilizes():
    g = gen_basic("ladder", 5)
    c = oracle.wl_refine(g, 8)
    sizes = [c.partition_sizes(i) for i in range(9)]
    first = next(i for i in range(8) if sizes[i] == sizes[i + 1])
    assert len(set(sizes[first:])) == 1


def test_wl_kernel_trivial_values():
    g = gen_basic("cycle", 6)
    assert oracle.wl_subtree_kernel(g, g, 0) == 36.0
    a = EDGE.with_attributes(np.array([[1.0], [1.0]]))
    b = EDGE.with_attributes(np.array([[2.0], [2.0]]))
    assert oracle.wl_subtree_kernel(a, b, 0) == 0.0


def test_wl_negative_iterations():
    with pytest.raises(ValueError):
        oracle.wl_refine(EDGE, -1)


def test_nystrom_gap_non_negative():
    x = W.encode_aws(W.aw_universe(5))
    lm = LandmarkSet.from_points(x[:3], 1.5, 5)
    assert oracle.nystrom_gap(x, lm) >= 0


def test_matrix_csv(tmp_path):
    k = np.array([[1.0, 0.5], [0.5, 2.0]])
    oracle.write_matrix_csv(k, tmp_path / "k.csv")
    assert (tmp_path / "k.csv").read_text() == "1,0.5\n0.5,2\n"
