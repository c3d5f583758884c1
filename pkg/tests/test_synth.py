import numpy as np
import pytest

from awkernel import oracle
from awkernel.synth import (SynthSpec, add_noise_edges, gen_basic, gen_regular_dataset,
                            gen_ring_pair, gen_structure_dataset, generate, random_regular)


def test_cycle():
    g = gen_basic("cycle", 5)
    assert g.num_edges == 5 and set(g.degrees.tolist()) == {2}


def test_wheel():
    g = gen_basic("wheel", 6)
    assert g.degrees[0] == 5 and set(g.degrees[1:].tolist()) == {3}


def test_path():
    g = gen_basic("path", 7)
    assert g.node_count == 7 and g.num_edges == 6


@pytest.mark.parametrize("r", [2, 4, 9])
def test_ladder(r):
    g = gen_basic("ladder", r)
    assert g.node_count == 2 * r and g.num_edges == 3 * r - 2


@pytest.mark.parametrize("family,n", [("cycle", 2), ("wheel", 2), ("path", 1), ("ladder", 1)])
def test_below_minimum(family, n):
    with pytest.raises(ValueError):
        gen_basic(family, n)


def test_noise_zero_is_identity():
    g = gen_basic("cycle", 20)
    assert np.array_equal(add_noise_edges(g, 0.0, 1).edges, g.edges)


def test_noise_rounds_up():
    g = add_noise_edges(gen_basic("cycle", 20), 0.1, 1)
    assert g.num_edges == 22
    small = add_noise_edges(gen_basic("cycle", 4), 0.1, 1)
    assert small.num_edges == 5


def test_noise_deterministic():
    g = gen_basic("ladder", 10)
    assert np.array_equal(add_noise_edges(g, 0.3, 9).edges, add_noise_edges(g, 0.3, 9).edges)


def test_noise_on_complete_graph_warns(caplog):
    k4 = gen_basic("wheel", 4)
    out = add_noise_edges(k4, 0.5, 0)
    assert out.num_edges == 6
    assert "noise edges" in caplog.text


def test_structure_dataset():
    coll = gen_structure_dataset(0)
    assert len(coll) == 400 and coll.class_count == 4
    assert np.bincount(coll.labels).tolist() == [100] * 4
    assert all(20 <= g.node_count <= 80 for g in coll)
    again = gen_structure_dataset(0)
    assert all(np.array_equal(a.edges, b.edges) for a, b in zip(coll, again))
    other = gen_structure_dataset(1)
    assert any(a.node_count != b.node_count for a, b in zip(coll, other))


def test_structure_noise_fraction():
    coll = gen_structure_dataset(2, per_class=5)
    for g in coll:
        fam = g.meta["family"]
        n = g.node_count // 2 if fam == "ladder" else g.node_count
        base = gen_basic(fam, n).num_edges
        assert g.num_edges == base + int(np.ceil(0.1 * base - 1e-9))


def test_regular_dataset():
    coll = gen_regular_dataset(0)
    assert len(coll) == 100
    for g in coll:
        assert g.node_count == 20 and g.num_edges == 50
        assert set(g.degrees.tolist()) == {5}
        assert g.component_count() == (1 if g.label == 0 else 2)


def test_random_regular_bad_params():
    with pytest.raises(ValueError):
        random_regular(5, 3, np.random.default_rng(0))


@pytest.mark.parametrize("k", [3, 4, 8])
def test_ring_pair(k):
    big, two = gen_ring_pair(k)
    for g in (big, two):
        assert g.node_count == 2 * k and g.num_edges == 2 * k
        assert set(g.degrees.tolist()) == {2}
    assert big.component_count() == 1 and two.component_count() == 2
    assert oracle.wl_equivalent(big, two, 2 * k)


def test_generate_dispatch():
    assert len(generate(SynthSpec("regular", (10,), seed=3))) == 10
    assert len(generate(SynthSpec("rings", (4, 5)))) == 4
    with pytest.raises(ValueError):
        generate(SynthSpec("nope"))
