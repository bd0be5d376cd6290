import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyqgnn.errors import EmptyNeighborhood, LayoutMismatch
from hyqgnn.featurize import ALL_PAIRS, FeaturizedGraph
from hyqgnn.gnn import (
    GenConvParams,
    GraphBatch,
    IntermediateGraph,
    assemble_weight_matrix,
    dense_relu,
    genconv_batch,
    genconv_forward,
    layout_manifest,
    message,
    message_norm_update,
    softmax_aggregate,
)

from oracles import genconv_reference


def random_graph(rng, pairs=ALL_PAIRS):
    return FeaturizedGraph(
        node_features=rng.normal(size=(5, 7)),
        edge_index=np.array(pairs).reshape(-1, 2),
        edge_features=np.abs(rng.normal(size=(len(pairs), 4))) + 0.1,
    )


def permuted(g, perm):
    """Relabel node v as perm[v]; edges rekeyed and re-sorted."""
    nodes = np.empty_like(g.node_features)
    nodes[perm] = g.node_features
    rekeyed = {}
    for (i, j), f in zip(g.edge_index.tolist(), g.edge_features):
        a, b = sorted((perm[i], perm[j]))
        rekeyed[(a, b)] = f
    keys = sorted(rekeyed)
    return FeaturizedGraph(nodes, np.array(keys), np.array([rekeyed[k] for k in keys]))


def test_message_relu():
    np.testing.assert_allclose(message([1, -2], [0, 0], 1e-7), [1 + 1e-7, 1e-7])


def test_message_zero():
    np.testing.assert_array_equal(message(np.zeros(4), np.zeros(4), 1e-7), np.full(4, 1e-7))


def test_message_arithmetic():
    np.testing.assert_array_equal(message([2, 3], [1, -1], 0.0), [3, 2])


def test_softmax_mean_at_zero_beta():
    assert softmax_aggregate([1.0, 3.0], 0.0) == 2.0


def test_softmax_max_at_large_beta():
    assert abs(softmax_aggregate([1.0, 3.0], 1000.0) - 3.0) < 1e-6


def test_softmax_unit_beta():
    expected = (np.e * 1 + np.e**3 * 3) / (np.e + np.e**3)
    assert softmax_aggregate([1.0, 3.0], 1.0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(2.76159, abs=1e-5)


def test_softmax_empty():
    with pytest.raises(EmptyNeighborhood):
        softmax_aggregate(np.zeros((0, 3)), 1.0)


def test_softmax_per_coordinate():
    m = np.array([[1.0, 5.0], [3.0, 2.0]])
    np.testing.assert_allclose(softmax_aggregate(m, 1000.0), [3.0, 5.0], atol=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_softmax_zero_beta_is_mean(n_msg, dim, seed):
    m = np.random.default_rng(seed).normal(size=(n_msg, dim))
    np.testing.assert_allclose(softmax_aggregate(m, 0.0), m.mean(axis=0), atol=1e-12)


def test_softmax_approaches_max_monotonically(rng):
    for _ in range(50):
        m = rng.choice(np.arange(0.0, 5.0, 0.1), size=(4, 3), replace=True)
        gaps_ok = all(np.sort(col)[-1] - np.sort(col)[-2] >= 0.1 - 1e-12 for col in m.T)
        if not gaps_ok:
            continue
        prev = np.full(3, np.inf)
        for beta in (1.0, 10.0, 100.0, 1000.0):
            gap = m.max(axis=0) - softmax_aggregate(m, beta)
            assert np.all(gap <= prev + 1e-12)
            prev = gap
        assert np.all(prev < 1e-6)


def test_update_s_zero(rng):
    h, m = rng.normal(size=8), rng.normal(size=8)
    w, b = rng.normal(size=(8, 8)), rng.normal(size=8)
    np.testing.assert_array_equal(message_norm_update(h, m, 0.0, w, b), dense_relu(h, w, b))


def test_update_zero_message(rng):
    h = rng.normal(size=8)
    w, b = rng.normal(size=(8, 8)), rng.normal(size=8)
    np.testing.assert_array_equal(message_norm_update(h, np.zeros(8), 3.0, w, b), dense_relu(h, w, b))


def test_update_zero_hidden(rng):
    w, b = rng.normal(size=(8, 8)), rng.normal(size=8)
    out = message_norm_update(np.zeros(8), rng.normal(size=8), 2.0, w, b)
    np.testing.assert_array_equal(out, np.maximum(b, 0.0))


def test_layout_size_and_roundtrip(rng):
    assert GenConvParams.size(8) == 192
    vec = rng.normal(size=192)
    np.testing.assert_array_equal(GenConvParams.from_flat(vec).to_flat(), vec)
    layout = GenConvParams.layout(8)
    assert layout[0] == ("edge_encoder.weight", 0, 32)
    assert sum(n for _, _, n in layout) == 192


def test_layout_mismatch():
    with pytest.raises(LayoutMismatch):
        GenConvParams.from_flat(np.zeros(191))


def test_manifest_lists_every_block():
    text = layout_manifest(GenConvParams.layout(4))
    assert "beta" in text and "update.weight" in text
    assert len(text.strip().splitlines()) == 1 + len(GenConvParams.layout(4))


def test_zero_parameters(rng):
    ig = genconv_forward(random_graph(rng), GenConvParams.zeros())
    assert np.all(ig.node_scalars == ig.node_scalars[0])
    assert all(v == 0.0 for v in ig.edge_scalars.values())


def test_matches_straight_line_oracle(rng):
    for _ in range(20):
        g = random_graph(rng)
        p = GenConvParams.random(rng, hidden=8)
        ig = genconv_forward(g, p)
        ref_nodes, ref_edges = genconv_reference(g.node_features, g.edge_index, g.edge_features, p.blocks)
        np.testing.assert_allclose(ig.node_scalars, ref_nodes, atol=1e-10, rtol=0)
        np.testing.assert_allclose(list(ig.edge_scalars.values()), ref_edges, atol=1e-10, rtol=0)


def test_pruned_graph_matches_oracle(rng):
    pairs = [(0, 1), (1, 2), (1, 3)]  # node 4 isolated
    g = random_graph(rng, pairs)
    p = GenConvParams.random(rng, hidden=6)
    ig = genconv_forward(g, p)
    ref_nodes, _ = genconv_reference(g.node_features, g.edge_index, g.edge_features, p.blocks)
    np.testing.assert_allclose(ig.node_scalars, ref_nodes, atol=1e-10, rtol=0)


def test_oxygen_permutation_equivariance(rng):
    g = random_graph(rng)
    p = GenConvParams.random(rng)
    perm = np.array([0, 1, 3, 4, 2])
    a = genconv_forward(g, p).node_scalars
    b = genconv_forward(permuted(g, perm), p).node_scalars
    np.testing.assert_allclose(b[perm], a, atol=1e-12)


def test_edge_order_invariance(rng):
    g = random_graph(rng)
    p = GenConvParams.random(rng)
    order = rng.permutation(len(g.edge_index))
    shuffled = FeaturizedGraph(g.node_features, g.edge_index[order], g.edge_features[order])
    np.testing.assert_allclose(genconv_forward(shuffled, p).node_scalars,
                               genconv_forward(g, p).node_scalars, atol=1e-12)


def test_batch_matches_single(rng):
    graphs = [random_graph(rng) for _ in range(6)]
    p = GenConvParams.random(rng)
    nodes, edges = genconv_batch(GraphBatch.from_graphs(graphs), p)
    for k, g in enumerate(graphs):
        ig = genconv_forward(g, p)
        np.testing.assert_allclose(nodes[k], ig.node_scalars, atol=1e-12)


def test_weight_matrix_diagonal():
    ig = IntermediateGraph(np.arange(1.0, 6.0), {})
    np.testing.assert_array_equal(assemble_weight_matrix(ig), np.diag(np.arange(1.0, 6.0)))


def test_weight_matrix_edge_symmetry():
    w = assemble_weight_matrix(IntermediateGraph(np.zeros(5), {(0, 1): 7.0}))
    assert w[0, 1] == w[1, 0] == 7.0


def test_weight_matrix_symmetric(rng):
    for _ in range(20):
        ig = genconv_forward(random_graph(rng), GenConvParams.random(rng))
        w = assemble_weight_matrix(ig)
        np.testing.assert_array_equal(w, w.T)


def test_intermediate_graph_needs_five_nodes():
    with pytest.raises(ValueError):
        IntermediateGraph(np.zeros(4), {})
