import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyqgnn.core import CrystalStructure
from hyqgnn.errors import DegenerateGeometry, InvalidComposition, ParseError, SchemaError
from hyqgnn.featurize import (
    ALL_PAIRS,
    EDGE_FEATURES,
    NODE_FEATURES,
    FeaturizedGraph,
    build_graph,
    coulomb_offdiagonal,
    featurize_structures,
    flat_column_names,
    flatten_graph,
    graphs_to_table,
    load_graphs_json,
    load_table_csv,
    save_graphs_json,
    save_table_csv,
)

from conftest import cubic_perovskite


def test_coulomb_unit_case():
    assert coulomb_offdiagonal(1, 1, 1.0) == 1.0


def test_coulomb_arithmetic():
    assert coulomb_offdiagonal(8, 22, 2.0) == 88.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 83), st.integers(1, 83), st.floats(0.1, 20.0))
def test_coulomb_symmetric(zi, zj, d):
    assert coulomb_offdiagonal(zi, zj, d) == coulomb_offdiagonal(zj, zi, d)


def test_coulomb_rejects_zero_distance():
    with pytest.raises(DegenerateGeometry):
        coulomb_offdiagonal(8, 8, 0.0)


def test_graph_shape(srtio3):
    g = build_graph(srtio3)
    assert g.node_features.shape == (5, len(NODE_FEATURES))
    assert [tuple(p) for p in g.edge_index.tolist()] == list(ALL_PAIRS)
    assert g.edge_features.shape == (10, len(EDGE_FEATURES))
    assert np.all(g.edge_features[:, 0] > 0)
    assert g.target == -3.5


def test_node_feature_order(srtio3):
    g = build_graph(srtio3)
    assert g.node_features[0, 0] == 38  # Sr
    assert g.node_features[1, 0] == 22  # Ti
    assert g.node_features[2, 2] == pytest.approx(3.44)


def test_oxygen_pair_has_zero_differences(srtio3):
    g = build_graph(srtio3)
    k = list(ALL_PAIRS).index((2, 3))
    assert g.edge_features[k, 2] == 0.0
    assert g.edge_features[k, 3] == 0.0


def test_lattice_doubling_halves_distance_features(srtio3):
    g1 = build_graph(srtio3)
    g2 = build_graph(srtio3.scaled(2.0))
    np.testing.assert_allclose(g2.edge_features[:, :2], g1.edge_features[:, :2] / 2, rtol=1e-12)
    np.testing.assert_array_equal(g2.edge_features[:, 2:], g1.edge_features[:, 2:])


def test_oxygen_relabelling_preserves_multisets(srtio3):
    s = srtio3
    swapped = CrystalStructure(s.lattice, (s.sites[0], s.sites[1], s.sites[4], s.sites[2], s.sites[3]))
    g1, g2 = build_graph(s), build_graph(swapped)

    def rows(a):
        return sorted(map(tuple, np.round(a, 10)))

    assert rows(g1.node_features) == rows(g2.node_features)
    assert rows(g1.edge_features) == rows(g2.edge_features)


def test_rejects_non_abo3(srtio3):
    bad = CrystalStructure(srtio3.lattice, srtio3.sites[:4])
    with pytest.raises(InvalidComposition):
        build_graph(bad)


def test_cutoff_prunes_edges(srtio3):
    g = build_graph(srtio3, cutoff=3.0)
    assert 0 < len(g.edge_index) < 10
    row, _ = flatten_graph(g)
    assert row.shape == (75,)


def test_flatten_length_and_names(srtio3):
    row, names = flatten_graph(build_graph(srtio3))
    assert row.shape == (75,)
    assert len(names) == 75
    assert names[0] == "atomic_number(A)"
    assert "first_ionization(A)" in names
    assert names[35] == "inverse_distance(A-B)"


def test_identical_graphs_identical_rows(srtio3):
    a, _ = flatten_graph(build_graph(srtio3))
    b, _ = flatten_graph(build_graph(cubic_perovskite(target=-3.5)))
    np.testing.assert_array_equal(a, b)


def test_threaded_featurization_matches(synthetic_graphs):
    from hyqgnn.harness.synthetic import generate_structures

    structures = generate_structures(60, seed=3)
    threaded = featurize_structures(structures, threads=4)
    for a, b in zip(threaded, synthetic_graphs):
        np.testing.assert_array_equal(a.node_features, b.node_features)


def test_graph_validation():
    with pytest.raises(SchemaError):
        FeaturizedGraph(np.zeros((4, 7)), [], np.zeros((0, 4)))
    with pytest.raises(SchemaError):
        FeaturizedGraph(np.zeros((5, 7)), [(1, 1)], np.ones((1, 4)))
    with pytest.raises(SchemaError):
        FeaturizedGraph(np.zeros((5, 7)), [(0, 1), (0, 1)], np.ones((2, 4)))


def test_json_roundtrip(tmp_path, synthetic_graphs):
    path = tmp_path / "g.json"
    save_graphs_json(synthetic_graphs[:5], path)
    back = load_graphs_json(path)
    for a, b in zip(back, synthetic_graphs[:5]):
        np.testing.assert_array_equal(a.node_features, b.node_features)
        np.testing.assert_array_equal(a.edge_features, b.edge_features)
        assert a.target == b.target


def test_json_parse_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('[\n {"node_features": [}\n]')
    with pytest.raises(ParseError, match="line 2"):
        load_graphs_json(path)


def test_csv_roundtrip(tmp_path, synthetic_graphs):
    path = tmp_path / "t.csv"
    save_table_csv(synthetic_graphs, path)
    x, y, names = load_table_csv(path)
    x0, y0, names0 = graphs_to_table(synthetic_graphs)
    assert names == names0 == flat_column_names()
    np.testing.assert_array_equal(x, x0)
    np.testing.assert_array_equal(y, y0)
    assert path.read_text().splitlines()[0].endswith(",target_ev")


def test_json_records_carry_target(tmp_path, srtio3):
    path = tmp_path / "one.json"
    save_graphs_json([build_graph(srtio3)], path)
    assert json.loads(path.read_text())[0]["target_ev"] == -3.5
