import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyqgnn.baseline import GbdtConfig, GbdtModel, best_split, feature_importances, fit, predict
from hyqgnn.errors import DegenerateDataWarning, WidthMismatch
from hyqgnn.harness.synthetic import single_feature_table

from oracles import best_split_bruteforce


def test_generating_feature_dominates():
    x, y = single_feature_table(seed=0)
    model = fit(x, y, GbdtConfig(n_trees=100))
    names = [f"f{i}" for i in range(x.shape[1])]
    ranking = feature_importances(model, names)
    assert ranking[0][0] == "f3"
    assert ranking[0][1] > 0.9
    assert sum(s for _, s in ranking) == pytest.approx(1.0)


def test_overfit_recovers_targets(rng):
    x = rng.normal(size=(20, 4))
    y = rng.normal(size=20)
    model = fit(x, y, GbdtConfig(n_trees=500, max_depth=6, learning_rate=0.3, min_samples_leaf=1))
    assert np.max(np.abs(model.predict(x) - y)) < 1e-3


def test_constant_target_warns():
    x = np.arange(20.0).reshape(10, 2)
    with pytest.warns(DegenerateDataWarning):
        model = fit(x, np.full(10, 3.0))
    assert len(model.trees) == 0
    np.testing.assert_array_equal(model.predict(x), np.full(10, 3.0))
    assert all(s == 0.0 for _, s in feature_importances(model, ["a", "b"]))


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 30), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_split_matches_bruteforce(n, d, min_leaf, seed):
    r = np.random.default_rng(seed)
    x = r.integers(0, 6, size=(n, d)).astype(float)  # ties on purpose
    y = r.normal(size=n)
    gain, f, thr = best_split(x, y, min_leaf)
    ref_gain, ref_f, ref_thr = best_split_bruteforce(x, y, min_leaf)
    if ref_f is None or ref_gain <= 1e-12:
        assert f is None
    else:
        assert gain == pytest.approx(ref_gain, rel=1e-9, abs=1e-9)
        assert (f, thr) == (ref_f, ref_thr)


def test_width_mismatch(rng):
    model = fit(rng.normal(size=(10, 3)), rng.normal(size=10), GbdtConfig(n_trees=3))
    with pytest.raises(WidthMismatch):
        model.predict(np.zeros((1, 4)))
    with pytest.raises(WidthMismatch):
        feature_importances(model, ["a", "b"])


def test_single_row_predict(rng):
    x, y = rng.normal(size=(12, 3)), rng.normal(size=12)
    model = fit(x, y, GbdtConfig(n_trees=5))
    assert isinstance(predict(model, x[0]), float)
    assert predict(model, x[0]) == pytest.approx(model.predict(x)[0])


def test_save_load_roundtrip(tmp_path, rng):
    x, y = rng.normal(size=(30, 5)), rng.normal(size=30)
    model = fit(x, y, GbdtConfig(n_trees=20, subsample=0.7, seed=4))
    model.save(tmp_path / "m.json")
    back = GbdtModel.load(tmp_path / "m.json")
    np.testing.assert_array_equal(back.predict(x), model.predict(x))
    np.testing.assert_array_equal(back.importances, model.importances)


def test_subsample_seeded(rng):
    x, y = rng.normal(size=(40, 3)), rng.normal(size=40)
    cfg = GbdtConfig(n_trees=10, subsample=0.5, seed=7)
    np.testing.assert_array_equal(fit(x, y, cfg).predict(x), fit(x, y, cfg).predict(x))


def test_ties_keep_column_order():
    model = GbdtModel(0.0, [], np.array([1.0, 2.0, 1.0]), 0.1, 3)
    assert [n for n, _ in feature_importances(model, ["a", "b", "c"])] == ["b", "a", "c"]


def test_config_validation():
    for bad in ({"n_trees": 0}, {"learning_rate": 0.0}, {"max_depth": 0}, {"subsample": 1.5}):
        with pytest.raises(ValueError):
            GbdtConfig(**bad)


def test_no_warning_on_regular_data(rng):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit(rng.normal(size=(10, 2)), rng.normal(size=10), GbdtConfig(n_trees=2))
