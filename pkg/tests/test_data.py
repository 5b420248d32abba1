import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wodkit.data import (
    Dataset,
    apply_normalizer,
    dedupe,
    fit_normalizer,
    impute_missing,
    load_csv,
    preprocess,
    split,
    write_csv,
)
from wodkit.errors import DataError


def ds_of(X, labels=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return Dataset(X, [f"f{j}" for j in range(X.shape[1])], [str(i) for i in range(len(X))], labels)


@pytest.fixture
def csv_file(tmp_path):
    def make(text):
        p = tmp_path / "in.csv"
        p.write_text(text)
        return p
    return make


def test_load_basic(csv_file):
    ds = load_csv(csv_file("a,b\n1,2\n3,4\n5,6\n"))
    assert (ds.n, ds.d) == (3, 2)
    assert ds.feature_names == ("a", "b")
    assert ds.labels is None


def test_load_labels(csv_file):
    ds = load_csv(csv_file("a,b,y\n1,2,0\n3,4,0\n5,6,1\n"), label_column="y")
    assert ds.labels.tolist() == [False, False, True]
    assert ds.d == 2


def test_load_true_false_labels(csv_file):
    ds = load_csv(csv_file("a,y\n1,false\n2,TRUE\n"), label_column="y")
    assert ds.labels.tolist() == [False, True]


def test_load_bad_cell_names_position(csv_file):
    with pytest.raises(DataError, match=r"row 3, column 'b'"):
        load_csv(csv_file("a,b\n1,2\n3,abc\n"))


def test_load_ragged(csv_file):
    with pytest.raises(DataError, match="row 2"):
        load_csv(csv_file("a,b\n1\n"))


def test_load_missing_label_column(csv_file):
    with pytest.raises(DataError, match="label column 'y'"):
        load_csv(csv_file("a,b\n1,2\n"), label_column="y")


def test_load_unreadable(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_csv(tmp_path / "nope.csv")


def test_empty_cell_is_missing(csv_file):
    ds = load_csv(csv_file("a,b\n1,\n3,4\n"))
    assert math.isnan(ds.features[0, 1])
    assert ds.has_missing


def test_no_header_and_id_column(csv_file):
    ds = load_csv(csv_file("r1,1,2\nr2,3,4\n"), has_header=False, id_column="c0")
    assert ds.row_ids == ("r1", "r2")
    assert ds.feature_names == ("c1", "c2")


def test_csv_roundtrip(tmp_path):
    ds = ds_of([[0.1, 1e-300], [2.5, -3.0]], labels=[False, True])
    p = tmp_path / "out.csv"
    write_csv(ds, p)
    back = load_csv(p, id_column="row_id", label_column="label")
    np.testing.assert_array_equal(back.features, ds.features)
    assert back.labels.tolist() == [False, True]


def test_impute_feature_mean():
    out = impute_missing(ds_of([1.0, np.nan, 3.0]), "feature_mean")
    assert out.features[:, 0].tolist() == [1.0, 2.0, 3.0]


def test_impute_drop_rows():
    out = impute_missing(ds_of([[1, 2], [np.nan, 5]]), "drop_rows")
    assert out.features.tolist() == [[1.0, 2.0]]
    assert out.row_ids == ("0",)


def test_impute_identity():
    ds = ds_of([[1, 2], [3, 4]])
    assert impute_missing(ds, "feature_mean") is ds


def test_impute_errors():
    with pytest.raises(DataError, match="no observed"):
        impute_missing(ds_of([[1, np.nan], [2, np.nan]]), "feature_mean")
    with pytest.raises(DataError, match="every row"):
        impute_missing(ds_of([[1, np.nan], [np.nan, 2]]), "drop_rows")


def test_dedupe():
    out = dedupe(ds_of([[1, 1], [1, 1], [2, 2]]))
    assert out.features.tolist() == [[1, 1], [2, 2]]
    assert out.row_ids == ("0", "2")
    distinct = ds_of([[1, 2], [3, 4]])
    assert dedupe(distinct) is distinct
    assert dedupe(ds_of(np.ones((5, 3)))).n == 1


def test_zscore_example():
    out = apply_normalizer(ds := ds_of([1.0, 2.0, 3.0]), fit_normalizer(ds, "zscore"))
    np.testing.assert_allclose(out.features[:, 0], [-1.224744871391589, 0.0, 1.224744871391589], rtol=1e-12)


def test_minmax_example():
    ds = ds_of([0.0, 5.0, 10.0])
    out = apply_normalizer(ds, fit_normalizer(ds, "minmax"))
    assert out.features[:, 0].tolist() == [0.0, 0.5, 1.0]


@pytest.mark.parametrize("method", ["zscore", "minmax"])
def test_constant_feature_maps_to_zero(method):
    ds = ds_of([7.0, 7.0, 7.0])
    assert apply_normalizer(ds, fit_normalizer(ds, method)).features[:, 0].tolist() == [0.0, 0.0, 0.0]


def test_normalizer_reused_on_heldout():
    train = ds_of([0.0, 10.0])
    p = fit_normalizer(train, "minmax")
    assert apply_normalizer(ds_of([5.0, 20.0]), p).features[:, 0].tolist() == [0.5, 2.0]


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 4)), elements=finite))
def test_zscore_fit_set_mean_zero_and_order_kept(X):
    ds = ds_of(X)
    out = apply_normalizer(ds, fit_normalizer(ds, "zscore")).features
    assert np.all(np.abs(out.mean(axis=0)) < 1e-9)
    for j in range(X.shape[1]):
        if X[:, j].std() > 0:
            # affine with positive scale: weak order is preserved
            o = np.argsort(X[:, j], kind="stable")
            assert np.all(np.diff(out[o, j]) >= 0)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 30), st.integers(1, 4)), elements=finite))
def test_minmax_range(X):
    ds = ds_of(X)
    out = apply_normalizer(ds, fit_normalizer(ds, "minmax")).features
    for j in range(X.shape[1]):
        if np.ptp(X[:, j]) > 0:
            assert out[:, j].min() == pytest.approx(0.0, abs=1e-9)
            assert out[:, j].max() == pytest.approx(1.0, abs=1e-9)


def test_split_sizes_and_partition():
    ds = ds_of(np.arange(10.0), labels=[i % 3 == 0 for i in range(10)])
    tr, te = split(ds, 0.8, seed=3)
    assert (tr.n, te.n) == (8, 2)
    ids = sorted(tr.row_ids + te.row_ids, key=int)
    assert ids == list(ds.row_ids)
    for part in (tr, te):
        for rid, x, y in zip(part.row_ids, part.features[:, 0], part.labels):
            assert x == float(rid) and y == (int(rid) % 3 == 0)


def test_split_deterministic():
    ds = ds_of(np.arange(50.0))
    a, b = split(ds, 0.5, 11), split(ds, 0.5, 11)
    assert a[0].row_ids == b[0].row_ids


def test_split_errors():
    with pytest.raises(DataError):
        split(ds_of([1.0, 2.0]), 0.1, 0)
    with pytest.raises(DataError):
        split(ds_of([1.0, 2.0]), 1.0, 0)


def test_preprocess_pipeline_yields_valid_dataset(csv_file):
    ds = load_csv(csv_file("a,b\n1,\n1,\n,3\n4,5\n"))
    ds = preprocess(ds, "feature_mean", dedup=True)
    ds = apply_normalizer(ds, fit_normalizer(ds, "zscore"))
    assert np.all(np.isfinite(ds.features))
    assert ds.n == 3


def test_dataset_invariants():
    with pytest.raises(DataError):
        ds_of(np.empty((0, 2)))
    with pytest.raises(DataError):
        Dataset(np.ones((2, 1)), ["a"], ["0", "1"], labels=[True])
    ds = ds_of([[1.0]])
    with pytest.raises(ValueError):
        ds.features[0, 0] = 2.0
