import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamlss_boost.data import (
    Dataset,
    FitConfig,
    FittedModel,
    holdout_indices,
    load_csv,
    round_half_up,
    write_csv,
)
from gamlss_boost.errors import DataError
from gamlss_boost.steps import preset


def test_load_small(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("y,x1,x2\n1,2,3\n4,5,6\n7,8,9\n")
    d = load_csv(f, "y")
    assert (d.n, d.p) == (3, 2)
    assert d.names == ("x1", "x2")
    np.testing.assert_array_equal(d.y, [1, 4, 7])


def test_load_response_not_first(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("a,resp,b\n1,2,3\n4,5,6\n")
    d = load_csv(f, "resp")
    assert d.names == ("a", "b")
    np.testing.assert_array_equal(d.X[:, 1], [3, 6])


@pytest.mark.parametrize(
    "body, message",
    [
        ("y,x1\n1,\n2,3\n", "missing value at row 1, column x1"),
        ("y,x1\n1,2\n2,abc\n", "non-numeric value 'abc' at row 2, column x1"),
        ("y,x1\n1,2\n2,inf\n", "non-finite value at row 2, column x1"),
    ],
)
def test_load_errors(tmp_path, body, message):
    f = tmp_path / "d.csv"
    f.write_text(body)
    with pytest.raises(DataError, match=message):
        load_csv(f, "y")


def test_load_missing_file_and_column(tmp_path):
    with pytest.raises(DataError, match="file not found"):
        load_csv(tmp_path / "nope.csv", "y")
    f = tmp_path / "d.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(DataError, match="response column 'y'"):
        load_csv(f, "y")


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 12),
    st.integers(0, 4),
    st.integers(0, 2**31 - 1),
)
def test_csv_round_trip(tmp_path_factory, n, p, seed):
    rng = np.random.default_rng(seed)
    d = Dataset(rng.normal(size=n) * 1e3, rng.normal(size=(n, p)), [f"v{j}" for j in range(p)])
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(d, path)
    back = load_csv(path, "y")
    np.testing.assert_array_equal(back.y, d.y)
    np.testing.assert_array_equal(back.X, d.X)
    assert back.names == d.names


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset([1.0, np.nan], [[1.0], [2.0]], ["x"])
    with pytest.raises(DataError):
        Dataset([1.0, 2.0], [[1.0], [np.inf]], ["x"])
    with pytest.raises(DataError):
        Dataset([1.0, 2.0], [[1.0, 2.0]], ["x"])
    d = Dataset([1.0, 2.0], [[1.0], [2.0]], ["x"])
    with pytest.raises(ValueError):
        d.X[0, 0] = 5.0


def test_holdout_sizes_and_determinism():
    tr, va = holdout_indices(9, 1 / 3, 5)
    assert (tr.size, va.size) == (6, 3)
    tr2, va2 = holdout_indices(9, 1 / 3, 5)
    np.testing.assert_array_equal(tr, tr2)
    np.testing.assert_array_equal(va, va2)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 200), st.floats(0.05, 0.95), st.integers(0, 10**6))
def test_holdout_partition(n, frac, seed):
    tr, va = holdout_indices(n, frac, seed)
    assert set(tr) | set(va) == set(range(n))
    assert not set(tr) & set(va)


def test_round_half_up():
    assert [round_half_up(v) for v in (0.5, 1.5, 2.5, 2.49, -0.5)] == [1, 2, 3, 2, 0]


def test_fit_config_validation():
    spec = preset("F-F", "gaussian")
    assert FitConfig("gaussian", spec, 10).lambda_s == 0.1
    with pytest.raises(ValueError):
        FitConfig("gaussian", spec, 0)
    with pytest.raises(ValueError):
        FitConfig("gaussian", spec, 5, lambda_s=0.0)


def test_model_json_round_trip(tmp_path):
    m = FittedModel(
        "weibull", [0.1, 0.2], [0.01, -0.02], [[1.0, 0.0], [0.0, -0.5]], ["a", "b"], 7,
        "A-BL", 0.1, ("lambda", "k"),
    )
    path = tmp_path / "m.json"
    m.save_json(path)
    back = FittedModel.load_json(path)
    np.testing.assert_array_equal(back.coef, m.coef)
    np.testing.assert_array_equal(back.offsets, m.offsets)
    assert back.names == m.names and back.m_stop == 7 and back.scheme == "A-BL"
    X = np.array([[1.0, 2.0], [0.0, 0.0]])
    np.testing.assert_allclose(back.predict(X), m.predict(X))
