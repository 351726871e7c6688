import numpy as np
import pytest

from labelenhance import (LdlDataset, ParseError, binarize,
                          check_logical_labels, generate_artificial,
                          load_dataset, load_matrix, save_dataset,
                          save_matrix, standardize_features)


# ---------------------------------------------------------------- generator

def test_artificial_shape():
    ds = generate_artificial()
    assert ds.n_instances == 2601
    assert ds.n_features == 3
    assert ds.n_labels == 3


def test_artificial_distributions_valid():
    ds = generate_artificial()
    assert np.abs(ds.D.sum(axis=0) - 1.0).max() < 1e-12
    assert np.all(ds.D >= 0)


def test_artificial_deterministic():
    a = generate_artificial()
    b = generate_artificial()
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.D, b.D)


def test_artificial_origin_instance_oracle():
    # grid point (0, 0): third feature sin(0) = 0, lift w = (1, 1, 1), so
    # the score cascade gives (49, 7.49^2, (7 + 0.01 * 7.49^2)^2)
    ds = generate_artificial()
    j = 25 * 51 + 25   # row-major position of the middle grid point
    assert np.allclose(ds.X[:, j], [0.0, 0.0, 0.0], atol=1e-15)
    phi = np.array([49.0, 56.1001, 57.168736122001])
    expected = phi / phi.sum()
    assert np.allclose(ds.D[:, j], expected, atol=1e-12)
    assert np.allclose(expected,
                       [0.30196802522919186, 0.34572319208490176, 0.3523087826859063],
                       atol=1e-15)


def test_artificial_grid_range():
    ds = generate_artificial()
    assert ds.X[0].min() == -1.0 and ds.X[0].max() == 1.0
    # 51 distinct grid levels with spacing 0.04
    levels = np.unique(ds.X[0])
    assert levels.size == 51
    assert np.allclose(np.diff(levels), 0.04, atol=1e-12)


# ---------------------------------------------------------------- binarization

def test_binarize_first_degree_exceeds_threshold():
    L = binarize(np.array([[0.7], [0.2], [0.1]]))
    assert L[:, 0].tolist() == [1.0, 0.0, 0.0]


def test_binarize_cumulative_two_labels():
    L = binarize(np.array([[0.4], [0.35], [0.25]]))
    assert L[:, 0].tolist() == [1.0, 1.0, 0.0]


def test_binarize_uniform_tie_break():
    third = 1.0 / 3.0
    L = binarize(np.array([[third], [third], [third]]))
    assert L[:, 0].tolist() == [1.0, 1.0, 0.0]


def test_binarize_mean_strategy():
    L = binarize(np.array([[0.6], [0.3], [0.1]]), strategy="mean")
    # column mean is 1/3: only the first degree exceeds it
    assert L[:, 0].tolist() == [1.0, 0.0, 0.0]
    uniform = np.full((4, 2), 0.25)
    L = binarize(uniform, strategy="mean")
    assert check_logical_labels(L) is not None


def test_binarize_topk():
    D = np.array([[0.5, 0.1], [0.3, 0.2], [0.2, 0.7]])
    L = binarize(D, strategy="topk", k=2)
    assert L[:, 0].tolist() == [1.0, 1.0, 0.0]
    assert L[:, 1].tolist() == [0.0, 1.0, 1.0]
    with pytest.raises(ValueError):
        binarize(D, strategy="topk", k=0)


def test_binarize_always_marks_at_least_one():
    rng = np.random.default_rng(1)
    M = rng.uniform(0.01, 1.0, (5, 40))
    D = M / M.sum(axis=0, keepdims=True)
    for strategy in ("cumulative", "mean", "topk"):
        L = binarize(D, strategy=strategy)
        assert L.any(axis=0).all()
        assert np.isin(L, (0.0, 1.0)).all()


def test_binarize_unknown_strategy():
    with pytest.raises(ValueError):
        binarize(np.array([[1.0]]), strategy="nope")


# ---------------------------------------------------------------- file round trip

def test_roundtrip_artificial(tmp_path):
    ds = generate_artificial()
    path = tmp_path / "artificial.ldl"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert np.abs(back.X - ds.X).max() < 1e-12
    assert np.abs(back.D - ds.D).max() < 1e-12
    assert back.name == "artificial"


def test_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    X = rng.standard_normal((4, 7))
    M = rng.uniform(0.1, 1.0, (3, 7))
    ds = LdlDataset(name="t", X=X, D=M / M.sum(axis=0, keepdims=True))
    path = tmp_path / "t.ldl"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert np.array_equal(back.X, ds.X)
    assert np.array_equal(back.D, ds.D)


def test_load_rejects_bad_sum(tmp_path):
    path = tmp_path / "bad.ldl"
    path.write_text("#ldl 1 2 1\n1.0\n\n0.5 0.3\n")
    with pytest.raises(ParseError) as exc:
        load_dataset(path)
    assert "sums to" in str(exc.value)
    assert exc.value.line == 4


def test_load_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.ldl"
    path.write_text("")
    with pytest.raises(ParseError):
        load_dataset(path)


def test_load_reports_row_length_mismatch(tmp_path):
    path = tmp_path / "short.ldl"
    path.write_text("#ldl 2 2 1\n1.0\n\n0.5 0.5\n")
    with pytest.raises(ParseError) as exc:
        load_dataset(path)
    assert exc.value.line == 2


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "h.ldl"
    path.write_text("#nope 1 1 1\n")
    with pytest.raises(ParseError):
        load_dataset(path)


def test_load_rejects_truncation_and_trailing(tmp_path):
    path = tmp_path / "trunc.ldl"
    path.write_text("#ldl 1 1 2\n1.0\n2.0\n\n1.0\n")
    with pytest.raises(ParseError):
        load_dataset(path)
    path.write_text("#ldl 1 1 1\n1.0\n\n1.0\njunk\n")
    with pytest.raises(ParseError):
        load_dataset(path)


def test_matrix_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    M = rng.standard_normal((3, 5))
    path = tmp_path / "m.txt"
    save_matrix(M, path, "dist")
    back, kind = load_matrix(path)
    assert kind == "dist"
    assert np.array_equal(back, M)
    with pytest.raises(ParseError):
        load_matrix(path, kind="labels")


# ---------------------------------------------------------------- standardize

def test_standardize_moments():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((3, 50)) * 5 + 2
    Z = standardize_features(X)
    assert np.abs(Z.mean(axis=1)).max() < 1e-12
    assert np.abs(Z.std(axis=1) - 1.0).max() < 1e-10


def test_standardize_idempotent():
    rng = np.random.default_rng(5)
    X = standardize_features(rng.standard_normal((2, 40)))
    Z = standardize_features(X)
    assert np.abs(Z - X).max() < 1e-12


def test_standardize_constant_feature():
    X = np.vstack([np.ones(10), np.arange(10.0)])
    with pytest.warns(UserWarning):
        Z = standardize_features(X)
    assert np.all(Z[0] == 0.0)


# ---------------------------------------------------------------- dataset invariants

def test_dataset_validation():
    X = np.ones((2, 3))
    good = np.full((2, 3), 0.5)
    LdlDataset(name="ok", X=X, D=good)
    with pytest.raises(ValueError):
        LdlDataset(name="bad", X=X, D=np.full((2, 4), 0.5))
    with pytest.raises(ValueError):
        LdlDataset(name="bad", X=X, D=np.full((2, 3), 0.4))
    with pytest.raises(ValueError):
        LdlDataset(name="bad", X=X, D=np.array([[1.2, 0.5, 0.5], [-0.2, 0.5, 0.5]]))


def test_logical_label_checks():
    with pytest.raises(ValueError):
        check_logical_labels(np.array([[0.5, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        check_logical_labels(np.array([[0.0, 1.0], [0.0, 0.0]]))
