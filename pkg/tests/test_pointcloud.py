import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import distances_double_loop
from topogen.errors import InputError
from topogen.pointcloud import (
    DistanceMatrix,
    PointCloud,
    load_csv,
    pairwise_distances,
    sample_batch,
    standardize,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_simple(tmp_path):
    cloud = load_csv(write(tmp_path, "a,b\n0,0\n1,1\n"))
    assert (cloud.n, cloud.d) == (2, 2)
    assert cloud.columns == ("a", "b")
    np.testing.assert_array_equal(cloud.points, [[0, 0], [1, 1]])


def test_load_kaggle_schema_selects_29_columns(tmp_path):
    cols = ["Time"] + [f"V{i}" for i in range(1, 29)] + ["Amount", "Class"]
    rng = np.random.default_rng(0)
    rows = [",".join(repr(float(v)) for v in rng.normal(size=30)) + ",0" for _ in range(5)]
    p = write(tmp_path, ",".join(cols) + "\n" + "\n".join(rows) + "\n")
    feats = [f"V{i}" for i in range(1, 29)] + ["Amount"]
    cloud = load_csv(p, feats, label_column="Class")
    assert cloud.d == 29
    assert list(cloud.labels) == ["0"] * 5


def test_label_column_excluded_from_all(tmp_path):
    cloud = load_csv(write(tmp_path, "x,y,Class\n1,2,a\n3,4,b\n"), label_column="Class")
    assert cloud.d == 2
    assert list(cloud.labels) == ["a", "b"]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("a,b\n0,abc\n", "row 2, column 'b'"),
        ("a,b\n0,1\n2\n", "row 3 has 1 fields"),
        ("a,b\n0,nan\n", "row 2, column 'b': non-finite"),
        ("a,b\n", "no data rows"),
        ("", "empty file"),
    ],
)
def test_load_errors_name_location(tmp_path, text, fragment):
    with pytest.raises(InputError, match=fragment):
        load_csv(write(tmp_path, text))


def test_load_missing_file_names_path(tmp_path):
    with pytest.raises(InputError, match="nope.csv"):
        load_csv(tmp_path / "nope.csv")


def test_load_unknown_and_empty_selection(tmp_path):
    p = write(tmp_path, "a,b\n0,1\n")
    with pytest.raises(InputError, match="not in header: z"):
        load_csv(p, ["z"])
    with pytest.raises(InputError, match="no feature columns"):
        load_csv(p, [])


def test_csv_round_trip_is_lossless(tmp_path, rng):
    cloud = PointCloud(rng.normal(size=(7, 3)) * 1e3)
    path = tmp_path / "c.csv"
    cloud.to_csv(path)
    back = load_csv(path)
    assert back.points.tobytes() == cloud.points.tobytes()


def test_pointcloud_rejects_non_finite():
    with pytest.raises(InputError):
        PointCloud(np.array([[0.0, np.inf]]))
    with pytest.raises(InputError):
        PointCloud(np.zeros((0, 2)))


def test_points_are_read_only(rng):
    cloud = PointCloud(rng.normal(size=(3, 2)))
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 1.0


def test_distance_345():
    d = pairwise_distances(PointCloud(np.array([[0.0, 0.0], [3.0, 4.0]])))
    np.testing.assert_array_equal(d.values, [[0, 5], [5, 0]])


def test_distance_single_point():
    d = pairwise_distances(PointCloud(np.array([[1.0, 2.0]])))
    np.testing.assert_array_equal(d.values, [[0.0]])


def test_distance_matches_double_loop(rng):
    x = rng.normal(size=(5, 3))
    d = pairwise_distances(PointCloud(x)).values
    np.testing.assert_allclose(d, distances_double_loop(x), atol=1e-12, rtol=0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 12), st.integers(1, 4)),
              elements=st.floats(-1e3, 1e3)))
def test_distance_matrix_metric_properties(x):
    d = pairwise_distances(PointCloud(x)).values
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    # d(i,k) <= d(i,j) + d(j,k) for all i, j, k
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)


def test_distance_matrix_validation():
    with pytest.raises(InputError):
        DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(InputError):
        DistanceMatrix(np.array([[1.0]]))
    with pytest.raises(InputError):
        DistanceMatrix(np.zeros((2, 3)))


def test_sample_full_is_permutation(rng):
    cloud = PointCloud(rng.normal(size=(9, 2)))
    b = sample_batch(cloud, 9, 3)
    assert sorted(map(tuple, b.points)) == sorted(map(tuple, cloud.points))


def test_sample_deterministic(rng):
    cloud = PointCloud(rng.normal(size=(20, 2)))
    a = sample_batch(cloud, 1, 42)
    b = sample_batch(cloud, 1, 42)
    assert a.points.tobytes() == b.points.tobytes()


def test_sample_seeds_differ():
    cloud = PointCloud(np.arange(1000.0).reshape(-1, 1))
    same = 0
    for t in range(100):
        a = set(sample_batch(cloud, 64, 2 * t).points.ravel())
        b = set(sample_batch(cloud, 64, 2 * t + 1).points.ravel())
        same += a == b
    # two independent 64-subsets of 1000 coincide with negligible probability
    assert same == 0


def test_sample_bounds():
    cloud = PointCloud(np.zeros((3, 1)))
    with pytest.raises(InputError):
        sample_batch(cloud, 4, 0)
    with pytest.raises(InputError):
        sample_batch(cloud, 0, 0)


def test_standardize_two_points():
    out = standardize(PointCloud(np.array([[0.0], [2.0]])))
    np.testing.assert_array_equal(out.points.ravel(), [-1.0, 1.0])


def test_standardize_constant_column():
    out = standardize(PointCloud(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])))
    np.testing.assert_array_equal(out.points[:, 0], [0.0, 0.0, 0.0])


def test_standardize_moments_and_idempotence(rng):
    x = rng.normal(loc=3.0, scale=7.0, size=(10, 3))
    once = standardize(PointCloud(x))
    assert np.all(np.abs(once.points.mean(axis=0)) < 1e-12)
    assert np.all(np.abs(once.points.std(axis=0) - 1) < 1e-12)
    twice = standardize(once)
    np.testing.assert_allclose(twice.points, once.points, atol=1e-12, rtol=0)


def test_standardize_needs_two_points():
    with pytest.raises(InputError):
        standardize(PointCloud(np.zeros((1, 2))))
