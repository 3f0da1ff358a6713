import numpy as np
import pytest

from benchmark.dataio import point_header, read_points_csv, write_column_csv, write_points_csv
from estimators.errors import DataError


def test_points_survive_write_and_read(tmp_path, rng):
    X = rng.normal(size=(25, 3)) * 1e-7 + np.pi
    path = write_points_csv(tmp_path / "points.csv", X)
    assert path.read_text().splitlines()[0] == "x1,x2,x3"
    np.testing.assert_array_equal(read_points_csv(path), X)


def test_headerless_file(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("1.5,2\n-3,4e-2\n")
    np.testing.assert_array_equal(read_points_csv(path), [[1.5, 2.0], [-3.0, 0.04]])


def test_header_only_file_gives_empty_set(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("x1,x2\n")
    assert read_points_csv(path).shape == (0, 2)


@pytest.mark.parametrize(
    "content",
    [
        "",
        "x1,x2\n1,2\n3\n",
        "x1,x2\n1,two\n",
        "1,2\nnan,3\n",
        "1,inf\n",
    ],
)
def test_malformed_files(content, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(DataError):
        read_points_csv(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_points_csv(tmp_path / "absent.csv")


def test_column_file(tmp_path):
    path = write_column_csv(tmp_path / "out" / "density.csv", "density", [0.125, 1e-300])
    assert path.read_text().splitlines() == ["density", "0.125", "1e-300"]


def test_point_header():
    assert point_header(2) == ["x1", "x2"]
