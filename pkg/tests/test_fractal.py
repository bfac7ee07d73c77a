import numpy as np
import pytest

from gasket.fractal import (
    PointCloud,
    box_count,
    box_dimension,
    emit,
    read_csv,
    write_csv,
)


def sierpinski_points(depth):
    """Corners of the depth-``depth`` subtriangles of the unit right triangle."""
    pts = np.array([[0.0, 0.0]])
    for _ in range(depth):
        pts = np.concatenate([pts / 2, pts / 2 + [0.5, 0.0], pts / 2 + [0.0, 0.5]])
    return pts


def test_single_point():
    cloud = PointCloud([[0.3, 0.7]])
    for j in range(6):
        assert box_count(cloud, j) == 1


def test_uniform_grid():
    n = 32
    xs = (np.arange(n) + 0.5) / n
    cloud = PointCloud(np.array([[x, y] for x in xs for y in xs]))
    for j in range(6):
        assert box_count(cloud, j, origin=(0.0, 0.0), width=1.0) == 4 ** j


def test_sierpinski_cells():
    cloud = PointCloud(sierpinski_points(8))
    for j in range(8):
        assert box_count(cloud, j, origin=(0.0, 0.0), width=1.0) == 3 ** j


def test_filled_square_dimension():
    rng = np.random.default_rng(0)
    cloud = PointCloud(rng.random((10 ** 6, 2)))
    res = box_dimension(cloud, (3, 8))
    assert res.slope == pytest.approx(2.0, abs=0.05)
    assert res.r_squared > 0.999


def test_sierpinski_dimension():
    res = box_dimension(PointCloud(sierpinski_points(11)), (3, 9))
    assert res.slope == pytest.approx(np.log2(3), abs=0.03)


def test_count_monotone():
    rng = np.random.default_rng(1)
    cloud = PointCloud(rng.normal(size=(5000, 2)))
    prev = box_count(cloud, 0)
    for j in range(1, 9):
        cur = box_count(cloud, j)
        assert prev <= cur <= 4 * prev
        prev = cur


def test_translation_invariance():
    base = sierpinski_points(9)
    a = box_dimension(PointCloud(base), (3, 7)).slope
    b = box_dimension(PointCloud(base + [12.345, -6.789]), (3, 7)).slope
    assert abs(a - b) < 0.02


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    cloud = PointCloud(rng.random((200, 2)) * 1e3 - 500)
    path = tmp_path / "pts.csv"
    write_csv(cloud, path)
    back = read_csv(path)
    assert np.array_equal(back.points, cloud.points)


def test_empty_csv(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(PointCloud(np.empty((0, 2))), path)
    assert path.read_text() == "x,y\n"
    assert len(read_csv(path)) == 0


def test_bad_csv_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_svg_circles(tmp_path):
    cloud = PointCloud(sierpinski_points(9))
    path = emit(cloud, tmp_path / "g.svg")
    assert path.read_text().count("<circle") == 3 ** 9


def test_emit_format(tmp_path):
    cloud = PointCloud([[0.0, 1.0]])
    assert emit(cloud, tmp_path / "a.txt", fmt="csv").read_text().startswith("x,y")
    with pytest.raises(ValueError):
        emit(cloud, tmp_path / "a.png")


def test_empty_cloud_raises():
    empty = PointCloud(np.empty((0, 2)))
    with pytest.raises(ValueError):
        box_count(empty, 2)
    with pytest.raises(ValueError):
        box_dimension(empty)
    with pytest.raises(ValueError):
        empty.bbox


def test_shape_checked():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        box_dimension(PointCloud([[0.0, 0.0]]), (2, 3))


def test_from_complex():
    cloud = PointCloud.from_complex([1 + 2j, -1j])
    assert cloud.points.tolist() == [[1.0, 2.0], [0.0, -1.0]]
