"""Point clouds, box counting and export."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats


@dataclass
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (N, 2)")
        self.points = pts

    def __len__(self):
        return len(self.points)

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.points) == 0:
            raise ValueError("empty cloud has no bounding box")
        return self.points.min(axis=0), self.points.max(axis=0)

    @classmethod
    def from_complex(cls, z) -> "PointCloud":
        z = np.asarray(z, dtype=complex)
        return cls(np.column_stack([z.real, z.imag]))


@dataclass
class BoxCountResult:
    scales: list[float]
    counts: list[int]
    slope: float
    r_squared: float
    anchor_slopes: list[float] = field(default_factory=list)
    j_range: tuple[int, int] = (0, 0)


def _grid(cloud: PointCloud, pad: float):
    lo, hi = cloud.bbox
    width = float(max(hi - lo))
    if width == 0.0:
        width = 1.0
    origin = lo - pad * width
    return origin, width * (1 + 2 * pad)


def box_count(cloud: PointCloud, j: int, origin=None, width: float | None = None,
              pad: float = 0.01) -> int:
    """Occupied cells of side ``width / 2**j`` on a grid anchored at ``origin``.

    By default the grid is the bounding box (square, longest side) padded
    by ``pad`` of its width on every side.
    """
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    if j < 0:
        raise ValueError("j must be >= 0")
    if origin is None or width is None:
        o, w = _grid(cloud, pad)
        origin = o if origin is None else np.asarray(origin, dtype=float)
        width = w if width is None else width
    side = width / 2 ** j
    cells = np.floor((cloud.points - np.asarray(origin, dtype=float)) / side).astype(np.int64)
    # a point on the far edge of the grid belongs to the last cell
    cells[cells == 2 ** j] = 2 ** j - 1
    return len(np.unique(cells, axis=0))


_JITTER = ((0.0, 0.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25))


def box_dimension(cloud: PointCloud, j_range: tuple[int, int] = (4, 9),
                  pad: float = 0.01, anchors: int = 4) -> BoxCountResult:
    """Least-squares slope of ``log N(eps)`` against ``log(1/eps)``.

    The slope is averaged over ``anchors`` grids shifted by fractions of
    the coarsest cell; counts and r-squared refer to the unshifted grid.
    """
    jmin, jmax = j_range
    if jmax - jmin + 1 < 3:
        raise ValueError("need at least 3 scales")
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    js = np.arange(jmin, jmax + 1)
    origin, width = _grid(cloud, pad)
    slopes = []
    first = None
    for a in range(max(1, anchors)):
        off = np.array(_JITTER[a % len(_JITTER)]) * width / 2 ** jmin
        counts = [box_count(cloud, int(j), origin - off, width) for j in js]
        fit = stats.linregress(js * math.log(2), np.log(counts))
        slopes.append(float(fit.slope))
        if first is None:
            first = (counts, fit)
    counts, fit = first
    per_cell = len(cloud) / counts[-1]
    if per_cell < 4:
        warnings.warn(f"only {per_cell:.1f} points per occupied cell at the finest scale")
    if not np.isfinite(fit.slope):
        raise ValueError("degenerate fit")
    return BoxCountResult([float(width / 2 ** j) for j in js], [int(c) for c in counts],
                          float(np.mean(slopes)), float(fit.rvalue ** 2), slopes,
                          (jmin, jmax))


# --------------------------------------------------------------------------
# files


def write_csv(cloud: PointCloud, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x", "y"])
        for x, y in cloud.points:
            out.writerow([format(x, ".17g"), format(y, ".17g")])


def read_csv(path) -> PointCloud:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "y"]:
        raise ValueError(f"{path}: expected an 'x,y' header")
    pts = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    return PointCloud(pts.reshape(-1, 2))


def write_svg(cloud: PointCloud, path, size: int = 1000) -> None:
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" '
             f'width="{size}" height="{size}">']
    if len(cloud):
        lo, hi = cloud.bbox
        span = float(max(hi - lo)) or 1.0
        # y grows downward in SVG
        xs = (cloud.points[:, 0] - lo[0]) / span * size
        ys = size - (cloud.points[:, 1] - lo[1]) / span * size
        for x, y in zip(xs, ys):
            lines.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="0.5"/>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


def emit(cloud: PointCloud, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "csv":
        write_csv(cloud, path)
    elif fmt == "svg":
        write_svg(cloud, path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path
