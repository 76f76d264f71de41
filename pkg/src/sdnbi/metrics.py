"""Quality metrics for bi-objective front approximations."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from sdnbi.core import ObjectiveBounds, ParetoArchive, denormalize

PointsLike = Union[ParetoArchive, Sequence[Sequence[float]], np.ndarray]


def _z(points: PointsLike) -> np.ndarray:
    if isinstance(points, ParetoArchive):
        return points.z_array()
    return np.asarray(points, dtype=float).reshape(-1, 2)


def nondominated(z: np.ndarray) -> np.ndarray:
    """Nondominated subset of an (n, 2) array, sorted by the first column."""
    if len(z) == 0:
        return z.reshape(0, 2)
    order = np.lexsort((z[:, 1], z[:, 0]))
    z = z[order]
    keep = []
    best2 = np.inf
    for row in z:
        if row[1] < best2:
            keep.append(row)
            best2 = row[1]
    return np.array(keep)


def hypervolume_2d(points: PointsLike, ref: Sequence[float] = (1.0, 1.0)) -> float:
    """Exact area dominated by ``points`` and bounded by ``ref``.

    Points not weakly dominating ``ref`` contribute nothing.

    Example:
        >>> hypervolume_2d([(0.0, 0.5), (0.5, 0.0)], (1.0, 1.0))
        0.75
    """
    ref = np.asarray(ref, dtype=float)
    z = _z(points)
    z = z[np.all(z <= ref, axis=1)]
    z = nondominated(z)
    if len(z) == 0:
        return 0.0
    right = np.append(z[1:, 0], ref[0])
    return float(np.sum((right - z[:, 0]) * (ref[1] - z[:, 1])))


def joint_reference(*fronts: PointsLike) -> np.ndarray:
    """Componentwise worst value across the nondominated points of all fronts."""
    z = np.vstack([nondominated(_z(f)) for f in fronts])
    return z.max(axis=0)


def distribution_metric(points: PointsLike, bounds: ObjectiveBounds, raw: Optional[np.ndarray] = None) -> float:
    """Spread of adjacent-point gaps; 0 for an evenly spaced front.

    For each objective j the gaps between neighbours (sorted by f1) have
    mean tau_j and standard deviation sigma_j with N - 2 degrees of freedom.
    The terms sigma_j / tau_j are weighted by |f_id_j - f_nd_j| / R_j with
    R_j the set's own range, summed, and divided by the set size N. Values
    are taken on the raw objective scale.

    Args:
        points: Normalized points (archive or array).
        bounds: Bounds used to map normalized values back to raw values.
        raw: Optional raw (n, 2) values overriding the denormalized ones.

    Raises:
        ValueError: "insufficient points" for fewer than three points,
            "degenerate range" when the set has zero extent in an objective.
    """
    f = np.asarray(raw, dtype=float) if raw is not None else denormalize(_z(points), bounds)
    n = len(f)
    if n < 3:
        raise ValueError("insufficient points")
    f = f[np.argsort(f[:, 0], kind="stable")]
    span = np.abs(np.array(bounds.nadir) - np.array(bounds.ideal))
    total = 0.0
    for j in range(2):
        r = f[:, j].max() - f[:, j].min()
        if r <= 0:
            raise ValueError("degenerate range")
        d = np.abs(np.diff(f[:, j]))
        tau = d.mean()
        sigma = np.sqrt(np.sum((d - tau) ** 2) / (n - 2))
        total += sigma / tau * span[j] / r
    return float(total / n)


@dataclass(frozen=True)
class MetricReport:
    """Summary metrics of one run.

    Attributes:
        n_unq: Number of unique nondominated points.
        hv: Hypervolume in normalized units.
        dm: Distribution metric (NaN when fewer than three points).
        t_total: Wall-clock seconds spent in subproblem solves.
        t_avg: t_total per unique point.
    """

    n_unq: int
    hv: float
    dm: float
    t_total: float
    t_avg: float

    def to_dict(self) -> dict:
        return asdict(self)


def report(archive: ParetoArchive, bounds: ObjectiveBounds, t_total: float = 0.0,
           ref: Sequence[float] = (1.0, 1.0)) -> MetricReport:
    """Compute every metric for an archive."""
    n = len(archive)
    try:
        dm = distribution_metric(archive, bounds)
    except ValueError:
        dm = float("nan")
    return MetricReport(
        n_unq=n,
        hv=hypervolume_2d(archive, ref),
        dm=dm,
        t_total=float(t_total),
        t_avg=float(t_total) / n if n else 0.0,
    )
