"""Planar geometry for the sandwich approximation.

A subspace is the rectangle spanned by two nondominated points together
with the archived points inside it and an assumption about the curvature
of the front there. Facets are the segments between consecutive members.

In a convex subspace the member polyline is the inner approximation and the
supporting half-planes w.z >= b cut the outer one out of the rectangle. In a
nonconvex subspace the roles swap: the polyline bounds the front from below
and the half-planes w.z <= b bound it from above.

Anchor points carry weighted-sum normals that coincide with rectangle
edges, so their half-planes are never used; the rectangle stands in for them.
The same goes for any supporting line that cuts off a member of its own
subspace, which can only happen when no curvature assumption fits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from sdnbi.core import ObjectivePoint

CLASSIFY_TOL = 1e-6
EPS_D = (1.0, 1.0)


class Side(enum.Enum):
    ABOVE = "above"
    ON = "on"
    BELOW = "below"


def segment_normal(p1: Sequence[float], p2: Sequence[float]) -> np.ndarray:
    """Unit normal of the segment p1 -> p2 pointing toward the ideal point."""
    d1 = p2[0] - p1[0]
    d2 = p1[1] - p2[1]
    length = math.hypot(d1, d2)
    if length <= 0:
        raise ValueError("degenerate normal")
    return -np.array([d2, d1]) / length


def _xy(p) -> np.ndarray:
    return np.array(p.z if isinstance(p, ObjectivePoint) else p, dtype=float)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(points: Sequence) -> list:
    """Lower-left convex hull of a planar point set, sorted by z1.

    Runs the monotone chain for the lower hull and keeps the part between the
    point with smallest z1 and the point with smallest z2. Collinear points
    are dropped.

    Args:
        points: ObjectivePoints or 2-vectors.

    Returns:
        The hull vertices, as the same objects that were passed in.
    """
    if len(points) < 2:
        raise ValueError("lower hull needs at least two points")
    pts = sorted(points, key=lambda p: (_xy(p)[0], _xy(p)[1]))
    hull: list = []
    for p in pts:
        while len(hull) >= 2 and _cross(_xy(hull[-2]), _xy(hull[-1]), _xy(p)) <= 0:
            hull.pop()
        hull.append(p)
    # trim the part that rises again after the lowest point
    low = min(range(len(hull)), key=lambda i: (_xy(hull[i])[1], _xy(hull[i])[0]))
    return hull[: low + 1]


def halfplane_side(p, w: Sequence[float], b: float, tol: float = CLASSIFY_TOL) -> Side:
    """Position of ``p`` relative to the line w.z = b."""
    s = float(np.dot(w, _xy(p))) - b
    if s > tol:
        return Side.ABOVE
    if s < -tol:
        return Side.BELOW
    return Side.ON


def clip_polygon(poly: np.ndarray, w: Sequence[float], b: float, keep_above: bool) -> np.ndarray:
    """Clip a convex polygon to w.z >= b (``keep_above``) or w.z <= b."""
    w = np.asarray(w, dtype=float)
    sign = 1.0 if keep_above else -1.0
    out = []
    n = len(poly)
    for i in range(n):
        a, c = poly[i], poly[(i + 1) % n]
        sa = sign * (w @ a - b)
        sc = sign * (w @ c - b)
        if sa >= 0:
            out.append(a)
        # strict sign change only, so vertices on the line are not doubled
        if (sa > 0 and sc < 0) or (sa < 0 and sc > 0):
            t = sa / (sa - sc)
            out.append(a + t * (c - a))
    return np.array(out).reshape(-1, 2)


@dataclass(frozen=True)
class Facet:
    """Segment between adjacent members of a subspace.

    Attributes:
        p1: Left endpoint (smaller z1).
        p2: Right endpoint.
        open: False once the facet has been fathomed.
        error: Cached approximation error.
    """

    p1: ObjectivePoint
    p2: ObjectivePoint
    open: bool = True
    error: float = 0.0

    def __post_init__(self):
        if not self.p1.z[0] < self.p2.z[0]:
            raise ValueError("facet endpoints must be ordered by z1")

    @property
    def nbar(self) -> np.ndarray:
        """Outward unit normal (toward the ideal point)."""
        return segment_normal(self.p1.z, self.p2.z)

    @property
    def key(self) -> tuple:
        return facet_key(self.p1, self.p2)

    @property
    def extent(self) -> float:
        return self.p2.z[0] - self.p1.z[0]


def facet_key(p1: ObjectivePoint, p2: ObjectivePoint) -> tuple:
    return (p1.z, p2.z)


def _usable(p: ObjectivePoint) -> bool:
    return p.normal is not None and not p.anchor


@dataclass(frozen=True)
class Subspace:
    """Rectangle spanned by its first and last member, with a curvature flag."""

    members: tuple[ObjectivePoint, ...]
    is_convex: bool = True

    def __post_init__(self):
        ms = tuple(sorted(self.members, key=lambda p: p.z[0]))
        if len(ms) < 2:
            raise ValueError("a subspace needs at least two members")
        object.__setattr__(self, "members", ms)

    @property
    def lo(self) -> ObjectivePoint:
        return self.members[0]

    @property
    def hi(self) -> ObjectivePoint:
        return self.members[-1]

    @property
    def rectangle(self) -> np.ndarray:
        """Corners in counter-clockwise order starting at the lower left."""
        a1, b1 = self.lo.z[0], self.hi.z[0]
        a2, b2 = self.hi.z[1], self.lo.z[1]
        return np.array([[a1, a2], [b1, a2], [b1, b2], [a1, b2]])

    def contains(self, z: Sequence[float], tol: float = 1e-9) -> bool:
        a1, b1 = self.lo.z[0], self.hi.z[0]
        a2, b2 = self.hi.z[1], self.lo.z[1]
        return a1 - tol <= z[0] <= b1 + tol and a2 - tol <= z[1] <= b2 + tol

    def facets(self, closed: Optional[set] = None) -> list[Facet]:
        closed = closed or set()
        out = []
        for a, b in zip(self.members[:-1], self.members[1:]):
            out.append(Facet(a, b, open=facet_key(a, b) not in closed))
        return out


@dataclass(frozen=True)
class Approximation:
    """Inner and outer approximation of the front inside one subspace.

    Attributes:
        is_convex: Curvature flag of the subspace.
        polyline: Member polyline (inner bound if convex, outer if not).
        polygon: Rectangle cut by the supporting half-planes (outer region if
            convex, inner region if not).
        halfplanes: The (w, b) pairs used for the cut.
    """

    is_convex: bool
    polyline: np.ndarray
    polygon: np.ndarray
    halfplanes: tuple

    @property
    def ips(self):
        return self.polyline if self.is_convex else self.polygon

    @property
    def ops(self):
        return self.polygon if self.is_convex else self.polyline


def build_approximations(sub: Subspace, tol: float = CLASSIFY_TOL) -> Approximation:
    """Build the approximation pair for a subspace."""
    planes = []
    for m in sub.members:
        if m.anchor:
            continue
        if m.normal is None:
            if not sub.is_convex:
                raise ValueError("member without supporting normal in a nonconvex subspace")
            continue
        w = np.array(m.normal)
        s = np.array([w @ np.array(q.z) for q in sub.members]) - m.offset
        # a line that cuts off a member contradicts the subspace's assumption
        if (sub.is_convex and s.min() < -tol) or (not sub.is_convex and s.max() > tol):
            continue
        planes.append((w, m.offset))
    rect = sub.rectangle
    poly = rect
    for w, b in planes:
        # loosen by tol so members that satisfy the line up to noise stay inside
        poly = clip_polygon(poly, w, b - tol if sub.is_convex else b + tol, keep_above=sub.is_convex)
        if len(poly) == 0:
            break
    if len(poly) == 0:
        poly = rect
    line = np.array([m.z for m in sub.members])
    return Approximation(sub.is_convex, line, poly, tuple(planes))


def facet_error(facet: Facet, approx: Approximation, eps_d: Sequence[float] = EPS_D) -> float:
    """Largest gap between a facet and the opposite approximation.

    For a convex subspace this is the largest depth of an outer-region vertex
    below the facet line; for a nonconvex one the largest height of an
    inner-region vertex above it. Depths are measured along the facet normal
    and divided by w.eps_d.
    """
    if not facet.open:
        raise ValueError("closed facet")
    w = -facet.nbar
    p1 = np.array(facet.p1.z)
    verts = approx.polygon
    if approx.is_convex:
        gaps = (p1 - verts) @ w
    else:
        gaps = (verts - p1) @ w
    scale = float(w @ np.asarray(eps_d, dtype=float))
    return max(0.0, float(np.max(gaps)) / scale) if len(verts) else 0.0


def _consistent(run: Sequence[ObjectivePoint], convex: bool, tol: float) -> bool:
    for q in run:
        if not _usable(q):
            continue
        w = np.array(q.normal)
        for z in run:
            s = float(w @ np.array(z.z)) - q.offset
            if convex and s < -tol:
                return False
            if not convex and s > tol:
                return False
    return True


def _slack_sum(run: Sequence[ObjectivePoint]) -> float:
    total = 0.0
    for q in run:
        if _usable(q):
            w = np.array(q.normal)
            total += sum(float(w @ np.array(z.z)) - q.offset for z in run)
    return total


def partition_runs(points: Sequence[ObjectivePoint], prefer_convex: bool = True,
                   tol: float = CLASSIFY_TOL) -> list[tuple[list[ObjectivePoint], bool]]:
    """Split a z1-sorted sequence into the fewest consistent runs.

    Consecutive runs share their boundary point. Each run is consistent with
    one curvature assumption: every supporting line has all run members on
    or above it (convex), or on or below it (nonconvex). Consistency is
    inherited by sub-runs, so always extending the current run as far as
    possible gives a minimum partition. A pair that fits neither assumption
    is classified by the sign of its summed slacks.
    """
    pts = list(points)
    runs = []
    i = 0
    while i < len(pts) - 1:
        reach = {}
        for flag in (True, False):
            j = i + 1
            if not _consistent(pts[i : j + 1], flag, tol):
                reach[flag] = None
                continue
            while j + 1 < len(pts) and _consistent(pts[i : j + 2], flag, tol):
                j += 1
            reach[flag] = j
        cands = [(j, flag) for flag, j in reach.items() if j is not None]
        if not cands:
            j = i + 1
            flag = _slack_sum(pts[i : j + 1]) >= 0
        else:
            jmax = max(j for j, _ in cands)
            flags = [f for j, f in cands if j == jmax]
            flag = prefer_convex if prefer_convex in flags else flags[0]
            j = jmax
        runs.append((pts[i : j + 1], flag))
        i = j
    return runs


def decompose(sub: Subspace, new_point: ObjectivePoint, tol: float = CLASSIFY_TOL) -> list[Subspace]:
    """Insert a new point into a subspace, splitting it where curvature changes.

    Returns a single subspace when the point's supporting line agrees with
    the current assumption, otherwise the minimum partition of the merged
    member sequence into consistent runs.
    """
    if not sub.contains(new_point.z):
        raise ValueError("point outside subspace")
    merged = sorted(sub.members + (new_point,), key=lambda p: p.z[0])
    if _usable(new_point):
        w = np.array(new_point.normal)
        s = np.array([float(w @ np.array(m.z)) - new_point.offset for m in sub.members])
        keep = np.all(s >= -tol) if sub.is_convex else np.all(s <= tol)
    else:
        keep = True
    if keep and _consistent(merged, sub.is_convex, tol):
        return [Subspace(tuple(merged), sub.is_convex)]
    return [Subspace(tuple(run), flag) for run, flag in partition_runs(merged, sub.is_convex, tol)]


def subspace_facets(subspaces: Iterable[Subspace], closed: set) -> list[tuple[Facet, Subspace]]:
    """All facets of all subspaces, each paired with its subspace."""
    return [(f, s) for s in subspaces for f in s.facets(closed)]
