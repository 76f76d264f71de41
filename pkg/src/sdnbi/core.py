"""Domain types, dominance, normalization, and the Pareto archive.

Everything here works on two objectives, both minimized. Objective points
live on the normalized scale where the ideal vector maps to (0, 0) and the
nadir vector to (1, 1).
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_DEDUP_TOL = 1e-6
_NORMAL_TOL = 1e-9


class Dominance(enum.Enum):
    """Outcome of a pairwise dominance test."""

    STRICT = "strictly-dominates"
    WEAK = "weakly-dominates"
    INCOMPARABLE = "incomparable"


class InsertStatus(enum.Enum):
    """Outcome of an archive insertion."""

    INSERTED = "inserted-new"
    DUPLICATE = "duplicate"
    DOMINATED = "dominated"


@dataclass(frozen=True)
class DecisionVector:
    """A decision point with continuous and integer parts."""

    continuous: tuple[float, ...] = ()
    integer: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "continuous", tuple(float(v) for v in self.continuous))
        object.__setattr__(self, "integer", tuple(int(v) for v in self.integer))

    def as_array(self) -> np.ndarray:
        """Concatenate the parts into one float vector (continuous first)."""
        return np.array(self.continuous + tuple(float(v) for v in self.integer), dtype=float)

    def __len__(self) -> int:
        return len(self.continuous) + len(self.integer)


@dataclass(frozen=True)
class ObjectivePoint:
    """A normalized objective vector with optional supporting-line data.

    Attributes:
        z: Normalized objective values (z1, z2).
        decision: Decision vector that produced the point, if known.
        normal: Nonnegative supporting normal w' summing to one.
        offset: b = w'.z, present exactly when ``normal`` is.
        raw: Raw objective values, if known.
        iter_found: Iteration at which an engine discovered the point.
        anchor: True for the two anchor points. Their supporting lines
            coincide with rectangle edges and are not used as tangents.
    """

    z: tuple[float, float]
    decision: Optional[DecisionVector] = None
    normal: Optional[tuple[float, float]] = None
    offset: Optional[float] = None
    raw: Optional[tuple[float, float]] = None
    iter_found: int = 0
    anchor: bool = False

    def __post_init__(self):
        z = tuple(float(v) for v in self.z)
        if len(z) != 2 or not all(math.isfinite(v) for v in z):
            raise ValueError("objective point must be a finite 2-vector")
        object.__setattr__(self, "z", z)
        if self.raw is not None:
            object.__setattr__(self, "raw", tuple(float(v) for v in self.raw))
        if (self.normal is None) != (self.offset is None):
            raise ValueError("normal and offset must be given together")
        if self.normal is not None:
            w = tuple(float(v) for v in self.normal)
            if len(w) != 2 or min(w) < 0.0 or abs(sum(w) - 1.0) > _NORMAL_TOL:
                raise ValueError(f"normal must be nonnegative and sum to 1, got {w}")
            object.__setattr__(self, "normal", w)
            b = float(self.offset)
            if abs(b - (w[0] * z[0] + w[1] * z[1])) > _NORMAL_TOL:
                raise ValueError("offset must equal normal . z")
            object.__setattr__(self, "offset", b)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.z)

    def with_normal(self, w: Sequence[float]) -> "ObjectivePoint":
        """Return a copy carrying the supporting normal ``w`` (rescaled to sum 1)."""
        w = np.clip(np.asarray(w, dtype=float), 0.0, None)
        s = w.sum()
        if s <= 0:
            raise ValueError("normal must have positive sum")
        w = w / s
        b = float(w[0] * self.z[0] + w[1] * self.z[1])
        return replace(self, normal=(float(w[0]), float(w[1])), offset=b)


@dataclass(frozen=True)
class ObjectiveBounds:
    """Ideal and nadir vectors in raw objective units."""

    ideal: tuple[float, float]
    nadir: tuple[float, float]

    def __post_init__(self):
        ideal = tuple(float(v) for v in self.ideal)
        nadir = tuple(float(v) for v in self.nadir)
        object.__setattr__(self, "ideal", ideal)
        object.__setattr__(self, "nadir", nadir)
        if any(not nadir[j] > ideal[j] for j in range(2)):
            raise ValueError("degenerate objective range")

    @property
    def span(self) -> np.ndarray:
        return np.array(self.nadir) - np.array(self.ideal)


def _as_z(p) -> np.ndarray:
    if isinstance(p, ObjectivePoint):
        return np.array(p.z)
    return np.asarray(p, dtype=float)


def dominates(a, b) -> Dominance:
    """Classify how ``a`` relates to ``b`` under minimization.

    Args:
        a: ObjectivePoint or 2-vector.
        b: ObjectivePoint or 2-vector.

    Returns:
        STRICT if a is no worse everywhere and better somewhere, WEAK if the
        two are equal, INCOMPARABLE otherwise (including when b dominates a).
    """
    za, zb = _as_z(a), _as_z(b)
    if np.all(za <= zb):
        return Dominance.WEAK if np.all(za == zb) else Dominance.STRICT
    return Dominance.INCOMPARABLE


def normalize(f_raw: Sequence[float], bounds: ObjectiveBounds) -> np.ndarray:
    """Map raw objective values onto the unit box defined by ``bounds``."""
    ideal = np.array(bounds.ideal)
    span = np.array(bounds.nadir) - ideal
    if np.any(span <= 0):
        raise ValueError("degenerate objective range")
    return (np.asarray(f_raw, dtype=float) - ideal) / span


def denormalize(z: Sequence[float], bounds: ObjectiveBounds) -> np.ndarray:
    """Inverse of :func:`normalize`."""
    ideal = np.array(bounds.ideal)
    return ideal + np.asarray(z, dtype=float) * (np.array(bounds.nadir) - ideal)


@dataclass
class InsertResult:
    status: InsertStatus
    pruned: list = field(default_factory=list)


class ParetoArchive:
    """Mutually nondominated points kept sorted by z1.

    Args:
        points: Optional initial points, inserted one at a time.
        dedup_tol: Two points closer than this in the max-norm count as one.
    """

    def __init__(self, points: Iterable[ObjectivePoint] = (), dedup_tol: float = DEFAULT_DEDUP_TOL):
        self.dedup_tol = float(dedup_tol)
        self._points: list[ObjectivePoint] = []
        self._keys: list[float] = []
        self.bounds: Optional[ObjectiveBounds] = None
        for p in points:
            self.insert(p)

    @property
    def points(self) -> tuple[ObjectivePoint, ...]:
        return tuple(self._points)

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def z_array(self) -> np.ndarray:
        """Normalized objectives as an (n, 2) array sorted by z1."""
        return np.array([p.z for p in self._points], dtype=float).reshape(-1, 2)

    def find(self, z: Sequence[float]) -> Optional[ObjectivePoint]:
        """Return the archived point within dedup_tol of ``z``, if any."""
        z = np.asarray(z, dtype=float)
        for p in self._points:
            if np.max(np.abs(np.array(p.z) - z)) <= self.dedup_tol:
                return p
        return None

    def insert(self, p: ObjectivePoint) -> InsertResult:
        """Insert ``p`` unless it duplicates or is dominated by an archived point."""
        if self.find(p.z) is not None:
            return InsertResult(InsertStatus.DUPLICATE)
        for q in self._points:
            if dominates(q, p) is not Dominance.INCOMPARABLE:
                return InsertResult(InsertStatus.DOMINATED)
        pruned = [q for q in self._points if dominates(p, q) is not Dominance.INCOMPARABLE]
        if pruned:
            gone = {id(q) for q in pruned}
            keep = [q for q in self._points if id(q) not in gone]
            self._points = keep
            self._keys = [q.z[0] for q in keep]
        i = bisect.bisect_left(self._keys, p.z[0])
        self._points.insert(i, p)
        self._keys.insert(i, p.z[0])
        return InsertResult(InsertStatus.INSERTED, pruned)

    def copy(self) -> "ParetoArchive":
        out = ParetoArchive(dedup_tol=self.dedup_tol)
        out._points = list(self._points)
        out._keys = list(self._keys)
        out.bounds = self.bounds
        return out


def archive_insert(archive: ParetoArchive, p: ObjectivePoint) -> InsertResult:
    """Functional alias for :meth:`ParetoArchive.insert`."""
    return archive.insert(p)
