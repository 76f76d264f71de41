"""Configuration, records, and bookkeeping shared by the engines."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from sdnbi.core import DEFAULT_DEDUP_TOL, InsertStatus, ObjectiveBounds, ObjectivePoint, ParetoArchive
from sdnbi.geometry import CLASSIFY_TOL, EPS_D
from sdnbi.problems.base import ProblemSpec
from sdnbi.scalarize import EPS_Z, SolverConfig, find_anchors
from sdnbi.subsolver import Tolerances

log = logging.getLogger("sdnbi.engines")

ALGORITHMS = ("sd", "mnbi", "sdnbi")

TERMINATED_TOL = "terminated-tol"
TERMINATED_EMPTY = "terminated-empty"
MAX_ITERS = "max-iters"


@dataclass(frozen=True)
class EngineConfig:
    """Settings for one engine run.

    Attributes:
        algorithm: One of "sd", "mnbi", "sdnbi".
        epsilon: Stopping tolerance on the largest facet error (sd, sdnbi).
        max_iters: Iteration budget, anchors included.
        n_beta: Grid size for mNBI reference points.
        solver: Multistart settings.
        dedup_tol: Max-norm distance under which two points are the same.
        eps_z: Offset of the fathoming bound from the repeated endpoint.
        eps_d: Scaling vector of the facet error.
        classify_tol: Tolerance of the curvature checks.
    """

    algorithm: str = "sdnbi"
    epsilon: float = 1e-3
    max_iters: int = 40
    n_beta: int = 10
    solver: SolverConfig = field(default_factory=SolverConfig)
    dedup_tol: float = DEFAULT_DEDUP_TOL
    eps_z: float = EPS_Z
    eps_d: tuple[float, float] = EPS_D
    classify_tol: float = CLASSIFY_TOL

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.n_beta < 2:
            raise ValueError("n_beta must be at least 2")

    @classmethod
    def for_problem(cls, spec: ProblemSpec, algorithm: str, **overrides) -> "EngineConfig":
        """Benchmark defaults for ``spec``, with keyword overrides.

        Accepted overrides are the field names plus ``n_starts`` and ``seed``.
        """
        d = spec.defaults
        n_starts = overrides.pop("n_starts", None) or d.n_starts
        seed = overrides.pop("seed", 7)
        tolerances = overrides.pop("tolerances", Tolerances())
        base = dict(
            algorithm=algorithm,
            epsilon=d.epsilon,
            max_iters=d.max_iters,
            n_beta=d.n_beta,
            solver=SolverConfig(n_starts=n_starts, seed=seed, tolerances=tolerances),
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


@dataclass(frozen=True)
class IterationRecord:
    """One subproblem solve.

    Attributes:
        iter: 1-based iteration counter (the anchors are iterations 1
            and 2). A fathoming solve belongs to the iteration of the solve
            whose repeat triggered it.
        event: What the iteration produced: "anchor", "new-point",
            "decompose(k)", "repeat", or "fathom-facet".
        new_point: The point added to the archive, if any.
        d_max: Largest open-facet error when the solve was scheduled.
        elapsed: Seconds spent in the iteration's solves.
        archive_size: Archive size after the solve.
        facet: Normalized endpoints of the facet worked on, if any.
    """

    iter: int
    event: str
    new_point: Optional[ObjectivePoint]
    d_max: float
    elapsed: float
    archive_size: int
    facet: Optional[tuple] = None


@dataclass
class EngineResult:
    """Outcome of an engine run.

    Attributes:
        archive: Final nondominated set (normalized, raw values attached).
        records: One record per iteration.
        bounds: Normalization bounds from the anchors.
        termination: "terminated-tol", "terminated-empty", or "max-iters".
        fathomed: Open f_hat1 intervals certified to hold no Pareto point.
        t_total: Seconds spent in subproblem solves.
    """

    archive: ParetoArchive
    records: list[IterationRecord]
    bounds: ObjectiveBounds
    termination: str
    fathomed: list[tuple[float, float]] = field(default_factory=list)
    t_total: float = 0.0

    @property
    def n_iters(self) -> int:
        return len(self.records)


Observer = Callable[["RunState"], None]


class RunState:
    """Mutable bookkeeping of a run: archive, records, timing, iteration count."""

    def __init__(self, spec: ProblemSpec, cfg: EngineConfig, observer: Optional[Observer] = None):
        self.spec = spec
        self.cfg = cfg
        self.observer = observer
        self.archive = ParetoArchive(dedup_tol=cfg.dedup_tol)
        self.records: list[IterationRecord] = []
        self.t_total = 0.0
        self.k = 0
        self.extra: dict = {}
        t0 = time.perf_counter()
        self.bounds, self.left, self.right = find_anchors(spec, cfg.solver)
        dt = time.perf_counter() - t0
        self.archive.bounds = self.bounds
        for p in (self.left, self.right):
            self.archive.insert(p)
            self.k += 1
            self.t_total += dt / 2
            self.records.append(IterationRecord(self.k, "anchor", p, float("nan"), dt / 2, len(self.archive)))
        self.notify()

    @property
    def budget_left(self) -> bool:
        return self.k < self.cfg.max_iters

    def timed(self, fn, *args, count: bool = True, **kw):
        """Run one subproblem solve; ``count`` starts a new iteration."""
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        dt = time.perf_counter() - t0
        if count:
            self.k += 1
        self.t_total += dt
        return out, dt

    def stamp(self, p: ObjectivePoint) -> ObjectivePoint:
        return replace(p, iter_found=self.k)

    def insert(self, p: ObjectivePoint) -> bool:
        res = self.archive.insert(p)
        if res.pruned:
            log.warning("iteration %d: new point prunes %d archived point(s)", self.k, len(res.pruned))
        return res.status is InsertStatus.INSERTED

    def record(self, event: str, p: Optional[ObjectivePoint], d_max: float, dt: float, facet=None) -> None:
        self.records.append(IterationRecord(self.k, event, p, d_max, dt, len(self.archive), facet))
        self.notify()

    def notify(self) -> None:
        if self.observer is not None:
            self.observer(self)

    def result(self, termination: str, fathomed=None) -> EngineResult:
        return EngineResult(self.archive, self.records, self.bounds, termination, list(fathomed or []), self.t_total)


def with_supporting_normal(out, params) -> ObjectivePoint:
    """Attach the supporting normal of an mNBI solution to its point.

    Falls back to the search direction flipped positive when the objective
    multipliers vanish.
    """
    from sdnbi.scalarize import supporting_normal

    try:
        w, _ = supporting_normal(out.result, params, out.point.z)
    except ValueError:
        log.warning("vanishing multipliers at %s; using the search direction", out.point.z)
        w = -params.nbar
    return out.point.with_normal(w)
