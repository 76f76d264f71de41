"""Sandwich algorithm with mNBI subproblems, curvature-aware subspaces, and fathoming."""

from __future__ import annotations

from typing import Optional

import numpy as np

from sdnbi.engines.common import (
    MAX_ITERS,
    TERMINATED_EMPTY,
    TERMINATED_TOL,
    EngineConfig,
    EngineResult,
    Observer,
    RunState,
    log,
    with_supporting_normal,
)
from sdnbi.engines.sd import select_facet
from sdnbi.geometry import Facet, Subspace, build_approximations, decompose, facet_error, facet_key
from sdnbi.problems.base import ProblemSpec
from sdnbi.scalarize import MnbiParams, Status, solve_mnbi, solve_mnbi_fathom


def _score(subspaces, closed, cfg):
    scored = []
    for s in subspaces:
        approx = build_approximations(s, cfg.classify_tol)
        for f in s.facets(closed):
            if f.open:
                scored.append((facet_error(f, approx, cfg.eps_d), f, s))
    return scored


def _replace(subspaces, old, new):
    i = subspaces.index(old)
    return subspaces[:i] + new + subspaces[i + 1 :]


class _Sdnbi:
    def __init__(self, spec, cfg, observer):
        self.spec, self.cfg = spec, cfg
        self.st = RunState(spec, cfg, observer)
        self.subspaces = [Subspace((self.st.left, self.st.right), True)]
        self.closed: set = set()
        self.fathomed: list[tuple[float, float]] = []
        self.st.extra.update(subspaces=self.subspaces, closed=self.closed, fathomed=self.fathomed)

    def _sync(self):
        self.st.extra["subspaces"] = self.subspaces

    def _add_point(self, sub: Subspace, p) -> Optional[list[Subspace]]:
        """Insert a new point and decompose its subspace; None if it cannot be placed."""
        if not sub.contains(p.z, 1e-7):
            log.warning("iteration %d: solution %s outside its subspace; treated as repeat", self.st.k, p.z)
            return None
        if not self.st.insert(p):
            return None
        parts = decompose(sub, p, self.cfg.classify_tol)
        self.subspaces = _replace(self.subspaces, sub, parts)
        self._sync()
        return parts

    def _new_point(self, out, params) -> Optional[object]:
        if out.status is not Status.NEW:
            return None
        return self.st.stamp(with_supporting_normal(out, params))

    def step(self) -> Optional[str]:
        st, cfg = self.st, self.cfg
        scored = _score(self.subspaces, self.closed, cfg)
        if not scored:
            return TERMINATED_EMPTY
        d_max, facet, sub = select_facet(scored)
        if d_max < cfg.epsilon:
            return TERMINATED_TOL
        params = MnbiParams.for_segment(facet.p1.z, facet.p2.z)
        out, dt = st.timed(solve_mnbi, self.spec, st.bounds, params, cfg.solver, st.archive)
        p = self._new_point(out, params)
        if p is not None:
            parts = self._add_point(sub, p)
            if parts is not None:
                event = "new-point" if len(parts) == 1 and parts[0].is_convex == sub.is_convex else f"decompose({len(parts)})"
                st.record(event, p, d_max, dt, facet.key)
                return None
        self._fathom(facet, sub, out, d_max, dt)
        return None

    def _fathom(self, facet: Facet, sub: Subspace, first, d_max: float, dt0: float) -> None:
        """Second solve after a repeat, in the same iteration: search beyond the repeated endpoint."""
        st, cfg = self.st, self.cfg
        p1, p2 = np.array(facet.p1.z), np.array(facet.p2.z)
        side = "a"
        if first.point is not None:
            z = np.array(first.point.z)
            if np.max(np.abs(z - p2)) < np.max(np.abs(z - p1)):
                side = "b"
        lo, hi = p1[0] + cfg.eps_z, p2[0] - cfg.eps_z
        if lo >= p2[0] or hi <= p1[0]:
            self.closed.add(facet.key)
            st.record("repeat", None, d_max, dt0, facet.key)
            return
        params = MnbiParams.for_segment(p1, p2).with_bound(side, lo if side == "a" else hi)
        out, dt = st.timed(solve_mnbi_fathom, self.spec, st.bounds, params, cfg.solver, st.archive, count=False)
        dt += dt0
        p = self._new_point(out, params)
        if p is not None and p1[0] < p.z[0] < p2[0]:
            parts = self._add_point(sub, p)
            if parts is not None:
                if side == "a":
                    self.fathomed.append((lo, p.z[0]))
                    self.closed.add(facet_key(facet.p1, p))
                else:
                    self.fathomed.append((p.z[0], hi))
                    self.closed.add(facet_key(p, facet.p2))
                st.record("fathom-facet", p, d_max, dt, facet.key)
                return
        self.closed.add(facet.key)
        if self._certifies_facet(out, facet, side):
            self.fathomed.append((lo, p2[0]) if side == "a" else (p1[0], hi))
        else:
            log.info("iteration %d: facet closed without an emptiness certificate", st.k)
        st.record("fathom-facet", None, d_max, dt, facet.key)

    def _certifies_facet(self, out, facet: Facet, side: str) -> bool:
        """Whether the fathoming optimum proves the whole facet interval empty.

        That holds when the optimum is the far endpoint itself, or another
        known nondominated point beyond it. An optimum dominated by an archive
        point (or an infeasible solve) says nothing about the interval.
        """
        if out.point is None:
            return False
        z = np.array(out.point.z)
        known = self.st.archive.find(out.point.z)
        if known is None:
            return False
        far = facet.p2 if side == "a" else facet.p1
        return known is far or (z[0] >= far.z[0] if side == "a" else z[0] <= far.z[0])


def run_sdnbi(spec: ProblemSpec, cfg: EngineConfig, observer: Optional[Observer] = None) -> EngineResult:
    """Approximate the front with mNBI solves on the facet of largest error.

    A solve that reproduces a facet endpoint triggers a bounded second solve
    on the side of the repeated endpoint; the f_hat1 range it skips over is
    certified empty and recorded. New points get a supporting line from the
    multipliers and split their subspace where the curvature assumption
    fails. The run stops when the largest open-facet error drops below
    epsilon, when no open facet remains, or when the budget is spent.
    """
    run = _Sdnbi(spec, cfg, observer)
    termination = MAX_ITERS
    while run.st.budget_left:
        reason = run.step()
        if reason is not None:
            termination = reason
            break
    return run.st.result(termination, run.fathomed)
