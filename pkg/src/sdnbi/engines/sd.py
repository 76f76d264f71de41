"""Sandwich algorithm driven by weighted-sum subproblems."""

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
)
from sdnbi.geometry import Subspace, build_approximations, facet_error, lower_hull
from sdnbi.problems.base import ProblemSpec
from sdnbi.scalarize import solve_weighted_sum


def select_facet(scored):
    """Largest error first, then wider z1 extent, then smaller left z1."""
    return max(scored, key=lambda e: (e[0], e[1].extent, -e[1].p1.z[0]))


def run_sd(spec: ProblemSpec, cfg: EngineConfig, observer: Optional[Observer] = None) -> EngineResult:
    """Refine the convex hull of the archive with weighted-sum solves.

    Each iteration picks the hull facet with the largest error and minimizes
    the weighted sum whose weights are the facet normal. A facet whose solve
    returns a known point cannot be refined further and is closed.
    """
    st = RunState(spec, cfg, observer)
    closed: set = set()
    termination = MAX_ITERS
    while st.budget_left:
        hull = Subspace(tuple(lower_hull(st.archive.points)), True)
        st.extra["subspaces"] = [hull]
        approx = build_approximations(hull, cfg.classify_tol)
        scored = [(facet_error(f, approx, cfg.eps_d), f) for f in hull.facets(closed) if f.open]
        if not scored:
            termination = TERMINATED_EMPTY
            break
        d_max, facet = select_facet(scored)
        if d_max < cfg.epsilon:
            termination = TERMINATED_TOL
            break
        w = -facet.nbar
        w = w / w.sum()
        p, dt = st.timed(solve_weighted_sum, spec, st.bounds, w, cfg.solver)
        p = st.stamp(p)
        if st.archive.find(p.z) is None and st.insert(p):
            st.record("new-point", p, d_max, dt, facet.key)
        else:
            closed.add(facet.key)
            st.record("repeat", None, d_max, dt, facet.key)
    st.extra["closed"] = closed
    return st.result(termination)
