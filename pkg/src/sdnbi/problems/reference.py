"""Dense reference fronts for the benchmarks."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from sdnbi.core import ObjectivePoint, ParetoArchive, normalize
from sdnbi.problems.base import ProblemSpec

log = logging.getLogger(__name__)


def reference_front(spec: ProblemSpec, n_points: Optional[int] = None, solver_cfg=None, anchors=None) -> ParetoArchive:
    """Best-known front from a dense sweep of reference points.

    Continuous problems solve the equality-constrained NBI subproblem for
    ``n_points`` equally spaced reference points on the segment joining the
    anchors. Problems with a closed-form front use it directly.

    Args:
        spec: Benchmark problem.
        n_points: Number of reference points (defaults to the benchmark's).
        solver_cfg: Multistart settings; defaults to the benchmark's start count.
        anchors: Optional precomputed (bounds, left, right) from ``find_anchors``.

    Returns:
        Archive of nondominated normalized points; its ``bounds`` attribute holds
        the normalization bounds.
    """
    from sdnbi.scalarize import MnbiParams, SolverConfig, find_anchors, segment_normal, solve_nbi

    if n_points is None:
        n_points = spec.defaults.n_finite
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if solver_cfg is None:
        solver_cfg = SolverConfig(n_starts=spec.defaults.n_starts)
    bounds, left, right = anchors if anchors is not None else find_anchors(spec, solver_cfg)
    archive = ParetoArchive()
    archive.bounds = bounds
    archive.insert(left)
    archive.insert(right)

    if spec.exact_front is not None:
        for f in spec.exact_front():
            z = normalize(f, bounds)
            archive.insert(ObjectivePoint(z=tuple(z), raw=tuple(f)))
        return archive

    phi = np.column_stack([left.z, right.z])
    nbar = segment_normal(left.z, right.z)
    for b2 in np.linspace(0.0, 1.0, n_points)[1:-1]:
        params = MnbiParams(phi=phi, beta=np.array([1.0 - b2, b2]), nbar=nbar)
        try:
            p = solve_nbi(spec, bounds, params, solver_cfg)
        except (RuntimeError, ValueError) as exc:
            log.warning("reference solve failed at beta2=%.6f: %s", b2, exc)
            continue
        if p is None:
            log.info("no feasible NBI solution at beta2=%.6f", b2)
            continue
        archive.insert(p)
    return archive
