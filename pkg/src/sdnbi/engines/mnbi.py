"""Modified NBI with a fixed direction and a uniform reference-point grid."""

from __future__ import annotations

from typing import Optional

import numpy as np

from sdnbi.engines.common import (
    MAX_ITERS,
    EngineConfig,
    EngineResult,
    Observer,
    RunState,
    with_supporting_normal,
)
from sdnbi.geometry import segment_normal
from sdnbi.problems.base import ProblemSpec
from sdnbi.scalarize import MnbiParams, Status, solve_mnbi


def beta_schedule(n_beta: int):
    """Yield beta2 values: the interior grid points, then midpoints of the widest gaps.

    The grid is k / (n_beta - 1); its end points 0 and 1 are the anchors and
    are never yielded. Once the grid is used up, each new value bisects the
    widest gap between used values, ties going to the smaller beta2.
    """
    step = 1.0 / (n_beta - 1)
    used = [0.0, 1.0]
    for k in range(1, n_beta - 1):
        b = k * step
        used.append(b)
        yield b
    used.sort()
    while True:
        gaps = np.diff(used)
        i = int(np.argmax(gaps))  # first maximum = smallest beta2
        b = used[i] + gaps[i] / 2
        used.insert(i + 1, b)
        yield b


def run_mnbi(spec: ProblemSpec, cfg: EngineConfig, observer: Optional[Observer] = None) -> EngineResult:
    """Solve mNBI subproblems from reference points on the anchor segment.

    The direction is the fixed unit normal of the segment joining the anchors.
    The run always uses its whole iteration budget; repeats are recorded and
    nothing is fathomed.
    """
    st = RunState(spec, cfg, observer)
    phi = np.column_stack([st.left.z, st.right.z])
    nbar = segment_normal(st.left.z, st.right.z)
    schedule = beta_schedule(cfg.n_beta)
    while st.budget_left:
        b2 = next(schedule)
        params = MnbiParams(phi=phi, beta=np.array([1.0 - b2, b2]), nbar=nbar)
        out, dt = st.timed(solve_mnbi, spec, st.bounds, params, cfg.solver, st.archive)
        p = st.stamp(with_supporting_normal(out, params)) if out.status is Status.NEW else None
        if p is not None and st.insert(p):
            st.record("new-point", p, 0.0, dt)
        else:
            st.record("repeat", None, 0.0, dt)
    return st.result(MAX_ITERS)
