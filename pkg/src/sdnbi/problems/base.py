"""Problem contract shared by the benchmarks, solvers, and engines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from sdnbi.core import DecisionVector

ArrayFn = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-6


@dataclass(frozen=True)
class BenchmarkDefaults:
    """Per-problem run parameters and published objective bounds.

    The published bounds are kept for reporting only; runs derive their own
    bounds from the anchor solves.
    """

    n_starts: int
    epsilon: float
    max_iters: int
    n_beta: int
    n_finite: int
    table_ideal: tuple[float, float]
    table_nadir: tuple[float, float]


@dataclass(frozen=True)
class ProblemSpec:
    """A bi-objective problem on a box, with inequality constraints g(v) <= 0.

    Decision vectors are handled internally as one float array ``v`` with the
    continuous part first and the integer part after it.

    Attributes:
        name: Lowercase identifier used on the command line.
        n_continuous: Number of continuous variables.
        n_integer: Number of integer variables.
        lower: Lower bound per variable.
        upper: Upper bound per variable (inclusive for integers).
        objectives: v -> (f1, f2) in raw units.
        constraints: v -> g, or None for box-only problems.
        n_constraints: Length of g.
        objective_jac: Optional analytic (2, n) Jacobian of the objectives.
        constraint_jac: Optional analytic (p, n) Jacobian of g.
        defaults: Run parameters for this benchmark.
        exact_front: Optional callable returning the raw Pareto front as an
            (k, 2) array when it is known in closed form.
    """

    name: str
    n_continuous: int
    n_integer: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    objectives: ArrayFn
    constraints: Optional[ArrayFn] = None
    n_constraints: int = 0
    objective_jac: Optional[ArrayFn] = None
    constraint_jac: Optional[ArrayFn] = None
    defaults: Optional[BenchmarkDefaults] = None
    exact_front: Optional[Callable[[], np.ndarray]] = None

    @property
    def n_vars(self) -> int:
        return self.n_continuous + self.n_integer

    @property
    def is_integer(self) -> bool:
        return self.n_continuous == 0 and self.n_integer > 0

    @property
    def lower_array(self) -> np.ndarray:
        return np.array(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.array(self.upper, dtype=float)

    def decision(self, v: Sequence[float]) -> DecisionVector:
        """Split a flat vector into a DecisionVector."""
        v = np.asarray(v, dtype=float)
        cont = tuple(v[: self.n_continuous])
        ints = tuple(int(round(a)) for a in v[self.n_continuous :])
        return DecisionVector(cont, ints)

    def g(self, v: np.ndarray) -> np.ndarray:
        if self.constraints is None:
            return np.zeros(0)
        return np.asarray(self.constraints(v), dtype=float)

    def f_jac(self, v: np.ndarray) -> np.ndarray:
        """Objective Jacobian, analytic when available, else central differences."""
        if self.objective_jac is not None:
            return np.asarray(self.objective_jac(v), dtype=float)
        return _central_diff(self.objectives, v, self.lower_array, self.upper_array)

    def g_jac(self, v: np.ndarray) -> np.ndarray:
        if self.constraints is None:
            return np.zeros((0, self.n_vars))
        if self.constraint_jac is not None:
            return np.asarray(self.constraint_jac(v), dtype=float).reshape(self.n_constraints, -1)
        return _central_diff(self.constraints, v, self.lower_array, self.upper_array)


def _central_diff(fn: ArrayFn, v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    f0 = np.atleast_1d(fn(v))
    jac = np.zeros((f0.size, v.size))
    for i in range(v.size):
        up, dn = v.copy(), v.copy()
        up[i] = min(v[i] + FD_STEP, hi[i])
        dn[i] = max(v[i] - FD_STEP, lo[i])
        jac[:, i] = (np.atleast_1d(fn(up)) - np.atleast_1d(fn(dn))) / (up[i] - dn[i])
    return jac


def _flat(spec: ProblemSpec, x: Union[DecisionVector, Sequence[float]]) -> np.ndarray:
    if isinstance(x, DecisionVector):
        if len(x.continuous) != spec.n_continuous or len(x.integer) != spec.n_integer:
            raise ValueError("domain violation")
        return x.as_array()
    v = np.asarray(x, dtype=float)
    if v.shape != (spec.n_vars,):
        raise ValueError("domain violation")
    return v


def evaluate(spec: ProblemSpec, x: Union[DecisionVector, Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate raw objectives and constraint values at ``x``.

    Args:
        spec: Problem definition.
        x: DecisionVector or flat array (continuous part first).

    Returns:
        Tuple (f, g) with f of length 2 and g of length ``spec.n_constraints``.

    Raises:
        ValueError: "domain violation" if ``x`` leaves the box or an integer
            component is not integral.
    """
    v = _flat(spec, x)
    if np.any(~np.isfinite(v)) or np.any(v < spec.lower_array) or np.any(v > spec.upper_array):
        raise ValueError("domain violation")
    if spec.n_integer and np.any(v[spec.n_continuous :] != np.round(v[spec.n_continuous :])):
        raise ValueError("domain violation")
    return np.asarray(spec.objectives(v), dtype=float), spec.g(v)
