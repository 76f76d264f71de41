"""The five bi-objective benchmark problems.

All constraints are written as g(v) <= 0. Continuous problems carry
analytic Jacobians so the local solver sees exact derivatives.
"""

from __future__ import annotations

import math

import numpy as np

from sdnbi.problems.base import BenchmarkDefaults, ProblemSpec

# ---------------------------------------------------------------- MOP1


def _mop1_f(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    return np.array([1.0 / (x1 * x1 + x2 * x2 + 1.0), x1 * x1 + 3.0 * x2 * x2 + 4.0])


def _mop1_jac(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    d = (x1 * x1 + x2 * x2 + 1.0) ** 2
    return np.array([[-2.0 * x1 / d, -2.0 * x2 / d], [2.0 * x1, 6.0 * x2]])


MOP1 = ProblemSpec(
    name="mop1",
    n_continuous=2,
    n_integer=0,
    lower=(-3.0, -3.0),
    upper=(3.0, 3.0),
    objectives=_mop1_f,
    objective_jac=_mop1_jac,
    defaults=BenchmarkDefaults(20, 0.001, 33, 10, 100, (0.053, 1.0), (1.0, 37.0)),
)

# ---------------------------------------------------------------- SCH2


def _sch2_f(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    return np.array(
        [(x1 + x2 - 7.5) ** 2 + (x2 - x1 + 3.0) ** 2 / 4.0, (x1 - 1.0) ** 2 / 4.0 + (x2 - 4.0) ** 2 / 2.0]
    )


def _sch2_jac(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    a = 2.0 * (x1 + x2 - 7.5)
    c = (x2 - x1 + 3.0) / 2.0
    return np.array([[a - c, a + c], [(x1 - 1.0) / 2.0, x2 - 4.0]])


def _sch2_g(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    return np.array(
        [(x1 - 2.0) ** 3 / 2.0 + x2 - 2.5, x1 + x2 - 8.0 * (x2 - x1 + 0.65) ** 2 - 3.85]
    )


def _sch2_gjac(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    s = 16.0 * (x2 - x1 + 0.65)
    return np.array([[1.5 * (x1 - 2.0) ** 2, 1.0], [1.0 + s, 1.0 - s]])


SCH2 = ProblemSpec(
    name="sch2",
    n_continuous=2,
    n_integer=0,
    lower=(0.0, 0.0),
    upper=(5.0, 3.0),
    objectives=_sch2_f,
    constraints=_sch2_g,
    n_constraints=2,
    objective_jac=_sch2_jac,
    constraint_jac=_sch2_gjac,
    defaults=BenchmarkDefaults(20, 0.001, 27, 10, 200, (7.251, 0.5), (18.5, 3.045)),
)

# ---------------------------------------------------------------- TNK


def _tnk_f(v: np.ndarray) -> np.ndarray:
    return np.array([v[0], v[1]], dtype=float)


def _tnk_jac(v: np.ndarray) -> np.ndarray:
    return np.eye(2)


def _tnk_g(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    # atan2 handles x2 = 0; numpy gives 0 at the origin
    theta = math.atan2(x1, x2)
    return np.array(
        [
            -(x1 * x1 + x2 * x2 - 1.0 - 0.1 * math.cos(16.0 * theta)),
            (x1 - 0.5) ** 2 + (x2 - 0.5) ** 2 - 0.5,
        ]
    )


def _tnk_gjac(v: np.ndarray) -> np.ndarray:
    x1, x2 = v
    r2 = x1 * x1 + x2 * x2
    theta = math.atan2(x1, x2)
    s = 1.6 * math.sin(16.0 * theta)
    if r2 > 0.0:
        dth = (x2 / r2, -x1 / r2)
    else:
        dth = (0.0, 0.0)
    return np.array(
        [
            [-2.0 * x1 - s * dth[0], -2.0 * x2 - s * dth[1]],
            [2.0 * (x1 - 0.5), 2.0 * (x2 - 0.5)],
        ]
    )


TNK = ProblemSpec(
    name="tnk",
    n_continuous=2,
    n_integer=0,
    lower=(0.0, 0.0),
    upper=(math.pi, math.pi),
    objectives=_tnk_f,
    constraints=_tnk_g,
    n_constraints=2,
    objective_jac=_tnk_jac,
    constraint_jac=_tnk_gjac,
    defaults=BenchmarkDefaults(20, 0.002, 59, 15, 301, (0.0416, 0.0416), (1.0384, 1.0384)),
)

# ---------------------------------------------------------------- ZDT3

ZDT3_N = 30
_ZDT3_C = 9.0 / (ZDT3_N - 1)
_X1_FLOOR = 1e-12  # keeps the sqrt derivative finite at x1 = 0


def _zdt3_f(v: np.ndarray) -> np.ndarray:
    x1 = v[0]
    g = 1.0 + _ZDT3_C * float(np.sum(v[1:]))
    r = x1 / g
    h = 1.0 - math.sqrt(r) - r * math.sin(10.0 * math.pi * x1)
    return np.array([x1, g * h])


def _zdt3_jac(v: np.ndarray) -> np.ndarray:
    x1 = max(v[0], _X1_FLOOR)
    g = 1.0 + _ZDT3_C * float(np.sum(v[1:]))
    jac = np.zeros((2, v.size))
    jac[0, 0] = 1.0
    a = 10.0 * math.pi
    jac[1, 0] = -0.5 * math.sqrt(g / x1) - math.sin(a * v[0]) - a * v[0] * math.cos(a * v[0])
    jac[1, 1:] = _ZDT3_C * (1.0 - 0.5 * math.sqrt(v[0] / g))
    return jac


ZDT3 = ProblemSpec(
    name="zdt3",
    n_continuous=ZDT3_N,
    n_integer=0,
    lower=(0.0,) * ZDT3_N,
    upper=(1.0,) * ZDT3_N,
    objectives=_zdt3_f,
    objective_jac=_zdt3_jac,
    defaults=BenchmarkDefaults(50, 0.005, 36, 10, 100, (0.0, -0.7733), (0.8518, 1.0)),
)

# ---------------------------------------------------------------- ZDT5

ZDT5_Y1_MAX = 30
ZDT5_YI_MAX = 5
ZDT5_N_TAIL = 10


def zdt5_v(y: int) -> int:
    """Per-substring contribution to g."""
    return 2 + y if y < ZDT5_YI_MAX else 1


def _zdt5_f(v: np.ndarray) -> np.ndarray:
    y = [round(a) for a in v.tolist()]
    g = float(sum(2 + a if a < ZDT5_YI_MAX else 1 for a in y[1:]))
    return np.array([1.0 + y[0], g / (1.0 + y[0])])


def _zdt5_front() -> np.ndarray:
    k = np.arange(ZDT5_Y1_MAX + 1, dtype=float)
    g_min = ZDT5_N_TAIL * min(zdt5_v(y) for y in range(ZDT5_YI_MAX + 1))
    return np.column_stack([1.0 + k, g_min / (1.0 + k)])


ZDT5 = ProblemSpec(
    name="zdt5",
    n_continuous=0,
    n_integer=1 + ZDT5_N_TAIL,
    lower=(0.0,) * (1 + ZDT5_N_TAIL),
    upper=(float(ZDT5_Y1_MAX),) + (float(ZDT5_YI_MAX),) * ZDT5_N_TAIL,
    objectives=_zdt5_f,
    defaults=BenchmarkDefaults(30, 0.005, 40, 10, 100, (0.0, 0.3226), (31.0, 10.0)),
    exact_front=_zdt5_front,
)

PROBLEMS: dict[str, ProblemSpec] = {p.name: p for p in (MOP1, SCH2, TNK, ZDT3, ZDT5)}


def get_problem(name: str) -> ProblemSpec:
    """Look up a benchmark by (case-insensitive) name."""
    try:
        return PROBLEMS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
