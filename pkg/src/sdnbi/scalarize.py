"""Scalarized subproblems and supporting-normal extraction.

Continuous mNBI subproblems are handed to the solver in epigraph form over
(x, t): maximize t subject to Phi beta + t nbar >= f_hat(x) - origin. Integer
problems use the reduced merit -t_of_x instead, since t is then a function
of the objective vector alone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from sdnbi.core import ObjectiveBounds, ObjectivePoint, ParetoArchive, normalize
from sdnbi.geometry import segment_normal
from sdnbi.problems.base import ProblemSpec
from sdnbi.subsolver import (
    SolveRequest,
    SolveResult,
    Tolerances,
    integer_local_search,
    recover_multipliers,
    solve,
)

ANCHOR_DELTA = 1e-6
EPS_Z = 1e-4
T_BOUND = 10.0  # box for the auxiliary t variable; far beyond any reachable distance
INTEGER_ACTIVE_TOL = 1e-9
_MU_FLOOR = 1e-12


class Status(enum.Enum):
    NEW = "new-point"
    REPEAT = "repeat-point"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolverConfig:
    """Multistart settings shared by every subproblem solve."""

    n_starts: int = 20
    seed: Optional[int] = 7
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass(frozen=True)
class ExtraBound:
    """Fathoming bound on f_hat1: side 'a' means f_hat1 >= value, side 'b' f_hat1 <= value."""

    side: str
    value: float

    def __post_init__(self):
        if self.side not in ("a", "b"):
            raise ValueError("side must be 'a' or 'b'")


@dataclass(frozen=True)
class MnbiParams:
    """Parameters of one mNBI subproblem.

    Attributes:
        phi: 2x2 matrix whose columns are the end points minus ``f_id``.
        beta: Convex weights selecting the reference point.
        nbar: Unit search direction with nonpositive components.
        f_id: Origin of the local frame (normalized units).
        extra_bound: Optional fathoming bound.
    """

    phi: np.ndarray
    beta: np.ndarray
    nbar: np.ndarray
    f_id: np.ndarray = field(default_factory=lambda: np.zeros(2))
    extra_bound: Optional[ExtraBound] = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).reshape(2, 2)
        beta = np.asarray(self.beta, dtype=float)
        nbar = np.asarray(self.nbar, dtype=float)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "nbar", nbar)
        object.__setattr__(self, "f_id", np.asarray(self.f_id, dtype=float))
        if np.any(beta < 0) or abs(beta.sum() - 1.0) > 1e-9:
            raise ValueError("beta must be nonnegative and sum to 1")
        if abs(np.linalg.norm(nbar) - 1.0) > 1e-9 or np.any(nbar > 0):
            raise ValueError("nbar must be a unit vector with nonpositive components")

    @property
    def reference(self) -> np.ndarray:
        """Reference point f_id + Phi beta."""
        return self.f_id + self.phi @ self.beta

    @classmethod
    def for_segment(cls, p1: Sequence[float], p2: Sequence[float], beta=(0.5, 0.5), nbar=None) -> "MnbiParams":
        """Build parameters for the segment from p1 (upper left) to p2 (lower right).

        The local origin is the corner (p1_1, p2_2), so Phi has a zero diagonal.
        By default the direction is the unit normal of the segment.
        """
        p1, p2 = np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)
        origin = np.array([p1[0], p2[1]])
        phi = np.column_stack([p1 - origin, p2 - origin])
        if nbar is None:
            nbar = segment_normal(p1, p2)
        return cls(phi=phi, beta=np.asarray(beta, dtype=float), nbar=nbar, f_id=origin)

    def with_bound(self, side: str, value: float) -> "MnbiParams":
        return MnbiParams(self.phi, self.beta, self.nbar, self.f_id, ExtraBound(side, value))


def t_of_x(params: MnbiParams, f_normalized: Sequence[float]) -> float:
    """Largest t with reference + t * nbar >= f componentwise."""
    nbar = params.nbar
    if np.any(nbar == 0):
        raise ValueError("degenerate normal")
    f = np.asarray(f_normalized, dtype=float)
    return float(np.min((f - params.reference) / nbar))


@dataclass
class MnbiOutcome:
    """Result of an mNBI (or fathoming) solve."""

    point: Optional[ObjectivePoint]
    t: float
    status: Status
    result: SolveResult


class _Scaled:
    """Normalized objectives of a problem: f_hat(v) and its Jacobian."""

    def __init__(self, spec: ProblemSpec, bounds: ObjectiveBounds):
        self.spec = spec
        self.ideal = np.array(bounds.ideal)
        self.span = np.array(bounds.nadir) - self.ideal
        self.bounds = bounds

    def f(self, x: np.ndarray) -> np.ndarray:
        return (self.spec.objectives(x) - self.ideal) / self.span

    def jac(self, x: np.ndarray) -> np.ndarray:
        return self.spec.f_jac(x) / self.span[:, None]

    def point(self, x: np.ndarray, **kw) -> ObjectivePoint:
        raw = np.asarray(self.spec.objectives(x), dtype=float)
        z = normalize(raw, self.bounds)
        return ObjectivePoint(z=tuple(z), decision=self.spec.decision(x), raw=tuple(raw), **kw)


def _extra_row(params: MnbiParams, fhat: np.ndarray) -> list[float]:
    eb = params.extra_bound
    if eb is None:
        return []
    if eb.side == "a":
        return [eb.value - fhat[0]]
    return [fhat[0] - eb.value]


def _extra_jac(params: MnbiParams, fj: np.ndarray) -> list[np.ndarray]:
    eb = params.extra_bound
    if eb is None:
        return []
    return [-fj[0]] if eb.side == "a" else [fj[0]]


def _mnbi_request(spec: ProblemSpec, sc: _Scaled, params: MnbiParams, cfg: SolverConfig) -> SolveRequest:
    p = spec.n_constraints
    if spec.is_integer:
        memo: dict = {}

        def fh(y):
            # merit, tiebreak and constraints all need f_hat at the same lattice point
            k = tuple(y)
            if k not in memo:
                memo[k] = sc.f(y)
            return memo[k]

        def ineq(y):
            return np.concatenate([spec.g(y), _extra_row(params, fh(y))])

        has_ineq = p > 0 or params.extra_bound is not None
        return SolveRequest(
            merit=lambda y: -t_of_x(params, fh(y)),
            tiebreak=lambda y: float(np.sum(fh(y))),
            lower=spec.lower_array,
            upper=spec.upper_array,
            ineq=ineq if has_ineq else None,
            integer=True,
            n_starts=cfg.n_starts,
            seed=cfg.seed,
            tolerances=cfg.tolerances,
        )

    n = spec.n_vars
    ref, nbar = params.reference, params.nbar
    lo = np.append(spec.lower_array, -T_BOUND)
    hi = np.append(spec.upper_array, T_BOUND)

    def ineq(v):
        x, t = v[:n], v[n]
        fh = sc.f(x)
        return np.concatenate([fh - ref - t * nbar, spec.g(x), _extra_row(params, fh)])

    def ineq_jac(v):
        x = v[:n]
        fj = sc.jac(x)
        top = np.hstack([fj, -nbar[:, None]])
        rows = [top]
        if p:
            rows.append(np.hstack([spec.g_jac(x), np.zeros((p, 1))]))
        extra = _extra_jac(params, fj)
        if extra:
            rows.append(np.append(extra[0], 0.0)[None, :])
        return np.vstack(rows)

    grad = np.zeros(n + 1)
    grad[n] = -1.0

    def start_map(u):
        x = spec.lower_array + u * (spec.upper_array - spec.lower_array)
        t0 = float(np.clip(t_of_x(params, sc.f(x)), -T_BOUND, T_BOUND))
        return np.append(x, t0)

    return SolveRequest(
        merit=lambda v: -v[n],
        merit_grad=lambda v: grad,
        lower=lo,
        upper=hi,
        ineq=ineq,
        ineq_jac=ineq_jac,
        n_starts=cfg.n_starts,
        seed=cfg.seed,
        tolerances=cfg.tolerances,
        start_map=start_map,
        sobol_dim=n,
    )


def _integer_objective_multipliers(sc: _Scaled, params: MnbiParams, y: np.ndarray, tol: float):
    """Multipliers for the two objective constraints of an integer solve.

    With every variable integer and held fixed, only t is free, so
    stationarity reads sum_j mu_j |nbar_j| = 1 over the active objective
    constraints. One active constraint gives a unit axis normal; when both
    are active the split is taken proportional to |nbar|.
    """
    fh = sc.f(y)
    t = t_of_x(params, fh)
    slack = fh - params.reference - t * params.nbar
    active = np.abs(slack) <= tol
    a = np.abs(params.nbar)
    mu = np.zeros(2)
    if active.all():
        mu = a / (a @ a)
    else:
        j = int(np.argmax(active)) if active.any() else int(np.argmax(slack))
        mu[j] = 1.0 / a[j]
    return mu, 0.0


def _finish_mnbi(spec, sc, params, res: SolveResult, archive: Optional[ParetoArchive]) -> MnbiOutcome:
    n = spec.n_vars
    x = res.x_best[:n]
    if not res.feasible:
        return MnbiOutcome(None, float("nan"), Status.INFEASIBLE, res)
    pt = sc.point(x)
    t = t_of_x(params, pt.z)
    if spec.is_integer:
        mu, resid = _integer_objective_multipliers(sc, params, x, INTEGER_ACTIVE_TOL)
        res.multipliers = np.concatenate([mu, np.zeros(spec.n_constraints + (params.extra_bound is not None))])
        res.stationarity_residual = resid
    status = Status.NEW
    if archive is not None and archive.find(pt.z) is not None:
        status = Status.REPEAT
    return MnbiOutcome(pt, t, status, res)


def solve_mnbi(
    spec: ProblemSpec,
    bounds: ObjectiveBounds,
    params: MnbiParams,
    solver_cfg: SolverConfig,
    archive: Optional[ParetoArchive] = None,
) -> MnbiOutcome:
    """Maximize the distance t from the reference point along nbar.

    Args:
        spec: Problem to solve.
        bounds: Normalization bounds.
        params: Subproblem parameters (no extra bound).
        solver_cfg: Multistart settings.
        archive: Known points; a solution within its dedup tolerance of one of
            them is reported as a repeat.
    """
    if params.extra_bound is not None:
        raise ValueError("use solve_mnbi_fathom for bounded subproblems")
    return _solve_mnbi(spec, bounds, params, solver_cfg, archive)


def solve_mnbi_fathom(
    spec: ProblemSpec,
    bounds: ObjectiveBounds,
    params: MnbiParams,
    solver_cfg: SolverConfig,
    archive: Optional[ParetoArchive] = None,
) -> MnbiOutcome:
    """The mNBI subproblem with an extra bound on f_hat1 (fathoming variant)."""
    if params.extra_bound is None:
        raise ValueError("fathoming subproblem needs an extra bound")
    return _solve_mnbi(spec, bounds, params, solver_cfg, archive)


def _solve_mnbi(spec, bounds, params, solver_cfg, archive) -> MnbiOutcome:
    sc = _Scaled(spec, bounds)
    res = solve(_mnbi_request(spec, sc, params, solver_cfg))
    if res.feasible:
        x = polish_dominating(spec, sc, res.x_best[: spec.n_vars], params, solver_cfg)
        if spec.is_integer:
            res.x_best = x
        else:
            res = _refit_at(spec, sc, params, solver_cfg, x, res)
    return _finish_mnbi(spec, sc, params, res, archive)


def polish_dominating(spec: ProblemSpec, sc: "_Scaled", x0: np.ndarray, params: Optional[MnbiParams],
                      cfg: SolverConfig) -> np.ndarray:
    """Move to a point that dominates x0, if one is reachable locally.

    Maximizing t only pins down the binding objective; the other may be
    improvable at no cost in t. Minimizing f_hat1 + f_hat2 subject to
    f_hat <= f_hat(x0) (and the original constraints) removes that slack
    while keeping t at least as large.
    """
    f0 = sc.f(x0)
    slack = 0.0 if spec.is_integer else 1e-10

    def ineq(x):
        fh = sc.f(x)
        extra = _extra_row(params, fh) if params is not None else []
        return np.concatenate([fh - f0 - slack, spec.g(x), extra])

    def ineq_jac(x):
        fj = sc.jac(x)
        rows = [fj]
        if spec.n_constraints:
            rows.append(spec.g_jac(x))
        extra = _extra_jac(params, fj) if params is not None else []
        if extra:
            rows.append(extra[0][None, :])
        return np.vstack(rows)

    req = SolveRequest(
        merit=lambda x: float(np.sum(sc.f(x))),
        merit_grad=None if spec.is_integer else (lambda x: np.sum(sc.jac(x), axis=0)),
        lower=spec.lower_array,
        upper=spec.upper_array,
        ineq=ineq,
        ineq_jac=None if spec.is_integer else ineq_jac,
        integer=spec.is_integer,
        n_starts=1,
        seed=None,
        tolerances=cfg.tolerances,
        start_map=lambda u: x0,
    )
    if spec.is_integer:
        x, _ = integer_local_search(req, x0)
    else:
        x = solve(req).x_best
    f = sc.f(x)
    ok = np.all(f <= f0 + 1e-9) and req.violation(x) <= cfg.tolerances.feasibility_tol
    return x if ok and f.sum() < f0.sum() - 1e-12 else x0


def _refit_at(spec, sc, params, cfg, x, res: SolveResult) -> SolveResult:
    """Re-evaluate activity and multipliers of the epigraph problem at x."""
    req = _mnbi_request(spec, sc, params, cfg)
    v = np.append(x, t_of_x(params, sc.f(x)))
    g = req.g(v)
    active = tuple(int(i) for i in np.nonzero(np.abs(g) <= cfg.tolerances.feasibility_tol)[0])
    jac = np.atleast_2d(req.ineq_jac(v))[list(active)] if active else np.zeros((0, v.size))
    mu, _, resid = recover_multipliers(req.merit_grad(v), jac, v, req.lower, req.upper)
    mu_full = np.zeros(g.size)
    mu_full[list(active)] = mu
    viol = req.violation(v)
    return SolveResult(v, float(req.merit(v)), viol <= cfg.tolerances.feasibility_tol, viol, active, mu_full,
                       None, resid, res.n_starts_converged)


def supporting_normal(result: SolveResult, params: MnbiParams, z: Sequence[float]) -> tuple[np.ndarray, float]:
    """Normal w' = mu / sum(mu) of the supporting line at an mNBI solution.

    Args:
        result: Solve result whose first two multipliers belong to the
            objective constraints.
        params: The subproblem parameters (kept for interface symmetry).
        z: The normalized solution point.

    Returns:
        Tuple (w', b) with b = w'.z.
    """
    if result.multipliers is None:
        raise ValueError("vanishing multipliers")
    mu = np.clip(np.asarray(result.multipliers[:2], dtype=float), 0.0, None)
    s = mu.sum()
    if s <= _MU_FLOOR:
        raise ValueError("vanishing multipliers")
    w = mu / s
    return w, float(w @ np.asarray(z, dtype=float))


def weighted_sum_request(spec: ProblemSpec, sc: _Scaled, w: np.ndarray, cfg: SolverConfig) -> SolveRequest:
    kw = dict(n_starts=cfg.n_starts, seed=cfg.seed, tolerances=cfg.tolerances)
    if spec.n_constraints:
        kw.update(ineq=spec.g, ineq_jac=spec.g_jac)
    if spec.is_integer:
        return SolveRequest(merit=lambda y: float(w @ sc.f(y)), lower=spec.lower_array, upper=spec.upper_array,
                            integer=True, **kw)
    return SolveRequest(
        merit=lambda x: float(w @ sc.f(x)),
        merit_grad=lambda x: w @ sc.jac(x),
        lower=spec.lower_array,
        upper=spec.upper_array,
        **kw,
    )


def solve_weighted_sum(
    spec: ProblemSpec, bounds: ObjectiveBounds, w: Sequence[float], solver_cfg: SolverConfig
) -> ObjectivePoint:
    """Minimize w.f_hat; the returned point carries w as its supporting normal."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    sc = _Scaled(spec, bounds)
    res = solve(weighted_sum_request(spec, sc, w, solver_cfg))
    if not res.feasible:
        raise RuntimeError("weighted-sum subproblem infeasible")
    return sc.point(res.x_best).with_normal(w)


def find_anchors(spec: ProblemSpec, solver_cfg: SolverConfig) -> tuple[ObjectiveBounds, ObjectivePoint, ObjectivePoint]:
    """Compute both anchor points and the bounds they define.

    Each anchor minimizes (1 - delta) f_j + delta f_other on the raw scale,
    followed by a polish that minimizes the other objective with f_j held at
    its optimum, so that a weakly dominated minimizer is never returned.

    Returns:
        Tuple (bounds, left anchor, right anchor); the left anchor minimizes
        f1 and sits at normalized (0, 1).
    """
    unit = ObjectiveBounds((0.0, 0.0), (1.0, 1.0))
    raw = []
    for j in (0, 1):
        w = np.array([1.0 - ANCHOR_DELTA, ANCHOR_DELTA]) if j == 0 else np.array([ANCHOR_DELTA, 1.0 - ANCHOR_DELTA])
        sc = _Scaled(spec, unit)
        res = solve(weighted_sum_request(spec, sc, w, solver_cfg))
        if not res.feasible:
            raise RuntimeError(f"anchor solve {j + 1} infeasible")
        x = _polish_anchor(spec, res.x_best, j, solver_cfg)
        raw.append((x, np.asarray(spec.objectives(x), dtype=float)))
    ideal = (raw[0][1][0], raw[1][1][1])
    nadir = (raw[1][1][0], raw[0][1][1])
    bounds = ObjectiveBounds(ideal, nadir)
    sc = _Scaled(spec, bounds)
    left = sc.point(raw[0][0], anchor=True, iter_found=1).with_normal([1.0 - ANCHOR_DELTA, ANCHOR_DELTA])
    right = sc.point(raw[1][0], anchor=True, iter_found=2).with_normal([ANCHOR_DELTA, 1.0 - ANCHOR_DELTA])
    # Snap to the exact corners; the bounds are defined by these very points.
    left = _snap(left, (0.0, 1.0))
    right = _snap(right, (1.0, 0.0))
    return bounds, left, right


def _snap(p: ObjectivePoint, z: tuple[float, float]) -> ObjectivePoint:
    w = np.array(p.normal)
    return ObjectivePoint(z=z, decision=p.decision, normal=p.normal, offset=float(w @ np.array(z)),
                          raw=p.raw, iter_found=p.iter_found, anchor=True)


def _polish_anchor(spec: ProblemSpec, x0: np.ndarray, j: int, cfg: SolverConfig) -> np.ndarray:
    """Minimize the other objective subject to f_j <= f_j(x0), starting at x0."""
    f0 = np.asarray(spec.objectives(x0), dtype=float)
    slack = 0.0 if spec.is_integer else 1e-9 * max(1.0, abs(f0[j]))
    req = SolveRequest(
        merit=lambda x: float(spec.objectives(x)[1 - j]),
        merit_grad=None if spec.is_integer else (lambda x: spec.f_jac(x)[1 - j]),
        lower=spec.lower_array,
        upper=spec.upper_array,
        ineq=lambda x: np.concatenate([[spec.objectives(x)[j] - f0[j] - slack], spec.g(x)]),
        ineq_jac=None if spec.is_integer else (lambda x: np.vstack([spec.f_jac(x)[j][None, :], spec.g_jac(x)])),
        integer=spec.is_integer,
        n_starts=1,
        seed=None,
        tolerances=cfg.tolerances,
        start_map=lambda u: x0,
    )
    if spec.is_integer:
        x, _ = integer_local_search(req, x0)
        ok = req.violation(x) <= cfg.tolerances.feasibility_tol
    else:
        res = solve(req)
        x = res.x_best
        ok = res.feasible and res.violation <= 1e-2 * cfg.tolerances.feasibility_tol
    if ok and spec.objectives(x)[1 - j] < f0[1 - j] and not np.any(spec.g(x) > cfg.tolerances.feasibility_tol):
        return x
    return x0


def solve_nbi(
    spec: ProblemSpec, bounds: ObjectiveBounds, params: MnbiParams, solver_cfg: SolverConfig
) -> Optional[ObjectivePoint]:
    """Equality-constrained NBI subproblem: reference + t nbar = f_hat(x), maximize t.

    Returns None when no feasible solution was found.
    """
    if spec.is_integer:
        raise ValueError("equality-constrained NBI is only defined for continuous problems")
    sc = _Scaled(spec, bounds)
    n = spec.n_vars
    ref, nbar = params.reference, params.nbar

    def eq(v):
        return sc.f(v[:n]) - ref - v[n] * nbar

    def eq_jac(v):
        return np.hstack([sc.jac(v[:n]), -nbar[:, None]])

    grad = np.zeros(n + 1)
    grad[n] = -1.0

    def start_map(u):
        x = spec.lower_array + u * (spec.upper_array - spec.lower_array)
        return np.append(x, float(np.clip(t_of_x(params, sc.f(x)), -T_BOUND, T_BOUND)))

    kw = {}
    if spec.n_constraints:
        kw = dict(
            ineq=lambda v: spec.g(v[:n]),
            ineq_jac=lambda v: np.hstack([spec.g_jac(v[:n]), np.zeros((spec.n_constraints, 1))]),
        )
    req = SolveRequest(
        merit=lambda v: -v[n],
        merit_grad=lambda v: grad,
        lower=np.append(spec.lower_array, -T_BOUND),
        upper=np.append(spec.upper_array, T_BOUND),
        eq=eq,
        eq_jac=eq_jac,
        n_starts=solver_cfg.n_starts,
        seed=solver_cfg.seed,
        tolerances=solver_cfg.tolerances,
        start_map=start_map,
        sobol_dim=n,
        **kw,
    )
    res = solve(req)
    if not res.feasible:
        return None
    return sc.point(res.x_best[:n])
