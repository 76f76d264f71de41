"""Single-objective subproblem solvers with Sobol multistart.

Continuous requests are solved by SLSQP from every start; integer requests
by a best-improvement coordinate search. Both return the best feasible
local solution, ties going to the lowest start index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize, nnls
from scipy.stats import qmc

MAX_SOBOL_DIM = 64
_BITS = 32


@dataclass(frozen=True)
class Tolerances:
    """Solver tolerances.

    Attributes:
        feasibility_tol: Largest constraint value accepted as feasible, and the
            activity threshold for multiplier recovery.
        step_tol: Objective-change tolerance handed to the local solver.
        max_inner_iters: Iteration cap per local solve.
    """

    feasibility_tol: float = 1e-6
    step_tol: float = 1e-8
    max_inner_iters: int = 200

    def __post_init__(self):
        if not self.feasibility_tol > 0:
            raise ValueError("feasibility_tol must be positive")


@dataclass
class SolveRequest:
    """A minimization problem over a box with constraints g(v) <= 0, h(v) = 0.

    Attributes:
        merit: Objective to minimize.
        lower: Lower variable bounds.
        upper: Upper variable bounds.
        merit_grad: Gradient of ``merit`` (continuous solves).
        ineq: Vector of inequality constraint values, or None.
        ineq_jac: Jacobian of ``ineq``.
        eq: Vector of equality constraint values, or None.
        eq_jac: Jacobian of ``eq``.
        integer: Treat every variable as an integer.
        n_starts: Number of Sobol starts.
        seed: Digital-shift seed; None leaves the sequence unscrambled.
        tolerances: Solver tolerances.
        start_map: Maps a unit-cube point of dimension ``sobol_dim`` to a
            starting vector. Defaults to affine scaling onto the box.
        sobol_dim: Dimension of the start points; defaults to len(lower).
        tiebreak: Secondary objective for integer solves, compared only
            when merits tie. Lets the search leave plateaus of max-min merits.
    """

    merit: Callable[[np.ndarray], float]
    lower: np.ndarray
    upper: np.ndarray
    merit_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ineq: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ineq_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eq: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eq_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    integer: bool = False
    n_starts: int = 20
    seed: Optional[int] = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    start_map: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sobol_dim: Optional[int] = None
    tiebreak: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")

    def starts(self) -> np.ndarray:
        dim = self.sobol_dim or self.lower.size
        u = sobol_points(dim, self.n_starts, self.seed)
        if self.start_map is not None:
            return np.array([self.start_map(row) for row in u])
        return self.lower + u * (self.upper - self.lower)

    def g(self, v: np.ndarray) -> np.ndarray:
        return np.zeros(0) if self.ineq is None else np.atleast_1d(np.asarray(self.ineq(v), dtype=float))

    def h(self, v: np.ndarray) -> np.ndarray:
        return np.zeros(0) if self.eq is None else np.atleast_1d(np.asarray(self.eq(v), dtype=float))

    def violation(self, v: np.ndarray) -> float:
        g, h = self.g(v), self.h(v)
        parts = [0.0]
        if g.size:
            parts.append(float(np.max(g)))
        if h.size:
            parts.append(float(np.max(np.abs(h))))
        return max(parts)


@dataclass
class SolveResult:
    """Best local solution across starts.

    Attributes:
        x_best: Best point found (flat vector).
        merit_best: Merit at ``x_best``.
        feasible: Whether ``x_best`` satisfies all constraints within tolerance.
        violation: Largest constraint violation at ``x_best``.
        active_set: Indices of inequality constraints with |g_i| <= tolerance.
        multipliers: Nonnegative estimates for every inequality constraint
            (zero when inactive), or None when not recovered.
        eq_multipliers: Free-sign estimates for equality constraints.
        stationarity_residual: Norm of the fitted stationarity residual.
        n_starts_converged: Starts whose local solve reported success.
    """

    x_best: np.ndarray
    merit_best: float
    feasible: bool
    violation: float
    active_set: tuple[int, ...] = ()
    multipliers: Optional[np.ndarray] = None
    eq_multipliers: Optional[np.ndarray] = None
    stationarity_residual: float = float("nan")
    n_starts_converged: int = 0


def sobol_points(dim: int, n: int, seed: Optional[int] = None) -> np.ndarray:
    """First ``n`` points of the Sobol' sequence in ``dim`` dimensions.

    With a seed the points get a random XOR digital shift, which keeps the
    net structure and is fully determined by the seed.

    Args:
        dim: Dimension, between 1 and 64.
        n: Number of points.
        seed: Shift seed, or None for the plain sequence.

    Returns:
        Array of shape (n, dim) with entries in [0, 1).
    """
    if not 1 <= dim <= MAX_SOBOL_DIM:
        raise ValueError(f"sobol dimension must be in [1, {MAX_SOBOL_DIM}], got {dim}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.zeros((0, dim))
    engine = qmc.Sobol(d=dim, scramble=False, bits=_BITS)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # balance warning for n != 2^k
        pts = engine.random(n)
    if seed is None:
        return pts
    ints = np.round(pts * 2.0**_BITS).astype(np.uint64)
    shift = np.random.default_rng(seed).integers(0, 2**_BITS, size=dim, dtype=np.uint64)
    return (ints ^ shift).astype(float) / 2.0**_BITS


def recover_multipliers(
    merit_grad: np.ndarray,
    active_jac: np.ndarray,
    v: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    eq_jac: Optional[np.ndarray] = None,
    bound_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Fit KKT multipliers by nonnegative least squares.

    Solves grad f + sum mu_i grad g_i + sum nu_j grad h_j + bound terms = 0
    with mu >= 0. Variables sitting on a bound contribute a signed unit
    column with its own nonnegative multiplier.

    Returns:
        Tuple (mu, nu, residual_norm).
    """
    n = v.size
    cols = [np.asarray(active_jac, dtype=float).reshape(-1, n)]
    k = cols[0].shape[0]
    m = 0
    if eq_jac is not None and np.size(eq_jac):
        ej = np.asarray(eq_jac, dtype=float).reshape(-1, n)
        m = ej.shape[0]
        cols += [ej, -ej]
    eye = np.eye(n)
    at_hi = np.nonzero(v >= upper - bound_tol)[0]
    at_lo = np.nonzero(v <= lower + bound_tol)[0]
    cols += [eye[at_hi], -eye[at_lo]]
    a = np.vstack(cols).T
    coef, resid = nnls(a, -np.asarray(merit_grad, dtype=float), maxiter=50 * max(a.shape[1], 1))
    mu = coef[:k]
    nu = coef[k : k + m] - coef[k + m : k + 2 * m]
    return mu, nu, float(resid)


def _rank_key(feasible: bool, merit: float, violation: float, index: int) -> tuple:
    return (0, merit, index) if feasible else (1, violation, index)


def solve_continuous(req: SolveRequest) -> SolveResult:
    """Multistart SLSQP on a continuous request.

    Every start runs to local convergence; the best feasible result wins.
    Multipliers of the active inequality constraints are then recovered at
    the winner by a nonnegative least-squares fit of stationarity.
    """
    tol = req.tolerances
    lo, hi = req.lower, req.upper
    cons = []
    if req.ineq is not None:
        cons.append(
            {
                "type": "ineq",
                "fun": lambda v: -req.g(v),
                "jac": (lambda v: -np.atleast_2d(req.ineq_jac(v))) if req.ineq_jac else None,
            }
        )
    if req.eq is not None:
        cons.append(
            {"type": "eq", "fun": req.h, "jac": (lambda v: np.atleast_2d(req.eq_jac(v))) if req.eq_jac else None}
        )
    for c in cons:
        if c["jac"] is None:
            del c["jac"]
    best = None
    converged = 0
    for i, x0 in enumerate(req.starts()):
        x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(
                req.merit,
                x0,
                jac=req.merit_grad,
                method="SLSQP",
                bounds=list(zip(lo, hi)),
                constraints=cons,
                options={"maxiter": tol.max_inner_iters, "ftol": tol.step_tol * 1e-2},
            )
        x = np.clip(res.x, lo, hi)
        if not np.all(np.isfinite(x)):
            continue
        converged += bool(res.success)
        viol = req.violation(x)
        feas = viol <= tol.feasibility_tol
        merit = float(req.merit(x))
        key = _rank_key(feas, merit, viol, i)
        if best is None or key < best[0]:
            best = (key, x, merit, feas, viol)
    if best is None:
        raise RuntimeError("local solver produced no finite iterate")
    _, x, merit, feas, viol = best
    g = req.g(x)
    active = tuple(int(i) for i in np.nonzero(np.abs(g) <= tol.feasibility_tol)[0])
    mu_full = nu = None
    resid = float("nan")
    if req.merit_grad is not None and (req.ineq is None or req.ineq_jac is not None):
        jac = np.atleast_2d(req.ineq_jac(x))[list(active)] if active else np.zeros((0, x.size))
        eq_jac = np.atleast_2d(req.eq_jac(x)) if req.eq is not None and req.eq_jac else None
        mu, nu, resid = recover_multipliers(req.merit_grad(x), jac, x, lo, hi, eq_jac)
        mu_full = np.zeros(g.size)
        mu_full[list(active)] = mu
    return SolveResult(
        x_best=x,
        merit_best=merit,
        feasible=feas,
        violation=viol,
        active_set=active,
        multipliers=mu_full,
        eq_multipliers=nu,
        stationarity_residual=resid,
        n_starts_converged=converged,
    )


def _integer_box(req: SolveRequest) -> tuple[np.ndarray, np.ndarray]:
    lo = np.ceil(req.lower - 1e-9).astype(int)
    hi = np.floor(req.upper + 1e-9).astype(int)
    if np.any(hi < lo):
        raise ValueError("empty integer domain")
    return lo, hi


def integer_local_search(req: SolveRequest, y0, cache: Optional[dict] = None) -> tuple[np.ndarray, tuple]:
    """Best-improvement coordinate search from ``y0``.

    The neighbourhood of a point is every vector obtained by moving one
    coordinate one step up or down within its domain. When no such step
    improves, every other value of each single coordinate is tried before
    stopping, so the search cannot stall in a one-step local minimum. Points are compared
    by (violation beyond tolerance, merit, tiebreak) lexicographically.

    Returns:
        Tuple (local optimum, its comparison key).
    """
    lo, hi = _integer_box(req)
    ftol = req.tolerances.feasibility_tol
    cache = {} if cache is None else cache

    def key(y: tuple[int, ...]) -> tuple[float, float, float]:
        if y not in cache:
            v = np.array(y, dtype=float)
            viol = req.violation(v)
            tb = float(req.tiebreak(v)) if req.tiebreak is not None else 0.0
            cache[y] = (viol if viol > ftol else 0.0, float(req.merit(v)), tb)
        return cache[y]

    def better(a, b) -> bool:
        # strict progress guards against cycling on flat merit
        if a[0] != b[0]:
            return a[0] < b[0]
        if abs(a[1] - b[1]) > 1e-12:
            return a[1] < b[1]
        return a[2] < b[2] - 1e-12

    y = [int(round(a)) for a in y0]
    cur = key(tuple(y))
    wide = False
    while True:
        move, move_key = None, cur
        for j in range(len(y)):
            orig = y[j]
            vals = range(int(lo[j]), int(hi[j]) + 1) if wide else (orig - 1, orig + 1)
            for val in vals:
                if val == orig or not lo[j] <= val <= hi[j]:
                    continue
                y[j] = val
                k = key(tuple(y))
                if better(k, move_key):
                    move, move_key = (j, val), k
            y[j] = orig
        if move is None:
            if wide:
                return np.array(y, dtype=float), cur
            wide = True
            continue
        y[move[0]] = move[1]
        cur = move_key
        wide = False


def solve_integer(req: SolveRequest) -> SolveResult:
    """Multistart integer coordinate search (see :func:`integer_local_search`)."""
    lo, hi = _integer_box(req)
    tol = req.tolerances
    cache: dict = {}
    u = sobol_points(req.sobol_dim or lo.size, req.n_starts, req.seed)
    best = None
    for i, row in enumerate(u):
        y0 = np.minimum(lo + np.floor(row * (hi - lo + 1)).astype(int), hi)
        y, k = integer_local_search(req, y0, cache)
        rank = (k[0], k[1], k[2], i)
        if best is None or rank < best[0]:
            best = (rank, y)
    y = best[1]
    viol = req.violation(y)
    g = req.g(y)
    active = tuple(int(i) for i in np.nonzero(np.abs(g) <= tol.feasibility_tol)[0])
    return SolveResult(
        x_best=y,
        merit_best=float(req.merit(y)),
        feasible=viol <= tol.feasibility_tol,
        violation=viol,
        active_set=active,
        n_starts_converged=req.n_starts,
    )


def solve(req: SolveRequest) -> SolveResult:
    """Dispatch to the integer or continuous solver."""
    return solve_integer(req) if req.integer else solve_continuous(req)
