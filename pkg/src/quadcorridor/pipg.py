"""Extrapolated proportional-integral projected gradient (PIPG) solver.

Solves ``min 1/2 x'Px  s.t.  Hx - b in K, x in D`` for diagonal ``P`` and a
product set ``D`` of simple 3-vector sets, and flags infeasible instances from
the growth of the dual iterates.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse.linalg import aslinearoperator

from .assemble import ConicProblem, build_constraints
from .model import PhysicalParams, Trajectory
from .sets import project_blocks


class Status(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 10_000
    epsilon: float = 1e-3
    extrapolation: float = 1.9
    step_safety: float = 0.99
    power_tol: float = 1e-8
    power_inflation: float = 1.01
    check_every: int = 50
    primal_tol: float = 1e-4
    seed: int = 0
    step_rule: str = "product"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.extrapolation < 2:
            raise ValueError("extrapolation must lie in (0, 2)")
        if not 0 < self.step_safety < 1:
            raise ValueError("step_safety must lie in (0, 1)")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"unknown step rule {self.step_rule!r}")

    @classmethod
    def strict_paper(cls, **kwargs) -> SolverConfig:
        """Single feasibility test after the last iteration."""
        max_iter = kwargs.pop("max_iter", cls.max_iter)
        return cls(max_iter=max_iter, check_every=max_iter, **kwargs)


@dataclass(frozen=True, eq=False)
class SolveResult:
    status: Status
    x: np.ndarray
    y: np.ndarray
    trajectory: Trajectory
    objective: float
    iterations: int
    statistic: float
    primal_violation: float
    step_size: float
    history: np.ndarray = field(repr=False)

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


# --------------------------------------------------------------------------
# spectral norm


@njit(cache=True)
def _csr_matvec(indptr, indices, data, x, out):
    for i in range(out.shape[0]):
        acc = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            acc += data[jj] * x[indices[jj]]
        out[i] = acc


@njit(cache=True)
def _power_csr(Ap, Ai, Ax, Tp, Ti, Tx, x, tol, max_iter):
    y = np.empty(Ap.shape[0] - 1)
    sigma = math.sqrt(np.sum(x * x))
    prev = sigma
    it = 0
    while it == 0 or (abs(sigma - prev) >= tol and it < max_iter):
        prev = sigma
        _csr_matvec(Ap, Ai, Ax, x, y)
        y /= sigma
        _csr_matvec(Tp, Ti, Tx, y, x)
        sigma = math.sqrt(np.sum(x * x))
        it += 1
    return sigma, it


def power_iteration(operator, tol: float = 1e-8, seed: int = 0, max_iter: int = 1_000_000):
    """Largest singular value of ``operator``.

    The loop ``y = Hx / s; x = H'y; s = |x|`` converges to the largest
    eigenvalue of ``H'H``; its square root is returned. Iteration stops when
    successive values differ by less than ``tol``.

    Returns ``(sigma, iterations, converged)``.
    """
    rng = np.random.default_rng(seed)
    if sp.issparse(operator):
        A = sp.csr_matrix(operator, dtype=float)
        A.sort_indices()
        AT = A.T.tocsr()
        AT.sort_indices()
        n = A.shape[1]
        x = rng.uniform(-1.0, 1.0, n)
        while not np.any(x):
            x = rng.uniform(-1.0, 1.0, n)
        lam, it = _power_csr(A.indptr, A.indices, A.data, AT.indptr, AT.indices, AT.data, x, tol, max_iter)
    else:
        op = aslinearoperator(operator)
        n = op.shape[1]
        x = rng.uniform(-1.0, 1.0, n)
        while not np.any(x):
            x = rng.uniform(-1.0, 1.0, n)
        lam = float(np.linalg.norm(x))
        prev = lam
        it = 0
        while it == 0 or (abs(lam - prev) >= tol and it < max_iter):
            prev = lam
            x = op.rmatvec(op.matvec(x) / lam)
            lam = float(np.linalg.norm(x))
            it += 1
    converged = it < max_iter
    if not converged:
        warnings.warn(f"power iteration hit {max_iter} iterations without meeting tol={tol}", RuntimeWarning)
    return math.sqrt(lam), it, converged


@lru_cache(maxsize=512)
def _constraint_norm(params: PhysicalParams, t: int, tol: float) -> float:
    H, _, _ = build_constraints(params, t)
    return power_iteration(H, tol)[0]


def constraint_norm(problem: ConicProblem, tol: float = 1e-8) -> float:
    """``|H|`` for an assembled problem; cached since ``H`` depends only on
    the physical parameters and the horizon."""
    return _constraint_norm(problem.params, problem.t, tol)


STEP_RULES = ("product", "root")


def step_sizes(norm_P: float, sigma_H: float, safety: float = 0.99, inflation: float = 1.01, rule: str = "product"):
    """Equal primal and dual step sizes ``safety`` times a supremum.

    ``rule="product"`` uses the largest ``a`` with ``a * (|P| + a |H|^2) <= 1``,
    i.e. ``2 / (|P| + sqrt(|P|^2 + 4|H|^2))``. ``rule="root"`` uses
    ``2 / sqrt(|P|^2 + 4|H|^2)``, which is larger and diverges on these
    problems at extrapolation 1.9; it is kept for comparison only.
    ``|H|`` is inflated by ``inflation`` to cover power-iteration error.
    """
    if norm_P < 0 or sigma_H < 0:
        raise ValueError("norms must be non-negative")
    if not 0 < safety < 1:
        raise ValueError("safety must lie in (0, 1)")
    root = math.sqrt(norm_P**2 + 4 * (inflation * sigma_H) ** 2)
    if root == 0:
        raise ValueError("both norms are zero; step size is unbounded")
    if rule == "product":
        alpha = safety * 2.0 / (norm_P + root)
    elif rule == "root":
        alpha = safety * 2.0 / root
    else:
        raise ValueError(f"unknown step rule {rule!r}; expected one of {STEP_RULES}")
    return alpha, alpha


# --------------------------------------------------------------------------
# main loop


@njit(cache=True)
def _violation(Hp, Hi, Hx, x, b, p, buf):
    _csr_matvec(Hp, Hi, Hx, x, buf)
    worst = 0.0
    for i in range(buf.shape[0]):
        r = buf[i] - b[i]
        if i < p:
            r = abs(r)
        else:
            r = -r
        if r > worst:
            worst = r
    return worst


@njit(cache=True)
def _pipg_loop(cost, Hp, Hi, Hx, Tp, Ti, Tx, b, p, kinds, prm, x, xbar, y, ybar, alpha, beta, lam, eps, ptol, max_iter, check_every, hist):
    """Run PIPG in place on ``x, xbar, y, ybar``.

    Returns ``(iterations, statistic, violation, n_history)``; ``hist``
    receives ``(iteration, statistic, violation)`` rows at each check.
    """
    n = x.shape[0]
    m = y.shape[0]
    y_prev = np.empty(m)
    grad = np.empty(n)
    z = np.empty(m)
    tmp = np.empty(n)
    stat = np.inf
    viol = np.inf
    nh = 0
    for j in range(1, max_iter + 1):
        for i in range(m):
            y_prev[i] = y[i]
        _csr_matvec(Tp, Ti, Tx, ybar, grad)
        for i in range(n):
            x[i] = xbar[i] - alpha * (cost[i] * xbar[i] + grad[i])
        project_blocks(x, kinds, prm)
        for i in range(n):
            tmp[i] = 2.0 * x[i] - xbar[i]
        _csr_matvec(Hp, Hi, Hx, tmp, z)
        for i in range(m):
            v = ybar[i] + beta * (z[i] - b[i])
            if i >= p and v > 0.0:
                v = 0.0
            y[i] = v
        for i in range(n):
            xbar[i] = (1.0 - lam) * xbar[i] + lam * x[i]
        for i in range(m):
            ybar[i] = (1.0 - lam) * ybar[i] + lam * y[i]

        if j % check_every == 0 or j == max_iter:
            dy = 0.0
            for i in range(m):
                d = y[i] - y_prev[i]
                dy += d * d
            xn = 0.0
            for i in range(n):
                xn += x[i] * x[i]
            xn = math.sqrt(xn)
            if xn < 1e-12:
                xn = 1.0 + xn
            stat = math.sqrt(dy) / (beta * lam * xn)
            viol = _violation(Hp, Hi, Hx, x, b, p, z)
            if nh < hist.shape[0]:
                hist[nh, 0] = j
                hist[nh, 1] = stat
                hist[nh, 2] = viol
                nh += 1
            if stat <= eps and viol <= ptol:
                return j, stat, viol, nh
    return max_iter, stat, viol, nh


def initial_iterates(problem: ConicProblem, seed: int):
    rng = np.random.default_rng(seed)
    xbar = rng.uniform(-1.0, 1.0, problem.n)
    ybar = rng.uniform(-1.0, 1.0, problem.m)
    return xbar, ybar


def solve(problem: ConicProblem, config: SolverConfig | None = None, warm_start=None) -> SolveResult:
    """Run PIPG on ``problem`` and classify the outcome.

    Feasible: dual-increment statistic within ``epsilon`` and every constraint
    of ``Hx - b in K`` within ``primal_tol``. Infeasible: statistic above
    ``epsilon`` after ``max_iter`` iterations. Indeterminate: statistic small
    but the primal check fails.
    """
    config = config or SolverConfig()
    H, HT = problem.H, problem.HT
    if H.shape != (problem.m, problem.n) or HT.shape != (problem.n, problem.m):
        raise ValueError("constraint matrix shape does not match the problem dimensions")
    if problem.kinds.shape[0] * 3 != problem.n:
        raise ValueError("set assignment does not cover the primal vector")

    sigma = constraint_norm(problem, config.power_tol)
    norm_P = float(np.max(np.abs(problem.cost)))
    alpha, beta = step_sizes(norm_P, sigma, config.step_safety, config.power_inflation, config.step_rule)
    lam = config.extrapolation

    if warm_start is None:
        xbar, ybar = initial_iterates(problem, config.seed)
    else:
        xbar, ybar = (np.array(a, dtype=float) for a in warm_start)
    x, y = xbar.copy(), ybar.copy()
    hist = np.zeros((config.max_iter // config.check_every + 1, 3))

    iters, stat, viol, nh = _pipg_loop(
        problem.cost, H.indptr, H.indices, H.data, HT.indptr, HT.indices, HT.data,
        problem.b, problem.cone.zero, problem.kinds, problem.block_params,
        x, xbar, y, ybar, alpha, beta, lam, config.epsilon, config.primal_tol,
        config.max_iter, config.check_every, hist,
    )

    if stat > config.epsilon:
        status = Status.INFEASIBLE
    elif viol <= config.primal_tol:
        status = Status.FEASIBLE
    else:
        status = Status.INDETERMINATE

    return SolveResult(
        status=status,
        x=x,
        y=y,
        trajectory=problem.decode(x),
        objective=problem.objective(x),
        iterations=int(iters),
        statistic=float(stat),
        primal_violation=float(viol),
        step_size=alpha,
        history=hist[:nh],
    )
