"""Fixed-step Runge-Kutta time stepping."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional

import numpy as np

from .tableau import ButcherTableau

__all__ = [
    "ODESystem",
    "StepRecord",
    "NumericalError",
    "ConvergenceError",
    "IntegrationError",
    "erk_step",
    "irk_step",
    "step",
    "trajectory",
    "integrate",
]

DEFAULT_TOL = 1e-14
DEFAULT_MAX_ITER = 50
ROUNDOFF_STALL = 1e3 * np.finfo(float).eps


class NumericalError(ArithmeticError):
    def __init__(self, message: str, stage: int):
        super().__init__(message)
        self.stage = stage


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class IntegrationError(RuntimeError):
    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index}: {cause}")
        self.step_index = step_index
        self.cause = cause


@dataclass
class ODESystem:
    """dx/dt = rhs(t, x) on R^dim, with optional invariants and exact solution."""

    dim: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    invariants: dict = field(default_factory=dict)
    exact_solution: Optional[Callable[[float], np.ndarray]] = None
    name: str = ""
    n_evals: int = 0

    def counting(self) -> "ODESystem":
        """A copy whose ``n_evals`` counts right-hand-side calls."""
        inner = self.rhs
        sys = replace(self, n_evals=0)

        def rhs(t, x):
            sys.n_evals += 1
            return inner(t, x)

        sys.rhs = rhs
        return sys

    def evaluate_invariants(self, x) -> dict:
        return {k: float(f(x)) for k, f in self.invariants.items()}


@dataclass
class StepRecord:
    t: float
    x: np.ndarray
    iterations: int = 0
    invariants: dict = field(default_factory=dict)


def _plan(tab: ButcherTableau):
    plan = tab.__dict__.get("_step_plan")
    if plan is None:
        rows = [[(j, float(tab.A[i, j])) for j in range(tab.s) if tab.A[i, j] != 0] for i in range(tab.s)]
        weights = [(j, float(tab.b[j])) for j in range(tab.s) if tab.b[j] != 0]
        plan = (rows, weights, [float(v) for v in tab.c])
        object.__setattr__(tab, "_step_plan", plan)
    return plan


def _combine(pairs, F):
    # Ascending stage order, no reassociation.
    acc = None
    for j, w in pairs:
        term = w * F[j]
        acc = term if acc is None else acc + term
    return acc


def _erk_increment(sys: ODESystem, tab: ButcherTableau, t: float, x: np.ndarray, h: float) -> np.ndarray:
    rows, weights, c = _plan(tab)
    F = [None] * tab.s
    for i in range(tab.s):
        acc = _combine(rows[i], F)
        xi = x if acc is None else x + h * acc
        Fi = np.asarray(sys.rhs(t + c[i] * h, xi), dtype=float)
        if not np.all(np.isfinite(Fi)):
            raise NumericalError(f"non-finite right-hand side at stage {i + 1}", i + 1)
        F[i] = Fi
    acc = _combine(weights, F)
    return np.zeros_like(x) if acc is None else h * acc


def erk_step(sys: ODESystem, tab: ButcherTableau, t: float, x, h: float) -> np.ndarray:
    """One explicit step: x + h sum_j b_j F_j."""
    if not tab.is_explicit:
        raise ValueError(f"{tab.name or 'tableau'} is implicit; use irk_step")
    x = np.asarray(x, dtype=float)
    return x + _erk_increment(sys, tab, t, x, h)


def _irk_increment(sys, tab, t, x, h, tol, max_iter):
    A, c = tab.A, tab.c
    s = tab.s
    f0 = np.asarray(sys.rhs(t, x), dtype=float)
    K = np.tile(f0, (s, 1))
    X = x + h * (A @ K)
    resid = prev = np.inf
    for it in range(1, max_iter + 1):
        K = np.array([sys.rhs(t + c[i] * h, X[i]) for i in range(s)], dtype=float)
        if not np.all(np.isfinite(K)):
            bad = int(np.argmax(~np.all(np.isfinite(K), axis=1)))
            raise NumericalError(f"non-finite right-hand side at stage {bad + 1}", bad + 1)
        X_new = x + h * (A @ K)
        resid = float(np.max(np.abs(X_new - X)))
        X = X_new
        if resid < tol or resid == 0.0:
            return h * (tab.b @ K), it
        # Increments stopped shrinking at round-off level: as converged as floats allow.
        if resid >= prev and resid < ROUNDOFF_STALL * (1.0 + float(np.max(np.abs(X)))):
            return h * (tab.b @ K), it
        prev = resid
    raise ConvergenceError(f"fixed-point iteration did not converge in {max_iter} iterations "
                           f"(last stage increment {resid:.3e})", resid)


def irk_step(sys: ODESystem, tab: ButcherTableau, t: float, x, h: float,
             tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> tuple[np.ndarray, int]:
    """One implicit step by fixed-point iteration on the stage values.

    Returns the new state and the number of iterations used. Iteration stops
    once the sup-norm change of the stage values drops below ``tol``, or once
    it stops decreasing at round-off level (so ``tol=0`` iterates to round-off).
    """
    x = np.asarray(x, dtype=float)
    incr, it = _irk_increment(sys, tab, t, x, h, tol, max_iter)
    return x + incr, it


def step(sys, tab, t, x, h, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> tuple[np.ndarray, int]:
    if tab.is_explicit:
        return erk_step(sys, tab, t, x, h), 0
    return irk_step(sys, tab, t, x, h, tol, max_iter)


def trajectory(sys: ODESystem, tab: ButcherTableau, t0: float, x0, h: float, n_steps: int,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
               compensated: bool = False) -> Iterator[tuple[int, float, np.ndarray, int]]:
    """Yield ``(n, t_n, x_n, iterations)`` for n = 1..n_steps.

    Times are ``t0 + n h`` (not accumulated). With ``compensated=True`` the
    state update uses Kahan summation.
    """
    x = np.array(x0, dtype=float)
    comp = np.zeros_like(x)
    explicit = tab.is_explicit
    for n in range(1, n_steps + 1):
        t = t0 + (n - 1) * h
        try:
            if explicit:
                incr, it = _erk_increment(sys, tab, t, x, h), 0
            else:
                incr, it = _irk_increment(sys, tab, t, x, h, tol, max_iter)
        except (NumericalError, ConvergenceError) as exc:
            raise IntegrationError(n, exc) from exc
        if compensated:
            y = incr - comp
            xn = x + y
            comp = (xn - x) - y
            x = xn
        else:
            x = x + incr
        yield n, t0 + n * h, x, it


def integrate(sys: ODESystem, tab: ButcherTableau, t0: float, x0, h: float, n_steps: int,
              sample_every: int = 1, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
              compensated: bool = False) -> list[StepRecord]:
    """Integrate ``n_steps`` steps; record t0, every ``sample_every``-th step and the last one."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    x0 = np.array(x0, dtype=float)
    out = [StepRecord(t0, x0.copy(), 0, sys.evaluate_invariants(x0))]
    for n, t, x, it in trajectory(sys, tab, t0, x0, h, n_steps, tol, max_iter, compensated):
        if n % sample_every == 0 or n == n_steps:
            out.append(StepRecord(t, x.copy(), it, sys.evaluate_invariants(x)))
    return out
