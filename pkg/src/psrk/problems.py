"""Benchmark systems: torque-free rigid body and a non-separable pendulum."""
from __future__ import annotations

import math

import numpy as np

from .integrate import ODESystem

RIGID_M = 48.0 / 49.0
RIGID_OMEGA0 = (12.0, 0.0, 7.0)
LANDEN_CUTOFF = 1e-16


def complete_elliptic_k(m: float) -> float:
    """K(m) = pi / (2 AGM(1, sqrt(1 - m)))."""
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter m must lie in [0, 1), got {m!r}")
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(64):  # quadratic convergence: a handful of rounds in practice
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def jacobi_elliptic(u: float, m: float) -> tuple[float, float, float]:
    """(sn, cn, dn)(u | m) by descending Landen transformation."""
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter m must lie in [0, 1), got {m!r}")
    # Walk the parameter down: m -> mu = ((1 - k') / (1 + k'))^2, u -> u / (1 + sqrt(mu)).
    roots = []
    while m >= LANDEN_CUTOFF:
        kp = math.sqrt(1.0 - m)
        sq = (1.0 - kp) / (1.0 + kp)  # sqrt(mu)
        roots.append(sq)
        u = u / (1.0 + sq)
        m = sq * sq
    sn, cn, dn = math.sin(u), math.cos(u), 1.0
    for sq in reversed(roots):
        den = 1.0 + sq * sn * sn
        sn, cn, dn = (1.0 + sq) * sn / den, cn * dn / den, (1.0 - sq * sn * sn) / den
    return sn, cn, dn


def rigid_body_rhs(omega) -> np.ndarray:
    w1, w2, w3 = omega
    return np.array([-w2 * w3, w1 * w3, -w1 * w2 / 3.0])


def quadratic_invariants(omega) -> tuple[float, float]:
    w1, w2, w3 = omega
    return (w1 * w1 + w2 * w2, w2 * w2 + 3.0 * w3 * w3)


def rigid_body_period() -> float:
    return 4.0 * complete_elliptic_k(RIGID_M) / 7.0


def rigid_body_exact(t: float) -> np.ndarray:
    sn, cn, dn = jacobi_elliptic(7.0 * t, RIGID_M)
    return np.array([12.0 * cn, 12.0 * sn, 7.0 * dn])


def rigid_body_system() -> ODESystem:
    return ODESystem(
        dim=3,
        rhs=lambda t, w: rigid_body_rhs(w),
        invariants={"Q1": lambda w: quadratic_invariants(w)[0], "Q2": lambda w: quadratic_invariants(w)[1]},
        exact_solution=rigid_body_exact,
        name="rigid",
    )


PENDULUM_H0 = 0.8


def pendulum_initial() -> np.ndarray:
    return np.array([math.acos(-0.8), 0.0])


def hamiltonian(state) -> float:
    """H(p, x) = p^2 / 2 - (1 - p/6) cos x, state ordered (x, p)."""
    x, p = state
    return 0.5 * p * p - (1.0 - p / 6.0) * math.cos(x)


def pendulum_rhs(t: float, state) -> np.ndarray:
    """(dH/dp, -dH/dx)."""
    x, p = state
    return np.array([p + math.cos(x) / 6.0, -(1.0 - p / 6.0) * math.sin(x)])


def pendulum_system() -> ODESystem:
    return ODESystem(dim=2, rhs=pendulum_rhs, invariants={"H": hamiltonian}, name="pendulum")


PROBLEMS = {
    "rigid": (rigid_body_system, lambda: np.array(RIGID_OMEGA0)),
    "pendulum": (pendulum_system, pendulum_initial),
}


def get_problem(name: str):
    """``(system, x0)`` for a problem id."""
    try:
        make_sys, make_x0 = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None
    return make_sys(), make_x0()
