"""Order, pseudo-symplectic order, error coefficients and stability diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import factorial
from typing import Optional

import numpy as np

from .tableau import ButcherTableau
from .trees import (
    RootedTree,
    derivative_weight_table,
    monotonic_labelings,
    symmetry_order,
    tree_factorial,
    trees_of_order,
)

ORDER_TOL = 1e-12
PAIR_TOL = 1e-12
MZERO_TOL = 1e-13
MAX_ORDER = 8
DEFAULT_QMAX = 10

INF = math.inf


@dataclass
class MethodAnalysis:
    name: str
    s: int
    p: int
    q: float  # math.inf when M vanishes
    T: dict = field(default_factory=dict)
    r_coeffs: list = field(default_factory=list)
    rr_leading: Optional[tuple] = None
    flags: dict = field(default_factory=dict)
    max_abs_a: float = 0.0
    min_nonzero_b: float = 0.0

    @property
    def q_below_p(self) -> bool:
        return self.q < self.p

    def q_label(self) -> str:
        return "inf" if math.isinf(self.q) else str(int(self.q))


def order_residuals(tab: ButcherTableau, max_order: int = 4) -> dict:
    """b Phi(t) - 1/t! for every tree with |t| <= max_order."""
    if not 1 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must be in [1, {MAX_ORDER}]")
    trees = [t for k in range(1, max_order + 1) for t in trees_of_order(k)]
    phis = derivative_weight_table(trees, tab)
    return {t: float(tab.b @ phis[t]) - 1.0 / tree_factorial(t) for t in trees}


def classical_order(tab: ButcherTableau, tol: float = ORDER_TOL) -> int:
    res = order_residuals(tab, MAX_ORDER)
    p = 0
    for k in range(1, MAX_ORDER + 1):
        if all(abs(v) < tol for t, v in res.items() if t.order == k):
            p = k
        else:
            break
    return p


def m_matrix(tab: ButcherTableau) -> np.ndarray:
    """m_ij = b_i a_ij + b_j a_ji - b_i b_j."""
    bA = tab.b[:, None] * tab.A
    M = bA + bA.T - np.outer(tab.b, tab.b)
    # Symmetric by construction; average away any asymmetric rounding.
    return 0.5 * (M + M.T)


def pair_residuals(tab: ButcherTableau, q_max: int = DEFAULT_QMAX) -> dict:
    """Largest |Phi(t1)^T M Phi(t2)| for each total order |t1| + |t2| in [2, q_max]."""
    M = m_matrix(tab)
    trees = [t for k in range(1, q_max) for t in trees_of_order(k)]
    phis = derivative_weight_table(trees, tab)
    V = np.array([phis[t] for t in trees])
    orders = np.array([t.order for t in trees])
    G = np.abs(V @ M @ V.T)
    total = orders[:, None] + orders[None, :]
    return {k: float(G[total == k].max()) for k in range(2, q_max + 1)}


def pseudo_symplectic_order(tab: ButcherTableau, q_max: int = DEFAULT_QMAX, tol: float = PAIR_TOL) -> float:
    """Largest q <= q_max with all tree-pair conditions of total order <= q satisfied.

    Returns ``math.inf`` if M itself vanishes to within 1e-13.
    """
    if not 2 <= q_max <= 10:
        raise ValueError("q_max must be in [2, 10]")
    if np.max(np.abs(m_matrix(tab))) < MZERO_TOL:
        return INF
    q = 1
    for k, r in sorted(pair_residuals(tab, q_max).items()):
        if r >= tol:
            break
        q = k
    return q


def bilinear_direct(tab: ButcherTableau, u, v) -> float:
    """b(u.(Av)) + b((Au).v) - (bu)(bv); equals u^T M v."""
    A, b = tab.A, tab.b
    return float(b @ (u * (A @ v)) + b @ ((A @ u) * v) - (b @ u) * (b @ v))


def d_vector_flags(tab: ButcherTableau, tol: float = ORDER_TOL) -> dict:
    M = m_matrix(tab)
    A, b, c = tab.A, tab.b, tab.c
    vecs = {"D(1)": np.ones(tab.s), "D(c)": c, "D(c^2)": c**2, "D(Ac)": A @ c}
    flags = {k: bool(np.max(np.abs(M @ v)) < tol) for k, v in vecs.items()}
    ac = A @ c
    c2_ok = all(abs(ac[i] - c[i] ** 2 / 2) < tol or (i == 1 and b[1] == 0) for i in range(tab.s))
    return {"C(2)": c2_ok, **flags}


def error_coefficient(tab: ButcherTableau, p: int) -> float:
    """T_p = sqrt(sum over |t| = p of (b Phi(t) - 1/t!)^2 / sigma(t)^2)."""
    trees = trees_of_order(p)
    phis = derivative_weight_table(trees, tab)
    total = 0.0
    for t in trees:
        r = float(tab.b @ phis[t]) - 1.0 / tree_factorial(t)
        total += (r / symmetry_order(t)) ** 2
    return math.sqrt(total)


def error_coefficient_labelings(tab: ButcherTableau, p: int) -> float:
    """T_p through monotonic labelings: (1/p!) sqrt(sum alpha(t)^2 (t! b Phi(t) - 1)^2)."""
    trees = trees_of_order(p)
    phis = derivative_weight_table(trees, tab)
    total = 0.0
    for t in trees:
        r = tree_factorial(t) * float(tab.b @ phis[t]) - 1.0
        total += (monotonic_labelings(t) * r) ** 2
    return math.sqrt(total) / factorial(p)


def stability_series(tab: ButcherTableau, n_max: int) -> np.ndarray:
    """Taylor coefficients [z^k] R(z), k = 0..n_max, via R = 1 + sum z^{n+1} b A^n 1."""
    out = np.zeros(n_max + 1)
    out[0] = 1.0
    v = np.ones(tab.s)
    for k in range(1, n_max + 1):
        out[k] = tab.b @ v
        v = tab.A @ v
    return out


def stability_coefficients(tab: ButcherTableau, n_max: int = 8) -> list:
    """r_k = k! [z^k] R(z) for k = 0..n_max."""
    return [factorial(k) * x for k, x in enumerate(stability_series(tab, n_max))]


def rr_minus_one_series(tab: ButcherTableau, n_max: Optional[int] = None) -> np.ndarray:
    if n_max is None:
        n_max = 2 * tab.s if tab.is_explicit else 24
    R = stability_series(tab, n_max)
    Rm = R * (-1.0) ** np.arange(n_max + 1)
    prod = np.convolve(R, Rm)[: n_max + 1]
    prod[0] -= 1.0
    return prod


def rr_minus_one_leading(tab: ButcherTableau, tol: float = 1e-13):
    """(power, coefficient) of the first nonzero Taylor term of R(z) R(-z) - 1, or None."""
    series = rr_minus_one_series(tab)
    for k, v in enumerate(series):
        if abs(v) > tol:
            return (k, float(v))
    return None


def analyze(tab: ButcherTableau, q_max: int = DEFAULT_QMAX) -> MethodAnalysis:
    nz = tab.b[tab.b != 0]
    return MethodAnalysis(
        name=tab.name,
        s=tab.s,
        p=classical_order(tab),
        q=pseudo_symplectic_order(tab, q_max),
        T={k: error_coefficient(tab, k) for k in (4, 5, 6)},
        r_coeffs=stability_coefficients(tab, 8),
        rr_leading=rr_minus_one_leading(tab),
        flags=d_vector_flags(tab),
        max_abs_a=float(np.max(np.abs(tab.A))),
        min_nonzero_b=float(nz.min()) if nz.size else 0.0,
    )
