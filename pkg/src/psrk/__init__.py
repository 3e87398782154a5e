"""Pseudo-symplectic Runge-Kutta methods: tableau analysis, exact coefficients and drift experiments."""
from .analysis import MethodAnalysis, analyze, classical_order, pseudo_symplectic_order
from .integrate import ODESystem, integrate, step, trajectory
from .tableau import (
    ButcherTableau,
    catalog,
    family_tableau,
    format_tableau,
    load_tableau,
    parse_tableau,
    resolve_method,
    save_tableau,
)
from .trees import RootedTree, enumerate_trees

__version__ = "0.1.0"
