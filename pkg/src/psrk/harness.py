"""Long-run drift experiments, drift-speed fits and the method comparison table."""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .integrate import DEFAULT_TOL, trajectory
from .problems import get_problem
from .tableau import ButcherTableau, load_tableau, resolve_method

EPS = np.finfo(float).eps
FLOOR_FACTOR = 100.0

# Comparison-table method ids, in display order. Methods without a built-in
# tableau are looked up as <id>.txt in a methods directory.
TABLE1_METHODS = ("rk4", "ac36", "clmr47", "ccrl47", "eq2", "eq3", "cv8", "gl4")


@dataclass
class DriftSeries:
    method: str
    problem: str
    h1: float
    h: float
    labels: tuple
    samples: list = field(default_factory=list)  # (t, (dev_1, dev_2, ...))

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    def deviations(self, label: Optional[str] = None) -> np.ndarray:
        k = 0 if label is None else self.labels.index(label)
        return np.array([d[k] for _, d in self.samples])

    def rows(self) -> list[dict]:
        return [{"t": t, **dict(zip(self.labels, d))} for t, d in self.samples]


@dataclass
class DriftSpeedFit:
    method: str
    h: np.ndarray
    h1: np.ndarray
    speeds: np.ndarray
    floor: np.ndarray  # True where the point is round-off dominated
    slope: Optional[float]  # None -> every point sits on the round-off floor

    @property
    def window(self) -> tuple:
        used = self.h[~self.floor]
        return (float(used.min()), float(used.max())) if used.size else ()

    @property
    def is_floor(self) -> bool:
        return self.slope is None

    def rows(self) -> list[dict]:
        return [
            {"method": self.method, "h1": a, "h": b, "speed": v, "floor": int(f)}
            for a, b, v, f in zip(self.h1, self.h, self.speeds, self.floor)
        ]


def _max_workers(requested: Optional[int] = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("RK_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def drift_experiment(problem: str, tab: ButcherTableau, h1: float, t_end: float,
                     sample_dt: float, tol: float = DEFAULT_TOL, compensated: bool = False) -> DriftSeries:
    """Integrate with h = s h1 and sample the invariant deviations every ``sample_dt``.

    Rigid body: |Q_i(x) - Q_i(x0)|. Pendulum: H(x) - H(x0).
    ``tol`` and ``compensated`` go to the stepper; near the round-off floor use
    ``tol=0, compensated=True``.
    """
    if t_end <= 0 or sample_dt <= 0 or t_end / sample_dt < 10:
        raise ValueError("t_end / sample_dt must give at least 10 samples")
    sys, x0 = get_problem(problem)
    h = tab.s * h1
    n_steps = int(round(t_end / h))
    every = max(1, int(round(sample_dt / h)))
    labels = tuple(sys.invariants)
    funcs = [sys.invariants[k] for k in labels]
    ref = [f(x0) for f in funcs]
    signed = problem == "pendulum"

    def dev(x):
        d = [f(x) - r for f, r in zip(funcs, ref)]
        return tuple(d) if signed else tuple(abs(v) for v in d)

    series = DriftSeries(tab.name, problem, h1, h, labels, [(0.0, dev(x0))])
    try:
        for n, t, x, _ in trajectory(sys, tab, 0.0, x0, h, n_steps, tol=tol, compensated=compensated):
            if n % every == 0 or n == n_steps:
                series.samples.append((t, dev(x)))
    except Exception as exc:
        raise RuntimeError(f"drift run {problem}/{tab.name} h1={h1!r} failed: {exc}") from exc
    return series


def moving_average_hamiltonian(times, values, t: float, window: float) -> float:
    """sin^2-weighted average of ``values`` over samples with t < t_n < t + window."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = (times > t) & (times < t + window)
    if np.count_nonzero(sel) < 2:
        raise ValueError(f"window ({t}, {t + window}) covers fewer than 2 samples")
    w = np.sin(np.pi * (times[sel] - t) / window) ** 2
    return float(np.sum(w * values[sel]) / np.sum(w))


def _monitored_run(problem: str, tab: ButcherTableau, h1: float, t_end: float):
    sys, x0 = get_problem(problem)
    f = next(iter(sys.invariants.values()))
    h = tab.s * h1
    n_steps = int(round(t_end / h))
    vals = np.empty(n_steps + 1)
    vals[0] = f(x0)
    for n, _, x, _ in trajectory(sys, tab, 0.0, x0, h, n_steps):
        vals[n] = f(x)
    return h, vals


def drift_speed(problem: str, tab: ButcherTableau, h1: float, t_end: float,
                window: Optional[float] = None) -> float:
    """(<H>(t_end - W) - <H>(0)) / (t_end - W) from the first and last full windows."""
    window = t_end / 10.0 if window is None else window
    h, vals = _monitored_run(problem, tab, h1, t_end)
    times = h * np.arange(len(vals))
    t2 = t_end - window
    first = moving_average_hamiltonian(times, vals, 0.0, window)
    last = moving_average_hamiltonian(times, vals, t2, window)
    return (last - first) / t2


def _speed_task(args):
    problem, tab, h1, t_end, window = args
    return drift_speed(problem, tab, h1, t_end, window)


def floor_threshold(h1: float, level: float) -> float:
    """Drift speed below which a point is treated as round-off dominated."""
    return FLOOR_FACTOR * EPS * abs(level) / h1


def fit_drift_slope(h, h1, speeds, level: float, method: str = "") -> DriftSpeedFit:
    """Least-squares slope of log|speed| against log h over the points above the floor."""
    h = np.asarray(h, dtype=float)
    h1 = np.asarray(h1, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    floor = np.array([abs(v) < floor_threshold(a, level) for v, a in zip(speeds, h1)])
    keep = ~floor
    slope = None
    if np.count_nonzero(keep) >= 2:
        slope = float(np.polyfit(np.log(h[keep]), np.log(np.abs(speeds[keep])), 1)[0])
    return DriftSpeedFit(method, h, h1, speeds, floor, slope)


def drift_speed_slope(problem: str, tab: ButcherTableau, h1_list: Sequence[float], t_end: float,
                      window: Optional[float] = None, workers: Optional[int] = None) -> DriftSpeedFit:
    if len(h1_list) < 3:
        raise ValueError("need at least 3 step sizes")
    window = t_end / 10.0 if window is None else window
    tasks = [(problem, tab, float(h1), t_end, window) for h1 in h1_list]
    n = min(_max_workers(workers), len(tasks))
    if n <= 1:
        speeds = [_speed_task(a) for a in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            speeds = list(pool.map(_speed_task, tasks))
    sys, x0 = get_problem(problem)
    level = next(iter(sys.invariants.values()))(x0)
    h1 = np.asarray(h1_list, dtype=float)
    return fit_drift_slope(tab.s * h1, h1, speeds, level, tab.name)


# --- comparison table -------------------------------------------------------

TABLE1_COLUMNS = (
    "method", "available", "s", "p", "q", "T4_x1e4", "T5_x1e3", "T6_x1e3",
    "rr_power", "rr_coeff", "C2", "D1", "Dc", "Dc2", "DAc", "max_abs_a", "min_nonzero_b",
)


def _find_method(name: str, methods_dir: Optional[Path]) -> Optional[ButcherTableau]:
    if methods_dir is not None:
        for ext in (".txt", ".tab"):
            path = methods_dir / f"{name}{ext}"
            if path.exists():
                return load_tableau(path)
    try:
        return resolve_method(name)
    except KeyError:
        return None


def table_row(tab: ButcherTableau, name: Optional[str] = None, q_max: int = analysis.DEFAULT_QMAX) -> dict:
    return analysis_row(analysis.analyze(tab, q_max), name or tab.name)


def analysis_row(a: analysis.MethodAnalysis, name: str) -> dict:
    power, coeff = a.rr_leading if a.rr_leading else (0, 0.0)
    return {
        "method": name,
        "available": 1,
        "s": a.s,
        "p": a.p,
        "q": a.q_label(),
        "T4_x1e4": a.T[4] * 1e4,
        "T5_x1e3": a.T[5] * 1e3,
        "T6_x1e3": a.T[6] * 1e3,
        "rr_power": power,
        "rr_coeff": coeff,
        "C2": int(a.flags["C(2)"]),
        "D1": int(a.flags["D(1)"]),
        "Dc": int(a.flags["D(c)"]),
        "Dc2": int(a.flags["D(c^2)"]),
        "DAc": int(a.flags["D(Ac)"]),
        "max_abs_a": a.max_abs_a,
        "min_nonzero_b": a.min_nonzero_b,
    }


def table1_report(methods: Sequence[str] = TABLE1_METHODS, methods_dir=None) -> list[dict]:
    """One row per method; methods with no tableau available are marked ``available = 0``."""
    methods_dir = Path(methods_dir) if methods_dir is not None else None
    rows = []
    for name in methods:
        tab = _find_method(name, methods_dir)
        if tab is None:
            rows.append({"method": name, "available": 0})
        else:
            rows.append(table_row(tab, name))
    return rows


# --- CSV ---------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def emit_csv(data, path, columns: Optional[Sequence[str]] = None) -> None:
    """Write a DriftSeries, DriftSpeedFit or list of dict rows as CSV.

    Floats are written with 17 significant digits so they parse back exactly.
    Comparison-table rows marked unavailable are left out.
    """
    if isinstance(data, DriftSeries):
        columns = columns or ("t",) + tuple(data.labels)
        rows = data.rows()
    elif isinstance(data, DriftSpeedFit):
        columns = columns or ("method", "h1", "h", "speed", "floor")
        rows = data.rows()
    else:
        rows = list(data)
        if rows and "available" in rows[0]:
            rows = [r for r in rows if r["available"]]
            columns = columns or TABLE1_COLUMNS
        elif columns is None:
            columns = tuple(rows[0]) if rows else ()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(k, "")) for k in columns])
