import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psrk import harness
from psrk.harness import (
    DriftSeries,
    drift_experiment,
    drift_speed,
    drift_speed_slope,
    emit_csv,
    fit_drift_slope,
    moving_average_hamiltonian,
    table1_report,
)
from psrk.integrate import integrate
from psrk.problems import get_problem
from psrk.tableau import catalog, save_tableau


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- drift runs ------------------------------------------------------------

def test_deviation_zero_at_start():
    series = drift_experiment("rigid", catalog("eq3"), 2**-6, 4.0, 0.25)
    assert series.samples[0] == (0.0, (0.0, 0.0))
    assert series.h == 8 * 2**-6
    assert series.labels == ("Q1", "Q2")
    assert series.times().tolist() == [0.25 * k for k in range(17)]


def test_pendulum_deviation_is_signed():
    series = drift_experiment("pendulum", catalog("rk4"), 0.25, 200.0, 5.0)
    dev = series.deviations()
    assert dev[0] == 0.0 and np.any(dev < 0)


def test_gl4_has_no_systematic_drift():
    series = drift_experiment("rigid", catalog("gl4"), 2**-7, 100.0, 1.0)
    assert max(np.max(np.abs(series.deviations(l))) for l in series.labels) < 1e-9


def test_too_few_samples_rejected():
    with pytest.raises(ValueError):
        drift_experiment("rigid", catalog("rk4"), 0.01, 1.0, 0.5)


def test_failure_reported_with_context():
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(RuntimeError, match="rigid/rk4"):
        drift_experiment("rigid", catalog("rk4"), 1.0, 1000.0, 10.0)


def test_gl4_random_walk_slope():
    # Round-off-limited run: iterate the stages to round-off and compensate the sum.
    series = drift_experiment("rigid", catalog("gl4"), 2**-6, 1000.0, 0.1, tol=0.0, compensated=True)
    t = series.times()[1:]
    dev = np.hypot(series.deviations("Q1")[1:], series.deviations("Q2")[1:])
    edges = np.logspace(0, 3, 7)
    centers, rms = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (t >= lo) & (t < hi)
        centers.append(np.sqrt(lo * hi))
        rms.append(np.sqrt(np.mean(dev[sel] ** 2)))
    slope = np.polyfit(np.log(centers), np.log(rms), 1)[0]
    assert 0.2 <= slope <= 0.8


@pytest.mark.parametrize("name", ["rk4", "eq2", "eq3"])
def test_equal_work_per_unit_time(name):
    # At fixed h1 every explicit method spends 1/h1 evaluations per unit time.
    tab, h1, steps = catalog(name), 2**-7, 40
    t_end = steps * tab.s * h1
    sys, x0 = get_problem("rigid")
    sys = sys.counting()
    integrate(sys, tab, 0.0, x0, tab.s * h1, steps)
    assert sys.n_evals == tab.s * steps == round(t_end / h1)


# --- moving average ----------------------------------------------------------

def test_average_of_constant():
    t = np.arange(0, 50, 0.1)
    assert moving_average_hamiltonian(t, np.full_like(t, 0.8), 3.0, 20.0) == 0.8


@given(st.floats(-5, 5), st.floats(-1, 1), st.integers(0, 3000))
def test_average_of_linear_is_midpoint(a, b, k):
    # Window start on the sample grid, so the weights are symmetric about the midpoint.
    h = 0.01
    t = h * np.arange(10000)
    W, start = 40.0, k * h
    avg = moving_average_hamiltonian(t, a + b * t, start, W)
    assert abs(avg - (a + b * (start + W / 2))) < 1e-10


def test_window_needs_two_samples():
    t = np.arange(0, 10.0)
    with pytest.raises(ValueError):
        moving_average_hamiltonian(t, t, 20.0, 5.0)
    with pytest.raises(ValueError):
        moving_average_hamiltonian(t, t, 2.5, 1.0)


# --- slope fitting -----------------------------------------------------------

def test_fit_power_law():
    h = np.array([0.4, 0.3, 0.2, 0.1])
    fit = fit_drift_slope(h, h / 8, 3e-2 * h**9, 0.8)
    assert fit.slope == pytest.approx(9.0, abs=1e-9)
    assert fit.window == (0.1, 0.4)


def test_floor_points_excluded():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    speeds = np.array([1e-6, 1e-6 / 32, 1e-15, -1e-16])
    fit = fit_drift_slope(h, h / 4, speeds, 0.8)
    assert list(fit.floor) == [False, False, True, True]
    assert fit.slope == pytest.approx(5.0)
    assert fit.window == (0.2, 0.4)


def test_zero_drift_gives_floor_marker():
    h = np.array([0.4, 0.2, 0.1])
    fit = fit_drift_slope(h, h, np.zeros(3), 0.8)
    assert fit.is_floor and fit.slope is None and fit.window == ()


def test_slope_needs_three_sizes():
    with pytest.raises(ValueError):
        drift_speed_slope("pendulum", catalog("rk4"), [0.1, 0.05], 100.0)


def test_parallel_matches_serial(monkeypatch):
    h1 = [1 / 16, 1 / 24, 1 / 32]
    serial = drift_speed_slope("pendulum", catalog("rk4"), h1, 400.0, workers=1)
    monkeypatch.setenv("RK_THREADS", "3")
    parallel = drift_speed_slope("pendulum", catalog("rk4"), h1, 400.0, workers=3)
    assert np.array_equal(serial.speeds, parallel.speeds)
    assert serial.slope == parallel.slope


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("RK_THREADS", "2")
    assert harness._max_workers(16) == 2
    monkeypatch.delenv("RK_THREADS")
    assert harness._max_workers(16) == 16


def test_drift_ranking_at_equal_h1():
    h1, t_end = 2**-5, 2000.0
    assert abs(drift_speed("pendulum", catalog("rk4"), h1, t_end)) > abs(
        drift_speed("pendulum", catalog("eq3"), h1, t_end))


# --- table -------------------------------------------------------------------

def test_table_rows():
    rows = {r["method"]: r for r in table1_report()}
    assert list(rows) == list(harness.TABLE1_METHODS)
    eq3 = rows["eq3"]
    assert (eq3["s"], eq3["p"], eq3["q"]) == (8, 4, "8")
    assert eq3["T5_x1e3"] == pytest.approx(0.64048, rel=1e-4)
    assert (eq3["rr_power"], eq3["rr_coeff"]) == (10, pytest.approx(0.0000095004, rel=1e-4))
    assert eq3["min_nonzero_b"] == pytest.approx(0.0644, abs=1e-4)
    eq2 = rows["eq2"]
    assert (eq2["s"], eq2["p"], eq2["q"]) == (7, 4, "9")
    assert eq2["max_abs_a"] == pytest.approx(1.7024, abs=1e-4)
    assert rows["gl4"]["q"] == "inf"
    for name in ("ac36", "clmr47", "ccrl47", "cv8"):
        assert rows[name] == {"method": name, "available": 0}


def test_table_loads_methods_dir(tmp_path):
    save_tableau(catalog("pointR"), tmp_path / "cv8.txt")
    rows = {r["method"]: r for r in table1_report(methods_dir=tmp_path)}
    assert rows["cv8"]["available"] == 1 and rows["cv8"]["s"] == 7


def test_table_csv_has_available_rows_only(tmp_path):
    rows = table1_report()
    emit_csv(rows, tmp_path / "t.csv")
    lines = read_csv(tmp_path / "t.csv")
    assert lines[0] == list(harness.TABLE1_COLUMNS)
    assert len(lines) - 1 == sum(r["available"] for r in rows)


# --- CSV ---------------------------------------------------------------------

def test_empty_series_header_only(tmp_path):
    emit_csv(DriftSeries("rk4", "rigid", 0.1, 0.4, ("Q1", "Q2")), tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == "t,Q1,Q2\n"


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=30))
def test_csv_round_trip_bit_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "s.csv"
    series = DriftSeries("m", "pendulum", 0.1, 0.4, ("H",), [(0.1 * i, (v,)) for i, v in enumerate(values)])
    emit_csv(series, path)
    back = [float(r[1]) for r in read_csv(path)[1:]]
    assert back == values


def test_csv_deterministic(tmp_path):
    series = drift_experiment("rigid", catalog("eq3"), 2**-6, 2.0, 0.1)
    emit_csv(series, tmp_path / "a.csv")
    emit_csv(drift_experiment("rigid", catalog("eq3"), 2**-6, 2.0, 0.1), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_csv_io_error_surfaces(tmp_path):
    with pytest.raises(OSError):
        emit_csv([], tmp_path / "missing" / "x.csv")
