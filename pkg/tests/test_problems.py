import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, strategies as st

from psrk.integrate import integrate
from psrk.problems import (
    PENDULUM_H0,
    RIGID_M,
    complete_elliptic_k,
    get_problem,
    hamiltonian,
    jacobi_elliptic,
    pendulum_initial,
    pendulum_rhs,
    pendulum_system,
    quadratic_invariants,
    rigid_body_exact,
    rigid_body_period,
    rigid_body_rhs,
)
from psrk.tableau import catalog


def test_rigid_rhs_examples():
    np.testing.assert_array_equal(rigid_body_rhs([12.0, 0.0, 7.0]), [0.0, 84.0, 0.0])
    # -w1 w2 / 3 vanishes at w1 = 0.
    np.testing.assert_allclose(rigid_body_rhs([0.0, 12.0, 1.0]), [-12.0, 0.0, 0.0])


def test_invariant_examples():
    assert quadratic_invariants([12.0, 0.0, 7.0]) == (144.0, 147.0)
    assert quadratic_invariants([0.0, 12.0, 1.0]) == (144.0, 147.0)
    assert quadratic_invariants([0.0, 0.0, 0.0]) == (0.0, 0.0)


@given(st.lists(st.floats(-20, 20), min_size=3, max_size=3))
def test_invariants_constant_along_flow(w):
    w = np.array(w)
    f = rigid_body_rhs(w)
    eps = 1e-6
    for k in range(2):
        fd = (quadratic_invariants(w + eps * f)[k] - quadratic_invariants(w - eps * f)[k]) / (2 * eps)
        assert abs(fd) < 1e-12 * max(1.0, float(w @ w)) ** 1.5 / eps


def test_invariants_exact_derivative():
    w = np.array([1.3, -2.1, 0.4])
    w1, w2, w3 = w
    f = rigid_body_rhs(w)
    assert 2 * w1 * f[0] + 2 * w2 * f[1] == 0.0
    assert abs(2 * w2 * f[1] + 6 * w3 * f[2]) < 1e-15


def test_elliptic_k():
    assert complete_elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert 1.9109 <= 4 * complete_elliptic_k(RIGID_M) / 7 < 1.9110
    assert rigid_body_period() == pytest.approx(4 * scipy.special.ellipk(RIGID_M) / 7, rel=1e-14)
    assert complete_elliptic_k(0.5) < complete_elliptic_k(0.9)
    for m in (0.1, 0.5, 0.9, RIGID_M, 0.999):
        assert complete_elliptic_k(m) == pytest.approx(scipy.special.ellipk(m), rel=1e-14)
    for bad in (1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            complete_elliptic_k(bad)


def test_jacobi_examples():
    assert jacobi_elliptic(0.0, 0.7) == (0.0, 1.0, 1.0)
    for u in (0.3, 1.7, -2.2):
        sn, cn, dn = jacobi_elliptic(u, 0.0)
        assert (sn, cn, dn) == (pytest.approx(math.sin(u), abs=1e-14), pytest.approx(math.cos(u), abs=1e-14), 1.0)
    K = complete_elliptic_k(RIGID_M)
    assert abs(jacobi_elliptic(K, RIGID_M)[0] - 1) < 1e-12
    with pytest.raises(ValueError):
        jacobi_elliptic(0.1, 1.0)


@pytest.mark.parametrize("m", [0.0, 0.2, 0.6, 0.9, RIGID_M])
def test_jacobi_against_scipy(m):
    K = complete_elliptic_k(m)
    for u in np.linspace(-4 * K, 4 * K, 41):
        ours = jacobi_elliptic(float(u), m)
        ref = scipy.special.ellipj(u, m)[:3]
        np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-13)


@given(st.floats(-30, 30), st.floats(0, 0.999))
def test_jacobi_identities(u, m):
    sn, cn, dn = jacobi_elliptic(u, m)
    assert abs(sn * sn + cn * cn - 1) < 1e-12
    assert abs(dn * dn + m * sn * sn - 1) < 1e-12


def test_exact_solution():
    np.testing.assert_allclose(rigid_body_exact(0.0), [12.0, 0.0, 7.0], atol=1e-15)
    np.testing.assert_allclose(rigid_body_exact(rigid_body_period()), [12.0, 0.0, 7.0], atol=1e-10)
    for t in np.linspace(0, 5, 23):
        q1, q2 = quadratic_invariants(rigid_body_exact(t))
        assert abs(q1 - 144) < 1e-11 and abs(q2 - 147) < 1e-11


def test_exact_solution_satisfies_ode():
    errs = []
    for eps in (1e-3, 1e-4):
        worst = 0.0
        for t in (0.1, 0.7, 1.3):
            fd = (rigid_body_exact(t + eps) - rigid_body_exact(t - eps)) / (2 * eps)
            f = rigid_body_rhs(rigid_body_exact(t))
            worst = max(worst, np.max(np.abs(fd - f)) / np.max(np.abs(f)))
        errs.append(worst)
    assert errs[1] < 1e-6
    assert errs[0] / errs[1] > 50  # quadratic in the difference step


def test_hamiltonian_examples():
    assert hamiltonian(pendulum_initial()) == pytest.approx(PENDULUM_H0, abs=1e-15)
    assert hamiltonian((math.pi / 2, 0.6)) == pytest.approx(0.18, abs=1e-15)
    assert hamiltonian((0.0, 0.0)) == -1.0


def _fd_rhs(x, p, eps=1e-6):
    dHdp = (hamiltonian((x, p + eps)) - hamiltonian((x, p - eps))) / (2 * eps)
    dHdx = (hamiltonian((x + eps, p)) - hamiltonian((x - eps, p))) / (2 * eps)
    return np.array([dHdp, -dHdx])


def test_pendulum_rhs_examples():
    x0, _ = pendulum_initial()
    np.testing.assert_allclose(pendulum_rhs(0.0, pendulum_initial()), [-0.8 / 6, -0.6], atol=1e-15)
    np.testing.assert_allclose(pendulum_rhs(0.0, (0.0, 0.0)), [1 / 6, 0.0], atol=1e-15)
    np.testing.assert_allclose(pendulum_rhs(0.0, (x0, 0.0)), _fd_rhs(x0, 0.0), atol=1e-9)


@given(st.floats(-7, 7), st.floats(-3, 3))
def test_pendulum_rhs_is_hamiltonian(x, p):
    f = pendulum_rhs(0.0, (x, p))
    np.testing.assert_allclose(f, _fd_rhs(x, p), atol=1e-8)
    grad = np.array([-f[1], f[0]])  # (dH/dx, dH/dp)
    assert abs(grad @ f) < 1e-12


def test_pendulum_level_set():
    sys, x0 = pendulum_system(), pendulum_initial()
    recs = integrate(sys, catalog("gl4"), 0.0, x0, 0.005, 2000, sample_every=20)
    assert max(abs(r.invariants["H"] - 0.8) for r in recs) < 1e-10


def test_get_problem():
    sys, x0 = get_problem("rigid")
    assert sys.dim == 3 and list(x0) == [12.0, 0.0, 7.0]
    sys, x0 = get_problem("pendulum")
    assert set(sys.invariants) == {"H"}
    with pytest.raises(ValueError):
        get_problem("kepler")
