import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbvm.problems import (KDV, NLSE, PROBLEMS, SINE_GORDON, ErrorAccumulator,
                           convergence_rate, get_problem, initial_state, kdv_exact,
                           measure_errors, nlse_exact, periodic_wrap, sine_gordon_exact,
                           sine_gordon_velocity)


def test_exact_examples():
    assert sine_gordon_exact(0.0, 100.0) == pytest.approx(4 * math.atan(100.0))
    assert sine_gordon_exact(3.0, 0.0) == 0.0
    assert sine_gordon_velocity(0.0, 0.0) == 4.0
    u, v = nlse_exact(0.0, 0.0)
    assert (u, v) == (1.0, 0.0)
    assert kdv_exact(0.0, 0.0) == pytest.approx(1.0)
    # far tails do not overflow
    assert sine_gordon_exact(800.0, 1.0) == 0.0


def test_nlse_modulus():
    x = np.linspace(-40, 80, 601)
    for t in (0.0, 3.3, 10.0):
        u, v = nlse_exact(x, t)
        assert np.all(u * u + v * v <= 1.0 + 1e-15)


def test_wrap_examples():
    assert periodic_wrap(6.0, -3.0, 5.0) == pytest.approx(-2.0)
    assert periodic_wrap(-4.0, -3.0, 5.0) == pytest.approx(4.0)
    assert periodic_wrap(1.25, -3.0, 5.0) == 1.25
    assert periodic_wrap(21.0, -3.0, 5.0) == pytest.approx(-3.0)


@given(st.floats(-1e3, 1e3))
def test_wrap_idempotent(xi):
    w = periodic_wrap(xi, -3.0, 5.0)
    assert -3.0 <= w <= 5.0
    assert periodic_wrap(w, -3.0, 5.0) == w
    k = (xi - w) / 8.0
    assert abs(k - round(k)) < 1e-9


def test_kdv_time_periodic():
    x = KDV.basis().x
    assert np.max(np.abs(kdv_exact(x, 24.0) - kdv_exact(x, 0.0))) < 1e-12


def fd2(f, z, h):
    return (f(z + h) - 2 * f(z) + f(z - h)) / h**2


@pytest.mark.parametrize("x,t", [(0.3, 0.7), (-2.0, 5.0), (1.5, 50.0)])
def test_sine_gordon_pde(x, t):
    h = 1e-3
    utt = fd2(lambda s: sine_gordon_exact(x, s), t, h)
    uxx = fd2(lambda s: sine_gordon_exact(s, t), x, h)
    assert utt - uxx + math.sin(sine_gordon_exact(x, t)) == pytest.approx(0.0, abs=1e-5)


@pytest.mark.parametrize("x,t", [(0.3, 0.2), (9.0, 2.5)])
def test_nlse_pde(x, t):
    psi = lambda x, t: complex(*nlse_exact(x, t))
    h = 1e-4
    pt = (psi(x, t + h) - psi(x, t - h)) / (2 * h)
    pxx = (psi(x + h, t) - 2 * psi(x, t) + psi(x - h, t)) / h**2
    p = psi(x, t)
    assert abs(pt - 1j * (pxx + 2 * abs(p) ** 2 * p)) < 1e-5


@pytest.mark.parametrize("x,t", [(0.1, 0.5), (4.0, 20.0)])
def test_kdv_pde(x, t):
    eps = KDV.params["eps"]
    h = 1e-3
    u = lambda z: kdv_exact(z, t)
    ut = (kdv_exact(x, t + h) - kdv_exact(x, t - h)) / (2 * h)
    ux = (u(x + h) - u(x - h)) / (2 * h)
    uxxx = (u(x + 2 * h) - 2 * u(x + h) + 2 * u(x - h) - u(x - 2 * h)) / (2 * h**3)
    assert ut + eps * uxxx + u(x) * ux == pytest.approx(0.0, abs=1e-4)


def test_registry():
    assert get_problem("sg") is SINE_GORDON
    assert get_problem("NLS") is NLSE
    assert get_problem("sine_gordon") is SINE_GORDON
    assert set(PROBLEMS) == {"sine-gordon", "nlse", "kdv"}
    with pytest.raises(KeyError):
        get_problem("burgers")


@pytest.mark.parametrize("problem", list(PROBLEMS.values()), ids=list(PROBLEMS))
def test_initial_projection(problem):
    init = initial_state(problem)
    assert init.residual <= 1e-12
    assert init.y0.shape == (init.system.dim,)


def test_invariant_values():
    init = initial_state(NLSE)
    inv = init.system.invariants(init.y0)
    assert inv["M1"] == pytest.approx(2.0, abs=1e-12)
    assert init.system.hamiltonian(init.y0) == pytest.approx(11 / 3, abs=1e-10)
    sg = initial_state(SINE_GORDON)
    assert sg.system.hamiltonian(sg.y0) == pytest.approx(16.0, abs=1e-10)


def test_measure_errors_trivial():
    init = initial_state(SINE_GORDON, N=64, m=129)
    traj = [(0.0, init.y0)] * 3
    rep = measure_errors(traj, SINE_GORDON, init.system)
    assert rep.steps == 2 and rep.e_H == 0.0
    assert rep.e_1 is None and rep.e_2 is None
    rep = measure_errors([(0.0, init.y0)], NLSE, initial_state(NLSE, 64, 129).system)
    assert rep.e_1 == 0.0


def test_accumulator_keeps_max():
    init = initial_state(KDV, N=32, m=97)
    acc = ErrorAccumulator(KDV, init.system, init.y0)
    acc.update(1.0, init.y0)  # stale state: the soliton has moved
    big = acc.report.e_u
    acc.update(0.0, init.y0)
    assert acc.report.e_u == big > 0.1 and acc.report.steps == 2


def test_convergence_rate():
    assert convergence_rate(16.0, 1.0, 100, 200) == pytest.approx(4.0)
