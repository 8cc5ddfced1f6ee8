import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from spinlie.exceptions import InvalidArgumentError
from spinlie.fields import ConstantField, Linear, PolarField, RotatingField, Sinusoid
from spinlie.oracle import (
    PropagationResult,
    compare,
    flow_commutator_defect,
    observed_orders,
    rk4_propagate,
    unitary_midpoint_propagate,
)
from spinlie.spinrep import build_spin_operators

ROT = RotatingField(1.0, math.pi / 3, 0.5)
SMOOTH = PolarField(Sinusoid(0.4, 1.3, 0.0, 1.0), Sinusoid(0.3, 0.8, 0.2, 1.1), Linear(0.0, 0.6))


def solve_ivp_reference(field, j, psi0, times):
    ops = build_spin_operators(j)

    def rhs(t, y):
        psi = y[: ops.dim] + 1j * y[ops.dim :]
        d = -1j * ops.dot(field.cartesian(t)) @ psi
        return np.concatenate([d.real, d.imag])

    psi0 = np.asarray(psi0, dtype=complex)
    sol = solve_ivp(rhs, (times[0], times[-1]), np.concatenate([psi0.real, psi0.imag]), t_eval=times, rtol=1e-12, atol=1e-12, method="DOP853")
    return (sol.y[: ops.dim] + 1j * sol.y[ops.dim :]).T


def test_rk4_matches_solve_ivp():
    t = np.linspace(0, 5, 5001)
    psi0 = np.array([0.6, 0.8j])
    rk = rk4_propagate(SMOOTH, "1/2", psi0, t)
    assert np.max(np.abs(rk.values - solve_ivp_reference(SMOOTH, "1/2", psi0, t))) < 1e-9


def test_midpoint_matches_solve_ivp_spin_one():
    t = np.linspace(0, 5, 20001)
    psi0 = np.array([0, 1, 0], dtype=complex)
    mid = unitary_midpoint_propagate(SMOOTH, 1 * 2, t, psi0)
    assert np.max(np.abs(mid.values - solve_ivp_reference(SMOOTH, 2, psi0, t))) < 1e-6


def test_constant_field_exact():
    f = ConstantField(0.0, 0.0, 2.0)
    t = np.linspace(0, 3, 31)
    expected = np.stack([np.exp(-1j * t), np.zeros_like(t)], axis=-1)
    mid = unitary_midpoint_propagate(f, 1, t, [1, 0])
    assert np.max(np.abs(mid.values - expected)) < 1e-14


def test_operator_mode_shapes():
    t = np.linspace(0, 1, 11)
    r = rk4_propagate(ROT, 3, None, t)
    assert r.operator_mode and r.values.shape == (11, 4, 4)
    assert np.array_equal(r.values[0], np.eye(4))


def test_initial_state_checked():
    with pytest.raises(InvalidArgumentError):
        rk4_propagate(ROT, 1, [1, 1], np.linspace(0, 1, 3))
    with pytest.raises(InvalidArgumentError):
        unitary_midpoint_propagate(ROT, 1, np.array([0.0, 0.0, 1.0]), [1, 0])


def test_orders_rk4_and_midpoint():
    T = 2.0
    ref = solve_ivp_reference(SMOOTH, 1, [1, 0], np.array([0.0, T]))[-1]
    e_rk, e_mid = [], []
    for n in (25, 50, 100, 200):
        t = np.linspace(0, T, n + 1)
        e_rk.append(np.linalg.norm(rk4_propagate(SMOOTH, 1, [1, 0], t).final - ref))
        e_mid.append(np.linalg.norm(unitary_midpoint_propagate(SMOOTH, 1, t, [1, 0]).final - ref))
    assert np.all((observed_orders(e_rk) > 3.7) & (observed_orders(e_rk) < 4.3))
    assert np.all((observed_orders(e_mid) > 1.7) & (observed_orders(e_mid) < 2.3))


def test_midpoint_norm_conservation_long_run():
    t = np.linspace(0, 10, 100001)
    r = unitary_midpoint_propagate(SMOOTH, 3, t, np.array([0.5, 0.5, 0.5, 0.5], dtype=complex))
    assert r.norm_drift < 1e-12


def test_compare_identical_and_phase():
    t = np.linspace(0, 1, 11)
    r = unitary_midpoint_propagate(ROT, 1, t, [1, 0])
    m = compare(r, r)
    assert m.max_state_error == 0 and m.infidelity < 1e-15 and m.unitarity_defect < 1e-15
    coarse = rk4_propagate(ROT, 1, [1, 0], t)
    m = compare(coarse, coarse)
    assert m.infidelity < 1e-15 and m.unitarity_defect > 0
    shifted = PropagationResult(t, np.exp(0.7j) * r.values, "phase", r.step, r.norm_drift)
    m = compare(r, shifted)
    assert m.max_state_error > 0.1
    assert m.infidelity < 1e-15


def test_compare_operator_mode():
    t = np.linspace(0, 1, 11)
    a = rk4_propagate(ROT, 2, None, t)
    m = compare(a, PropagationResult(t, 1j * a.values, "phase", a.step, 0.0))
    assert m.infidelity < 1e-14 and m.max_operator_error > 0.5
    assert set(m.as_dict()) == {"max_state_error", "infidelity", "max_operator_error", "unitarity_defect"}


def test_compare_grid_mismatch():
    a = rk4_propagate(ROT, 1, [1, 0], np.linspace(0, 1, 11))
    b = rk4_propagate(ROT, 1, [1, 0], np.linspace(0, 1, 21))
    with pytest.raises(InvalidArgumentError):
        compare(a, b)


@pytest.mark.parametrize("dim,seed", [(2, 0), (3, 1), (4, 2)])
def test_flow_commutator_second_order(dim, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    B = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    A, B = A + A.conj().T, B + B.conj().T
    errs = [flow_commutator_defect(A, B, t) for t in (0.02, 0.01, 0.005)]
    assert np.all(np.abs(observed_orders(errs) - 2.0) < 0.3)


def test_nonfinite_field_aborts():
    f = PolarField(Linear(0.0, 1e308), 1.0, 0.0)
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(InvalidArgumentError):
        rk4_propagate(f, 1, [1, 0], np.linspace(0, 10, 3))
