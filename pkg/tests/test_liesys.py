import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spinlie import integrability, oracle, su2
from spinlie.exceptions import InvalidArgumentError
from spinlie.fields import ConstantField, Linear, PolarField, RotatingField, Sinusoid
from spinlie.liesys import (
    AGammaCurve,
    AxisZ,
    FixedDirection,
    GroupTrajectory,
    expm_fsys,
    fsys_matrix,
    generator_set,
    solve_fsys,
    solve_group_equation,
    transform_curve,
    vector_field_bracket,
)

EPS = np.zeros((3, 3, 3))
for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[i, j, k], EPS[j, i, k] = 1.0, -1.0

vec3 = st.tuples(*[st.floats(-5, 5)] * 3).map(np.array)


class Spin:
    """``t -> exp((0, 0, s w t))`` with its derivative, for transform tests."""

    def __init__(self, rate):
        self.rate = rate

    def coords(self, t):
        t = np.asarray(t, dtype=float)
        return su2.exp_coords(np.stack([0 * t, 0 * t, self.rate * t], axis=-1))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        h = 0.5 * self.rate * t
        z = 0 * t
        return 0.5 * self.rate * np.stack([-np.sin(h), z, np.cos(h), z], axis=-1)


# ---------------------------------------------------------------- matrices


def test_fsys_zero():
    assert np.array_equal(fsys_matrix([0, 0, 0], [0, 0, 0]), np.zeros((4, 4)))


def test_fsys_with_axis_target_matches_reduced_system():
    b1, b2, b3, D = 0.3, -1.1, 0.7, 2.5
    expected = 0.5 * np.array(
        [
            [0, -b2, -b3 + D, -b1],
            [b2, 0, -b1, b3 + D],
            [b3 - D, b1, 0, -b2],
            [b1, -b3 - D, b2, 0],
        ]
    )
    assert np.array_equal(fsys_matrix([b1, b2, b3], [0, 0, D]), expected)


@given(vec3, vec3)
def test_fsys_antisymmetric_and_decomposes(b, bp):
    M = fsys_matrix(b, bp)
    gs = generator_set()
    assert np.array_equal(M, -M.T)
    lin = np.einsum("k,kij->ij", b, gs.N) + np.einsum("k,kij->ij", bp, gs.Np)
    assert np.max(np.abs(M - lin)) < 1e-15 * max(1.0, np.max(np.abs(M)))


def test_fsys_batched():
    b = np.arange(6.0).reshape(2, 3)
    M = fsys_matrix(b, -b)
    assert M.shape == (2, 4, 4)
    assert np.array_equal(M[1], fsys_matrix(b[1], -b[1]))


def test_fsys_is_the_transformation_rule():
    """``x' = M x`` is ``dg/dt = -sum b'_k a_k g + sum b_k g a_k`` in coordinates."""
    rng = np.random.default_rng(0)
    for _ in range(20):
        b, bp = rng.normal(size=(2, 3))
        x = rng.normal(size=4)
        x /= np.linalg.norm(x)
        G = su2.to_matrix(x)
        rhs = -su2.algebra_matrix(bp) @ G + G @ su2.algebra_matrix(b)
        assert np.max(np.abs(su2.to_matrix(fsys_matrix(b, bp) @ x) - rhs)) < 1e-15


def test_generator_table():
    gs = generator_set()
    for a in range(3):
        for c in range(3):
            for mats in (gs.N, gs.Np):
                expected = -np.einsum("l,lij->ij", EPS[a, c], mats)
                assert np.max(np.abs(vector_field_bracket(mats[a], mats[c]) - expected)) < 1e-14
            assert np.max(np.abs(vector_field_bracket(gs.N[a], gs.Np[c]))) < 1e-14


def test_generators_square_to_minus_quarter():
    gs = generator_set()
    for m in gs.all():
        assert np.allclose(m @ m, -0.25 * np.eye(4), atol=0)


@given(vec3, vec3, st.floats(1e-4, 2.0))
@settings(max_examples=50)
def test_expm_fsys_matches_scipy(b, bp, h):
    E = expm_fsys(b, bp, h)
    assert np.max(np.abs(E - expm(h * fsys_matrix(b, bp)))) < 1e-12
    assert np.max(np.abs(E.T @ E - np.eye(4))) < 1e-14


# ---------------------------------------------------------------- group equation


def test_group_equation_constant_axis_exact():
    D = 0.8
    t = np.linspace(0, 10, 101)
    tr = solve_group_equation(ConstantField(0, 0, D), t)
    assert np.max(np.abs(tr.coords - su2.exp_coords(np.stack([0 * t, 0 * t, -D * t], axis=-1)))) < 1e-13


def test_group_equation_zero_field_identity():
    tr = solve_group_equation(ConstantField(0, 0, 0), np.linspace(0, 1, 11))
    assert np.array_equal(tr.coords, np.tile([1.0, 0, 0, 0], (11, 1)))


def test_group_equation_matches_rk4_defining_rep():
    f = RotatingField(1.0, math.pi / 3, 0.5)
    t = np.linspace(0, 10, 10001)
    tr = solve_group_equation(f, t)
    ref = oracle.rk4_propagate(f, 1, None, t)
    assert np.max(np.abs(tr.matrices() - ref.values)) < 1e-6
    assert np.max(np.abs(tr.first_integral() - 1)) < 1e-12


def test_group_equation_order_two():
    f = PolarField(Sinusoid(0.3, 1.0, 0.0, 1.0), 1.0, Linear(0.0, 0.7))
    ref = solve_group_equation(f, np.linspace(0, 2, 8193)).coords[-1]
    errs = [np.linalg.norm(solve_group_equation(f, np.linspace(0, 2, n + 1)).coords[-1] - ref) for n in (32, 64, 128, 256)]
    orders = oracle.observed_orders(errs)
    assert np.all(np.abs(orders - 2.0) < 0.3)


def test_trajectory_interpolation():
    t = np.linspace(0, 1, 11)
    tr = solve_group_equation(ConstantField(0, 0, 1.0), t)
    assert len(tr) == 11
    assert np.allclose(tr.at(0.35), su2.exp_coords([0, 0, -0.35]), atol=1e-14)
    assert isinstance(tr.element(3), su2.GroupElement)


# ---------------------------------------------------------------- transformation system


def test_fsys_equal_curves_identity():
    f = RotatingField(1.0, 0.4, 1.3)
    tr = solve_fsys(f, f, su2.IDENTITY, np.linspace(0, 5, 501))
    assert np.max(np.abs(tr.coords - [1, 0, 0, 0])) < 1e-14


def test_fsys_rejects_bad_initial_norm():
    with pytest.raises(InvalidArgumentError):
        solve_fsys(ConstantField(0, 0, 1), AxisZ(1.0), np.array([1.0, 1e-5, 0, 0]), np.linspace(0, 1, 3))


def test_fsys_composed_solution():
    b = PolarField(Sinusoid(0.5, 1.3, 0.0, 1.2), Sinusoid(0.4, 0.6, 0.1, 1.0), Linear(0.2, -0.9))
    target = FixedDirection((0.0, 0.6, 0.8), Sinusoid(0.7, 2.0, 0.3, 0.1))
    x0 = su2.exp_coords([0.4, 1.0, -0.3])
    t = np.linspace(0, 10, 10001)
    tr = solve_fsys(b, target, x0, t)
    g = solve_group_equation(b, t).coords
    gp = solve_group_equation(target.coefficients, t).coords
    composed = su2.compose_coords(su2.compose_coords(gp, x0), su2.inverse_coords(g))
    assert np.max(np.abs(tr.coords - composed)) < 1e-6
    assert np.max(np.abs(tr.first_integral() - 1)) < 1e-10


def test_fsys_stays_in_a_gamma_for_integrable_field():
    f = RotatingField(1.0, math.pi / 3, 0.5)
    gamma = math.pi / 2
    D = integrability.compute_D(1.0, math.pi / 3, gamma)
    tr = solve_fsys(f, AxisZ(D), su2.a_gamma_coords(gamma, 0.0), np.linspace(0, 10, 100001))
    assert np.max(np.abs(tr.coords[:, 2])) < 1e-8
    assert np.max(np.abs(tr.coords[:, 0] - math.cos(gamma / 2))) < 1e-8


def test_target_curves():
    assert np.allclose(AxisZ(2.0).coefficients(np.array([0.0, 1.0])), [[0, 0, 2], [0, 0, 2]])
    fd = FixedDirection((0.6, 0.0, 0.8), Linear(1.0, 1.0))
    assert np.allclose(fd.coefficients(1.0), [1.2, 0.0, 1.6])
    with pytest.raises(InvalidArgumentError):
        FixedDirection((1.0, 1.0, 0.0), 1.0)


# ---------------------------------------------------------------- transform_curve


def test_transform_by_identity():
    t = np.linspace(0, 3, 31)
    f = RotatingField(1.0, 0.8, 0.3)
    ident = GroupTrajectory(t, np.tile([1.0, 0, 0, 0], (t.size, 1)))
    out = transform_curve(f, ident, t)
    assert out.derivative == "numeric" and out.warning
    assert np.allclose(out.coefficients, f.cartesian(t), atol=1e-15)


def test_transform_into_rotating_frame():
    B, th, w, phi0 = 1.3, 0.9, 0.7, 0.2
    f = RotatingField(B, th, w, phi0)
    t = np.linspace(0, 5, 51)
    gbar = Spin(w)
    out = transform_curve(f, gbar, t)
    assert out.derivative == "analytic" and out.warning is None
    expected = [B * math.sin(th) * math.cos(phi0), B * math.sin(th) * math.sin(phi0), B * math.cos(th) - w]
    assert np.max(np.abs(out.coefficients - expected)) < 1e-14
    # residual of the transformation rule with an independent finite-difference derivative
    h = 1e-5
    G = su2.to_matrix(gbar.coords(t))
    Gdot = (su2.to_matrix(gbar.coords(t + h)) - su2.to_matrix(gbar.coords(t - h))) / (2 * h)
    lhs = Gdot @ np.conj(np.swapaxes(G, -1, -2))
    rhs = -su2.algebra_matrix(out.coefficients) + G @ su2.algebra_matrix(f.cartesian(t)) @ np.conj(np.swapaxes(G, -1, -2))
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_transform_by_connecting_curve():
    f = RotatingField(1.0, math.pi / 3, 0.5)
    t = np.linspace(0, 10, 1001)
    curve = integrability.connecting_curve(f, math.pi / 2)
    assert isinstance(curve, AGammaCurve)
    out = transform_curve(f, curve, t).coefficients
    D = integrability.compute_D(1.0, math.pi / 3, math.pi / 2)
    assert np.max(np.abs(out[:, :2])) < 1e-8
    assert np.max(np.abs(out[:, 2] - D)) < 1e-8


def test_transform_of_numeric_trajectory_is_second_order():
    f = RotatingField(1.0, math.pi / 3, 0.5)
    t = np.linspace(0, 10, 2001)
    curve = integrability.connecting_curve(f, math.pi / 2)
    traj = GroupTrajectory(t, curve.coords(t))
    out = transform_curve(f, traj, t).coefficients
    # edge-order-2 differences; error ~ h^2 * |phi_dot|^3
    assert np.max(np.abs(out[:, :2])) < 1e-4
    with pytest.raises(InvalidArgumentError):
        transform_curve(f, traj, t[:-1])
