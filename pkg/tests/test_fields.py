import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlie.exceptions import DegenerateFieldError, InvalidArgumentError, RangeError
from spinlie.fields import (
    CartesianTable,
    Const,
    ConstantField,
    Linear,
    PolarField,
    RotatingField,
    Sinusoid,
    Table,
    as_program,
    eval_cartesian,
    phi_dot,
    time_grid,
    to_polar_track,
)


# ---------------------------------------------------------------- programs


def test_program_values_and_derivatives():
    s = Sinusoid(2.0, 3.0, 0.5, 1.0)
    t = np.array([0.0, 0.4, 1.7])
    assert np.allclose(s(t), 2 * np.sin(3 * t + 0.5) + 1)
    assert np.allclose(s.derivative(t), 6 * np.cos(3 * t + 0.5))
    # antiderivative from 0, checked by differentiating numerically
    h = 1e-5
    assert np.allclose((s.antiderivative(t + h) - s.antiderivative(t - h)) / (2 * h), s(t), atol=1e-8)
    assert s.antiderivative(0.0) == pytest.approx(0.0)
    lin = Linear(1.0, -2.0)
    assert lin(3.0) == -5.0 and lin.derivative(3.0) == -2.0
    assert lin.antiderivative(2.0) == pytest.approx(2.0 - 4.0)
    assert Const(4.0)(np.zeros(3)).tolist() == [4.0, 4.0, 4.0]
    assert Const(4.0).is_constant() and not lin.is_constant()


def test_as_program_dicts_round_trip():
    for p in (Const(1.5), Linear(0.1, 2.0), Sinusoid(1, 2, 3, 4), Table([0, 1, 2], [0, 1, 0])):
        q = as_program(p.to_dict())
        t = np.linspace(0, 2, 7)
        assert np.array_equal(p(t), q(t))
    assert as_program(2)(0.3) == 2.0


@pytest.mark.parametrize("bad", [{"kind": "cubic"}, {"kind": "linear", "v0": 1}, "x", True, {"kind": "const", "value": float("nan")}])
def test_as_program_rejects(bad):
    with pytest.raises(InvalidArgumentError):
        as_program(bad)


def test_table_program_range_and_order():
    tab = Table([0.0, 1.0, 3.0], [0.0, 2.0, 0.0])
    assert tab(2.0) == pytest.approx(1.0)
    with pytest.raises(RangeError):
        tab(3.5)
    with pytest.raises(InvalidArgumentError):
        Table([0.0, 0.0, 1.0], [1, 2, 3])


# ---------------------------------------------------------------- specs


def test_rotating_example_at_zero():
    b = eval_cartesian(RotatingField(1.0, math.pi / 3, 0.5), 0.0)
    assert np.allclose(b, [math.sqrt(3) / 2, 0.0, 0.5], atol=1e-16)


def test_constant_zero_field():
    assert np.array_equal(eval_cartesian(ConstantField(0, 0, 0), 12.3), np.zeros(3))


def test_polar_equatorial_rotation():
    w = 0.7
    f = PolarField(1.0, math.pi / 2, Linear(0.0, w))
    t = np.linspace(0, 5, 11)
    expected = np.stack([np.cos(w * t), np.sin(w * t), np.zeros_like(t)], axis=-1)
    assert np.allclose(eval_cartesian(f, t), expected, atol=1e-15)


@pytest.mark.parametrize(
    "kwargs", [dict(B=-1.0, theta=0.5, omega=1.0), dict(B=1.0, theta=3.5, omega=1.0), dict(B=1.0, theta=0.5, omega=np.inf)]
)
def test_rotating_invariants(kwargs):
    with pytest.raises(InvalidArgumentError):
        RotatingField(**kwargs)


def test_rotating_accepts_closed_theta_interval():
    RotatingField(1.0, 0.0, 1.0)
    RotatingField(1.0, math.pi, 1.0)


def test_table_interpolation_and_range():
    f = CartesianTable([0.0, 1.0], [[0, 0, 0], [2, 4, 6]])
    assert np.allclose(eval_cartesian(f, 0.25), [0.5, 1.0, 1.5])
    with pytest.raises(RangeError):
        eval_cartesian(f, 1.5)
    with pytest.raises(InvalidArgumentError):
        CartesianTable([1.0, 0.0], [[0, 0, 1], [0, 0, 1]])


def test_time_grid_counts_intervals():
    g = time_grid(0.0, 10.0, 4)
    assert g.tolist() == [0.0, 2.5, 5.0, 7.5, 10.0]


# ---------------------------------------------------------------- polar decomposition


def test_rotating_track():
    f = RotatingField(2.0, 1.1, 0.5, 0.3)
    t = np.linspace(0, 30, 301)
    tr = to_polar_track(f, t)
    assert np.allclose(tr.B, 2.0) and np.allclose(tr.theta, 1.1)
    assert np.allclose(tr.phi, 0.5 * t + 0.3, atol=1e-14)
    assert not tr.degenerate.any()


def test_constant_along_z_is_degenerate():
    tr = to_polar_track(ConstantField(0, 0, 1), np.linspace(0, 1, 5))
    assert np.allclose(tr.B, 1.0) and np.allclose(tr.theta, 0.0)
    assert tr.all_degenerate


def test_zero_field_raises():
    with pytest.raises(DegenerateFieldError):
        to_polar_track(ConstantField(0, 0, 0), np.linspace(0, 1, 5))


def test_full_turn_unwrapped():
    """Oracle: dense unwrapped atan2 of a sampled table."""
    w = 1.0
    dense = np.linspace(0, 2 * math.pi / w, 4001)
    samples = np.stack([np.cos(w * dense), np.sin(w * dense), 0.2 + 0 * dense], axis=-1)
    tab = CartesianTable(dense, samples)
    grid = np.linspace(0, 2 * math.pi / w, 101)
    tr = to_polar_track(tab, grid)
    assert tr.phi[-1] == pytest.approx(2 * math.pi, abs=1e-9)
    assert np.max(np.abs(np.diff(tr.phi))) < math.pi
    oracle = np.unwrap(np.arctan2(samples[:, 1], samples[:, 0]))[::40]
    assert np.allclose(tr.phi, oracle, atol=1e-12)


def test_degenerate_samples_carry_previous_azimuth():
    # transverse part passes through zero at t = 1
    t = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    s = np.array([[1, 1, 1], [0.5, 0.5, 1], [0, 0, 1], [-0.5, -0.5, 1], [-1, -1, 1]], dtype=float)
    tr = to_polar_track(CartesianTable(t, s), t)
    assert tr.degenerate.tolist() == [False, False, True, False, False]
    assert tr.phi[2] == tr.phi[1]


@given(
    st.floats(0.1, 3.0), st.floats(0.05, 3.0), st.floats(-2.0, 2.0), st.floats(-3.0, 3.0),
    st.floats(0.0, 1.0), st.floats(0.1, 2.0),
)
@settings(max_examples=40)
def test_round_trip_cartesian(B0, th0, w, phase, amp, freq):
    f = PolarField(Sinusoid(0.3 * amp, freq, 0.0, B0 + 0.3), Const(min(th0, 3.0)), Linear(phase, w))
    t = np.linspace(0, 5, 51)
    tr = to_polar_track(f, t)
    ok = ~tr.degenerate
    assert np.max(np.abs(tr.cartesian()[ok] - eval_cartesian(f, t)[ok])) < 1e-10


def test_round_trip_on_table():
    rng = np.random.default_rng(5)
    t = np.linspace(0, 1, 40)
    tab = CartesianTable(t, rng.normal(size=(40, 3)))
    tr = to_polar_track(tab, np.linspace(0, 1, 333))
    ok = ~tr.degenerate
    assert np.max(np.abs(tr.cartesian()[ok] - eval_cartesian(tab, tr.times)[ok])) < 1e-10
    assert np.all((tr.theta >= 0) & (tr.theta <= math.pi))


# ---------------------------------------------------------------- phi_dot


def test_phi_dot_rotating_is_omega():
    f = RotatingField(1.0, math.pi / 3, 0.5)
    assert np.allclose(phi_dot(f, np.linspace(0, 9, 10)), 0.5, atol=0)


def test_phi_dot_constant_direction_is_zero():
    assert phi_dot(ConstantField(1.0, 2.0, 0.3), 4.0) == 0.0


def test_phi_dot_finite_difference_matches_analytic():
    f = PolarField(1.0, 1.0, Sinusoid(0.8, 1.7, 0.1, 0.0))
    t = np.linspace(0, 6, 25)
    exact = phi_dot(f, t, method="analytic")
    assert np.allclose(exact, 0.8 * 1.7 * np.cos(1.7 * t + 0.1), atol=1e-15)
    assert np.max(np.abs(phi_dot(f, t, method="fd") - exact)) < 1e-7


def test_phi_dot_on_table_uses_differences():
    w = 0.9
    dense = np.linspace(0, 4, 4001)
    tab = CartesianTable(dense, np.stack([np.cos(w * dense), np.sin(w * dense), 0 * dense], axis=-1))
    assert phi_dot(tab, 2.0) == pytest.approx(w, rel=1e-5)
    with pytest.raises(InvalidArgumentError):
        phi_dot(tab, 2.0, method="analytic")


def test_phi_dot_degenerate_raises():
    with pytest.raises(DegenerateFieldError):
        phi_dot(ConstantField(0, 0, 2.0), 0.0)
