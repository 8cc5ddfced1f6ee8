import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spinlie import fields, su2
from spinlie.exceptions import BranchError, InvalidArgumentError
from spinlie.spinrep import (
    SpinQuantumNumber,
    basis_state,
    build_spin_operators,
    exp_hermitian,
    hamiltonian_at,
    represent,
    unitarity_defect,
)

SPINS = [1, 2, 3, 4, 5, 9]
EPS = np.zeros((3, 3, 3))
for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[i, j, k], EPS[j, i, k] = 1.0, -1.0


def test_parse_forms():
    assert SpinQuantumNumber.parse(1).j == 0.5
    assert SpinQuantumNumber.parse("3/2").two_j == 3
    assert SpinQuantumNumber.parse("1").dim == 3
    assert str(SpinQuantumNumber.parse(4)) == "2"


@pytest.mark.parametrize("bad", [0, -1, "1/3", "x", True, 1.5])
def test_parse_rejects(bad):
    with pytest.raises(InvalidArgumentError):
        SpinQuantumNumber.parse(bad)


def test_spin_half_is_pauli_over_two():
    ops = build_spin_operators("1/2")
    assert np.array_equal(ops.Sx, 0.5 * np.array([[0, 1], [1, 0]]))
    assert np.array_equal(ops.Sy, 0.5 * np.array([[0, -1j], [1j, 0]]))
    assert np.array_equal(ops.Sz, 0.5 * np.diag([1, -1]))


def test_spin_one_sz():
    ops = build_spin_operators(2)
    assert np.array_equal(ops.Sz, np.diag([1.0, 0.0, -1.0]))
    assert ops.m_values.tolist() == [1.0, 0.0, -1.0]


@pytest.mark.parametrize("two_j", SPINS)
def test_hermitian_commutation_casimir(two_j):
    ops = build_spin_operators(two_j)
    iS = 1j * ops.vector
    for S in ops.vector:
        assert np.max(np.abs(S - S.conj().T)) < 1e-14
    for a in range(3):
        for b in range(3):
            comm = iS[a] @ iS[b] - iS[b] @ iS[a]
            assert np.max(np.abs(comm + np.einsum("l,lij->ij", EPS[a, b], iS))) < 1e-12
    j = two_j / 2
    cas = sum(S @ S for S in ops.vector)
    assert np.max(np.abs(cas - j * (j + 1) * np.eye(ops.dim))) < 1e-12


def test_operators_read_only():
    ops = build_spin_operators(3)
    with pytest.raises(ValueError):
        ops.Sx[0, 0] = 1.0


def test_hamiltonian_examples():
    ops = build_spin_operators(1)
    assert np.array_equal(hamiltonian_at(fields.ConstantField(0, 0, 0), 0.0, ops), np.zeros((2, 2)))
    assert np.allclose(hamiltonian_at(fields.ConstantField(0, 0, 3.0), 1.0, ops), np.diag([1.5, -1.5]))
    f = fields.RotatingField(1.0, math.pi / 3, 0.5)
    H = hamiltonian_at(f, 0.0, ops)
    assert np.allclose(H, math.sin(math.pi / 3) * ops.Sx + math.cos(math.pi / 3) * ops.Sz, atol=1e-16)
    stack = hamiltonian_at(f, np.linspace(0, 1, 5), ops)
    assert stack.shape == (5, 2, 2)


def test_exp_hermitian_examples():
    ops = build_spin_operators(1)
    assert np.allclose(exp_hermitian(ops.Sz, 0.0), np.eye(2), atol=0)
    th = 1.3
    assert np.allclose(exp_hermitian(ops.Sz, th), np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]), atol=1e-15)
    n = np.array([1.0, -2.0, 0.5])
    n /= np.linalg.norm(n)
    sigma = 2 * ops.vector
    expected = math.cos(th / 2) * np.eye(2) - 1j * math.sin(th / 2) * np.einsum("k,kij->ij", n, sigma)
    assert np.max(np.abs(exp_hermitian(ops.dot(n), th) - expected)) < 1e-14


def test_exp_hermitian_stacked_steps():
    ops = build_spin_operators(3)
    H = np.stack([ops.Sx, ops.Sy + ops.Sz])
    U = exp_hermitian(H, np.array([0.2, 0.7]))
    assert np.allclose(U[0], expm(-0.2j * ops.Sx), atol=1e-13)
    assert np.allclose(U[1], expm(-0.7j * (ops.Sy + ops.Sz)), atol=1e-13)


def test_exp_hermitian_rejects_non_hermitian():
    with pytest.raises(InvalidArgumentError):
        exp_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_exp_hermitian_unitary_and_matches_expm(two_j, seed):
    rng = np.random.default_rng(seed)
    d = two_j + 1
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = A + A.conj().T
    U = exp_hermitian(H, 0.9)
    assert unitarity_defect(U) < 1e-10
    assert np.max(np.abs(U - expm(-0.9j * H))) < 1e-10


def test_represent_identity_and_defining():
    for two_j in SPINS:
        ops = build_spin_operators(two_j)
        assert np.allclose(represent(su2.IDENTITY, ops), np.eye(ops.dim), atol=0)
    ops = build_spin_operators(1)
    rng = np.random.default_rng(3)
    for q in rng.normal(size=(50, 4)):
        g = su2.GroupElement.from_vector(q, normalize=True)
        assert np.max(np.abs(represent(g, ops) - g.matrix())) < 1e-13


def test_represent_spin_one_rotation_about_z():
    th = 0.8
    U = represent(su2.exp_coords([0, 0, th]), build_spin_operators(2))
    assert np.allclose(U, np.diag([np.exp(1j * th), 1.0, np.exp(-1j * th)]), atol=1e-15)


@pytest.mark.parametrize("two_j", [1, 2, 3, 4])
def test_represent_is_multiplicative(two_j):
    ops = build_spin_operators(two_j)
    rng = np.random.default_rng(two_j)
    for _ in range(50):
        c, d = rng.normal(size=(2, 3))
        # keep |log g1| + |log g2| < 2 pi
        c *= rng.uniform(0, 3.0) / np.linalg.norm(c)
        d *= rng.uniform(0, 3.0) / np.linalg.norm(d)
        g, h = su2.exp_coords(c), su2.exp_coords(d)
        lhs = represent(su2.compose_coords(g, h), ops)
        assert np.max(np.abs(lhs - represent(g, ops) @ represent(h, ops))) < 1e-10


def test_represent_minus_identity_is_branch_error():
    with pytest.raises(BranchError):
        represent(np.array([-1.0, 0, 0, 0]), build_spin_operators(1))


def test_basis_state():
    ops = build_spin_operators(2)
    assert basis_state(ops, 2).tolist() == [0, 0, 1]
