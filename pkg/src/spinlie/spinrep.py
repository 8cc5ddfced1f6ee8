"""Spin-j representations, Hamiltonian assembly and unitary exponentials.

Units have hbar = 1. The group acts on states through
``exp(c . a) -> exp(i c . S)``; for ``j = 1/2`` this is the defining
representation, since ``a_k = i sigma_k / 2 = i S_k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import su2
from .exceptions import InvalidArgumentError

__all__ = [
    "SpinQuantumNumber",
    "SpinOperators",
    "build_spin_operators",
    "hamiltonian_at",
    "exp_hermitian",
    "represent",
    "unitarity_defect",
    "basis_state",
]

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class SpinQuantumNumber:
    """Spin quantum number ``j = two_j / 2``."""

    two_j: int

    def __post_init__(self):
        if int(self.two_j) != self.two_j or self.two_j < 1:
            raise InvalidArgumentError(f"two_j must be a positive integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @classmethod
    def parse(cls, value) -> "SpinQuantumNumber":
        """Accept an existing instance, an integer ``two_j``, or a string ``j`` such as ``"3/2"``."""
        if isinstance(value, SpinQuantumNumber):
            return value
        if isinstance(value, bool):
            raise InvalidArgumentError("spin must be an integer two_j or a fraction string")
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, str):
            try:
                j = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidArgumentError(f"cannot parse spin {value!r}") from exc
            if (2 * j).denominator != 1:
                raise InvalidArgumentError(f"spin {value!r} is not a multiple of 1/2")
            return cls(int(2 * j))
        raise InvalidArgumentError(f"cannot interpret {value!r} as a spin quantum number")

    def __str__(self) -> str:
        return str(Fraction(self.two_j, 2))


@dataclass(frozen=True, eq=False)
class SpinOperators:
    """Hermitian spin matrices ``Sx, Sy, Sz`` of one irreducible representation."""

    j: SpinQuantumNumber
    Sx: np.ndarray
    Sy: np.ndarray
    Sz: np.ndarray

    @property
    def dim(self) -> int:
        return self.j.dim

    @property
    def vector(self) -> np.ndarray:
        """Stack ``(3, d, d)`` of ``Sx, Sy, Sz``."""
        return np.stack([self.Sx, self.Sy, self.Sz])

    @property
    def m_values(self) -> np.ndarray:
        """Diagonal of ``Sz``: ``j, j-1, ..., -j``."""
        return np.real(np.diag(self.Sz))

    def dot(self, c) -> np.ndarray:
        """``c1 Sx + c2 Sy + c3 Sz`` for coefficients of shape ``(..., 3)``."""
        return np.einsum("...k,kij->...ij", np.asarray(c, dtype=float), self.vector)


@lru_cache(maxsize=None)
def _ladder(two_j: int):
    j = two_j / 2
    m = j - np.arange(two_j + 1)
    # <m+1|S+|m> sits just above the diagonal in the descending-m ordering
    s_plus = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    return m, s_plus


def build_spin_operators(j) -> SpinOperators:
    """Spin matrices in the ``|j, m>`` basis ordered ``m = j, ..., -j``.

    Parameters
    ----------
    j : SpinQuantumNumber, int or str
        Anything :meth:`SpinQuantumNumber.parse` accepts.
    """
    j = SpinQuantumNumber.parse(j)
    m, s_plus = _ladder(j.two_j)
    s_minus = s_plus.conj().T
    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    sz = np.diag(m).astype(complex)
    for a in (sx, sy, sz):
        a.setflags(write=False)
    return SpinOperators(j, sx, sy, sz)


def hamiltonian_at(field, t, ops: SpinOperators) -> np.ndarray:
    """``H(t) = Bx Sx + By Sy + Bz Sz``; stacked over ``t`` when ``t`` is an array."""
    from .fields import eval_cartesian

    return ops.dot(eval_cartesian(field, t)).astype(complex)


def exp_hermitian(H, s=1.0) -> np.ndarray:
    """``exp(-i s H)`` through the eigendecomposition of ``H``.

    ``H`` may be a stack ``(..., d, d)``; ``s`` broadcasts against the stack.

    Raises
    ------
    InvalidArgumentError
        If ``H`` is not Hermitian within ``1e-12`` (relative to its size).
    """
    H = np.asarray(H)
    if not np.all(np.isfinite(H)):
        raise InvalidArgumentError("Hamiltonian has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
    if np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2))), initial=0.0) > HERMITIAN_TOL * scale:
        raise InvalidArgumentError("exp_hermitian requires a Hermitian matrix")
    evals, evecs = np.linalg.eigh(H)
    s = np.asarray(s, dtype=float)
    phases = np.exp(-1j * s[..., None] * evals)
    return np.einsum("...ik,...k,...jk->...ij", evecs, phases, evecs.conj())


def represent(g, ops: SpinOperators) -> np.ndarray:
    """Image of a group element under the spin-j representation.

    ``g`` is a :class:`~spinlie.su2.GroupElement` or a coordinate array
    ``(..., 4)``. Computed as ``exp(i c . S)`` with ``c`` the principal
    logarithm, so ``-identity`` raises :class:`~spinlie.exceptions.BranchError`.
    """
    x = g.as_array() if isinstance(g, su2.GroupElement) else np.asarray(g, dtype=float)
    c = su2.log_coords(x)
    return exp_hermitian(ops.dot(c), -1.0)


def unitarity_defect(U) -> float:
    """``max |U^dagger U - I|`` over all entries (and over a stack)."""
    U = np.asarray(U)
    d = U.shape[-1]
    return float(np.max(np.abs(np.conj(np.swapaxes(U, -1, -2)) @ U - np.eye(d))))


def basis_state(ops: SpinOperators, index: int = 0) -> np.ndarray:
    psi = np.zeros(ops.dim, dtype=complex)
    psi[index] = 1.0
    return psi
