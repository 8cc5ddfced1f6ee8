r"""Arithmetic on SU(2) and su(2) in real coordinates.

Group elements are stored as the real 4-vector ``(x1, x2, y1, y2)`` of the
matrix

.. math::

    g = \begin{pmatrix} a & b \\ -b^* & a^* \end{pmatrix},
    \qquad a = x_1 + i y_1,\quad b = x_2 + i y_2 .

Algebra elements are coefficient 3-vectors ``c`` of ``c1*a1 + c2*a2 + c3*a3``
with ``a_k = i*sigma_k/2``, so that ``[a_j, a_k] = -eps_jkl a_l``.

Writing ``g = w*I + i*(v . sigma)`` with ``w = x1`` and ``v = (y2, x2, y1)``
turns every operation into a short quaternion-style formula. The ``*_coords``
functions work on arrays of shape ``(..., 4)`` / ``(..., 3)`` and are what the
integrators use; the dataclass wrappers are the single-element API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import BranchError, ConsistencyError, InvalidArgumentError

__all__ = [
    "AlgebraVector",
    "GroupElement",
    "AGammaElement",
    "BASIS",
    "IDENTITY",
    "exp_algebra",
    "log_principal",
    "compose",
    "inverse",
    "bracket",
    "adjoint",
    "exp_coords",
    "log_coords",
    "compose_coords",
    "inverse_coords",
    "adjoint_coords",
    "product_coords",
    "to_matrix",
    "from_matrix",
    "project_algebra",
    "algebra_matrix",
    "normalize_coords",
    "a_gamma_coords",
]

NORM_TOL = 1e-12
DRIFT_LIMIT = 1e-6
LOG_BRANCH_TOL = 1e-12

#: The basis a1, a2, a3 as explicit 2x2 skew-Hermitian matrices.
BASIS = np.array(
    [
        [[0, 0.5j], [0.5j, 0]],
        [[0, 0.5], [-0.5, 0]],
        [[0.5j, 0], [0, -0.5j]],
    ],
    dtype=complex,
)
BASIS.setflags(write=False)


def _split(x):
    x = np.asarray(x, dtype=float)
    w = x[..., 0]
    v = np.stack([x[..., 3], x[..., 1], x[..., 2]], axis=-1)
    return w, v


def _join(w, v):
    return np.stack([w, v[..., 1], v[..., 2], v[..., 0]], axis=-1)


def product_coords(p, q):
    """Bilinear matrix product of two coordinate arrays, without renormalising.

    Works for any real 4-vectors (not only unit ones), which makes it usable
    for derivatives such as ``dg/dt * g^-1``.
    """
    w1, v1 = _split(p)
    w2, v2 = _split(q)
    w = w1 * w2 - np.einsum("...i,...i->...", v1, v2)
    v = w1[..., None] * v2 + w2[..., None] * v1 - np.cross(v1, v2)
    return _join(w, v)


def normalize_coords(x):
    """Rescale coordinates to unit norm.

    Drift below ``NORM_TOL`` is left alone, drift up to ``DRIFT_LIMIT`` is
    absorbed, and anything larger raises :class:`ConsistencyError`.
    """
    x = np.asarray(x, dtype=float)
    norm = np.sqrt(np.einsum("...i,...i->...", x, x))
    drift = np.abs(norm - 1.0)
    if np.any(~np.isfinite(norm)) or np.any(drift > DRIFT_LIMIT):
        raise ConsistencyError(f"SU(2) coordinates drifted from unit norm by {np.max(drift):.3e}")
    if np.all(drift <= NORM_TOL):
        return x
    return x / norm[..., None]


def exp_coords(c):
    """Exponential of algebra coefficients ``(..., 3)`` -> coordinates ``(..., 4)``."""
    c = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c)):
        raise InvalidArgumentError("algebra coefficients must be finite")
    delta = np.sqrt(np.einsum("...i,...i->...", c, c))
    # sin(delta/2)/delta, finite at delta = 0
    k = 0.5 * np.sinc(delta / (2.0 * np.pi))
    return _join(np.cos(0.5 * delta), k[..., None] * c)


def log_coords(x):
    """Principal logarithm, rotation angle in ``[0, 2*pi)``.

    Raises :class:`BranchError` at (or within 1e-12 of) ``-identity``.
    """
    w, v = _split(x)
    if np.any(w <= -1.0 + LOG_BRANCH_TOL):
        raise BranchError("principal logarithm undefined at -identity; choose an axis explicitly")
    n = np.sqrt(np.einsum("...i,...i->...", v, v))
    delta = 2.0 * np.arctan2(n, w)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(n > 0.0, delta / np.where(n > 0.0, n, 1.0), 2.0)
    return scale[..., None] * v


def compose_coords(p, q):
    """Group product ``p * q`` of unit coordinate arrays."""
    return normalize_coords(product_coords(p, q))


def inverse_coords(x):
    x = np.asarray(x, dtype=float)
    return x * np.array([1.0, -1.0, -1.0, -1.0])


def adjoint_coords(x, c):
    """Coefficients of ``g (c . a) g^-1``; a rotation of ``c``."""
    w, v = _split(x)
    c = np.asarray(c, dtype=float)
    vv = np.einsum("...i,...i->...", v, v)
    vc = np.einsum("...i,...i->...", v, c)
    return (
        (w * w - vv)[..., None] * c
        + 2.0 * vc[..., None] * v
        - 2.0 * w[..., None] * np.cross(v, c)
    )


def to_matrix(x) -> np.ndarray:
    """The 2x2 complex matrix ``[[a, b], [-b*, a*]]`` (stacked for ``(..., 4)`` input)."""
    x = np.asarray(x, dtype=float)
    a = x[..., 0] + 1j * x[..., 2]
    b = x[..., 1] + 1j * x[..., 3]
    row0 = np.stack([a, b], axis=-1)
    row1 = np.stack([-np.conj(b), np.conj(a)], axis=-1)
    return np.stack([row0, row1], axis=-2)


def from_matrix(m) -> np.ndarray:
    """Read coordinates off the first row of a 2x2 matrix of the SU(2) form."""
    m = np.asarray(m)
    return np.stack([m[..., 0, 0].real, m[..., 0, 1].real, m[..., 0, 0].imag, m[..., 0, 1].imag], axis=-1)


def algebra_matrix(c) -> np.ndarray:
    """``c1*a1 + c2*a2 + c3*a3`` as a 2x2 matrix."""
    return np.einsum("...k,kij->...ij", np.asarray(c, dtype=float), BASIS)


def project_algebra(m) -> np.ndarray:
    """Coefficients of a traceless skew-Hermitian 2x2 matrix in the a-basis.

    Uses ``Tr(a_j a_k) = -delta_jk / 2``, i.e. ``c_k = -2 Tr(a_k X)``.
    """
    return -2.0 * np.einsum("kij,...ji->...k", BASIS, np.asarray(m)).real


@dataclass(frozen=True)
class AlgebraVector:
    """Element ``c1*a1 + c2*a2 + c3*a3`` of su(2)."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.c1, self.c2, self.c3)):
            raise InvalidArgumentError("AlgebraVector components must be finite")

    @classmethod
    def from_array(cls, c) -> "AlgebraVector":
        c1, c2, c3 = (float(v) for v in np.asarray(c, dtype=float).reshape(3))
        return cls(c1, c2, c3)

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    def norm(self) -> float:
        return math.sqrt(self.c1**2 + self.c2**2 + self.c3**2)

    def matrix(self) -> np.ndarray:
        return algebra_matrix(self.as_array())

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector.from_array(self.as_array() + other.as_array())

    def __sub__(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector.from_array(self.as_array() - other.as_array())

    def __mul__(self, s: float) -> "AlgebraVector":
        return AlgebraVector.from_array(float(s) * self.as_array())

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraVector":
        return AlgebraVector.from_array(-self.as_array())


@dataclass(frozen=True)
class GroupElement:
    """Element of SU(2) in coordinates ``(x1, x2, y1, y2)``.

    Construction renormalises small rounding drift; a vector further than
    ``1e-6`` from the unit sphere is rejected. Use :meth:`from_vector` with
    ``normalize=True`` to project an arbitrary non-zero vector.
    """

    x1: float
    x2: float
    y1: float
    y2: float

    def __post_init__(self):
        x = normalize_coords(np.array([self.x1, self.x2, self.y1, self.y2], dtype=float))
        for name, value in zip(("x1", "x2", "y1", "y2"), x):
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_vector(cls, x, normalize: bool = False) -> "GroupElement":
        x = np.asarray(x, dtype=float).reshape(4)
        if normalize:
            n = np.linalg.norm(x)
            if not np.isfinite(n) or n == 0.0:
                raise InvalidArgumentError("cannot normalise a zero or non-finite vector")
            x = x / n
        return cls(*(float(v) for v in x))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.y1, self.y2])

    def matrix(self) -> np.ndarray:
        return to_matrix(self.as_array())

    def first_integral(self) -> float:
        return self.x1**2 + self.x2**2 + self.y1**2 + self.y2**2

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)


IDENTITY = GroupElement.identity()


@dataclass(frozen=True)
class AGammaElement:
    """Point of the one-parameter set ``A_gamma`` with fixed angle ``gamma`` and phase ``b``.

    ``gamma`` may not be a multiple of ``2*pi`` (there the set collapses to a
    single point). The phase is reduced to ``[0, 2*pi)``.
    """

    gamma: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.b)):
            raise InvalidArgumentError("gamma and b must be finite")
        if abs(math.sin(0.5 * self.gamma)) < 1e-12:
            raise InvalidArgumentError(f"gamma = {self.gamma!r} is a multiple of 2*pi")
        object.__setattr__(self, "b", float(self.b) % (2.0 * math.pi))

    def to_group(self) -> GroupElement:
        return GroupElement(*a_gamma_coords(self.gamma, self.b))

    def generator(self) -> AlgebraVector:
        """The algebra element whose exponential is this point."""
        return AlgebraVector(self.gamma * math.sin(self.b), -self.gamma * math.cos(self.b), 0.0)


def a_gamma_coords(gamma, b) -> np.ndarray:
    """Coordinates of ``A_gamma(b)``; vectorised over ``b``."""
    b = np.asarray(b, dtype=float)
    s = math.sin(0.5 * gamma)
    return np.stack(
        np.broadcast_arrays(math.cos(0.5 * gamma), -s * np.cos(b), 0.0, s * np.sin(b)),
        axis=-1,
    ).astype(float)


def exp_algebra(c: AlgebraVector) -> GroupElement:
    """Matrix exponential of an algebra element."""
    return GroupElement(*exp_coords(_coeffs(c)))


def log_principal(g: GroupElement) -> AlgebraVector:
    """Principal logarithm with rotation angle ``|c|`` in ``[0, 2*pi)``.

    Raises
    ------
    BranchError
        If ``g`` is (numerically) ``-identity``.
    """
    return AlgebraVector.from_array(log_coords(g.as_array()))


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    return GroupElement(*compose_coords(g1.as_array(), g2.as_array()))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(*inverse_coords(g.as_array()))


def bracket(c: AlgebraVector, d: AlgebraVector) -> AlgebraVector:
    """Lie bracket; with this basis it is minus the cross product."""
    return AlgebraVector.from_array(-np.cross(_coeffs(c), _coeffs(d)))


def adjoint(g: GroupElement, c: AlgebraVector) -> AlgebraVector:
    """``Ad(g) c``, the coefficients of ``g (c . a) g^-1``."""
    return AlgebraVector.from_array(adjoint_coords(g.as_array(), _coeffs(c)))


def _coeffs(c) -> np.ndarray:
    if isinstance(c, AlgebraVector):
        return c.as_array()
    return np.asarray(c, dtype=float).reshape(3)
