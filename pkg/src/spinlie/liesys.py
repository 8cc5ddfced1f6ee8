r"""Group equations on SU(2) and the transformation system between them.

Two right-invariant equations

.. math::

    \dot g\, g^{-1} = -\sum_k b_k(t)\, a_k, \qquad
    \dot g'\, g'^{-1} = -\sum_k b'_k(t)\, a_k

are related by a curve ``gbar(t)`` with ``g' = gbar g`` exactly when

.. math::

    \frac{d\bar g}{dt} = -\sum_k b'_k a_k \bar g + \sum_k b_k \bar g a_k ,

which in the coordinates ``(x1, x2, y1, y2)`` is the linear system
``x' = M(t) x`` with antisymmetric ``M`` (see :func:`fsys_matrix`). Its
generators split into two commuting copies of su(2) (left and right
multiplication), and ``I(x) = |x|^2`` is a first integral.

Both integrators here are exponential midpoint schemes, second order and
exactly structure preserving.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import su2
from .exceptions import InvalidArgumentError
from .fields import FieldSpec, Program, as_program, eval_cartesian

__all__ = [
    "GeneratorSet",
    "generator_set",
    "vector_field_bracket",
    "fsys_matrix",
    "expm_fsys",
    "field_curve",
    "AxisZ",
    "FixedDirection",
    "GroupTrajectory",
    "AGammaCurve",
    "TransformedCurve",
    "solve_group_equation",
    "solve_fsys",
    "transform_curve",
]


# --------------------------------------------------------------------------
# generators


def _linear_field(rows) -> np.ndarray:
    """Matrix of a linear vector field from ``{row: {col: coeff}}``, times 1/2."""
    m = np.zeros((4, 4))
    for i, entries in rows.items():
        for j, v in entries.items():
            m[i, j] = 0.5 * v
    return m


# coordinate indices
_X1, _X2, _Y1, _Y2 = range(4)


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Matrices of the six linear vector fields ``N1..N3`` and ``N1'..N3'``.

    ``N[k]`` and ``Np[k]`` act as ``x' = N[k] @ x``. The unprimed ones
    generate right multiplication of ``gbar`` by ``a_k``, the primed ones
    left multiplication by ``-a_k``.
    """

    N: np.ndarray
    Np: np.ndarray

    def all(self) -> np.ndarray:
        return np.concatenate([self.N, self.Np])


def generator_set() -> GeneratorSet:
    N = np.stack(
        [
            _linear_field({_X1: {_Y2: -1}, _X2: {_Y1: -1}, _Y1: {_X2: 1}, _Y2: {_X1: 1}}),
            _linear_field({_X1: {_X2: -1}, _X2: {_X1: 1}, _Y1: {_Y2: -1}, _Y2: {_Y1: 1}}),
            _linear_field({_X1: {_Y1: -1}, _X2: {_Y2: 1}, _Y1: {_X1: 1}, _Y2: {_X2: -1}}),
        ]
    )
    Np = np.stack(
        [
            _linear_field({_X1: {_Y2: 1}, _X2: {_Y1: -1}, _Y1: {_X2: 1}, _Y2: {_X1: -1}}),
            _linear_field({_X1: {_X2: 1}, _X2: {_X1: -1}, _Y1: {_Y2: -1}, _Y2: {_Y1: 1}}),
            _linear_field({_X1: {_Y1: 1}, _X2: {_Y2: 1}, _Y1: {_X1: -1}, _Y2: {_X2: -1}}),
        ]
    )
    N.setflags(write=False)
    Np.setflags(write=False)
    return GeneratorSet(N, Np)


_GENERATORS = generator_set()


def vector_field_bracket(A, B) -> np.ndarray:
    """Lie bracket of the linear vector fields ``x -> A x`` and ``x -> B x``.

    For linear fields the bracket is again linear with matrix ``B A - A B``.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    return B @ A - A @ B


def fsys_matrix(b, bp) -> np.ndarray:
    """Coefficient matrix ``M`` of ``x' = M x`` (global factor 1/2 included).

    Rows are ordered ``x1', x2', y1', y2'``. ``b`` and ``bp`` may carry
    leading batch dimensions ``(..., 3)``.
    """
    b = np.asarray(b, dtype=float)
    bp = np.asarray(bp, dtype=float)
    b1, b2, b3 = np.moveaxis(b, -1, 0)
    p1, p2, p3 = np.moveaxis(bp, -1, 0)
    b1, b2, b3, p1, p2, p3 = np.broadcast_arrays(b1, b2, b3, p1, p2, p3)
    zero = np.zeros_like(b1)
    rows = [
        [zero, p2 - b2, -b3 + p3, -b1 + p1],
        [b2 - p2, zero, -b1 - p1, b3 + p3],
        [b3 - p3, p1 + b1, zero, -b2 - p2],
        [b1 - p1, -b3 - p3, b2 + p2, zero],
    ]
    return 0.5 * np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _exp_half(gens, c, h):
    """``exp(h * sum_k c_k G_k)`` for generators with ``G_j G_k + G_k G_j = -delta_jk / 2``."""
    c = np.asarray(c, dtype=float)
    norm = np.sqrt(np.einsum("...i,...i->...", c, c))
    s = 0.5 * np.asarray(h) * norm
    gen = np.einsum("...k,kij->...ij", c, gens)
    eye = np.eye(4)
    return np.cos(s)[..., None, None] * eye + (np.asarray(h) * np.sinc(s / np.pi))[..., None, None] * gen


def expm_fsys(b, bp, h) -> np.ndarray:
    """Closed-form ``exp(h * fsys_matrix(b, bp))``.

    The matrix is the sum of two commuting parts, each squaring to a negative
    multiple of the identity, so the exponential factorises into two
    ``cos + sinc`` terms. The result is orthogonal up to rounding.
    """
    left = _exp_half(_GENERATORS.Np, bp, h)
    right = _exp_half(_GENERATORS.N, b, h)
    return left @ right


# --------------------------------------------------------------------------
# curves in the algebra


def field_curve(field: FieldSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Coefficients ``(b1, b2, b3) = (Bx, By, Bz)`` of ``a(t) = -sum b_k a_k``."""
    return lambda t: eval_cartesian(field, t)


def _as_curve(b) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(b, FieldSpec):
        return field_curve(b)
    if callable(b):
        return b
    raise InvalidArgumentError("expected a FieldSpec or a callable t -> (..., 3)")


def _as_scalar_fn(D):
    if isinstance(D, (int, float, dict, Program)) and not isinstance(D, bool):
        return as_program(D)
    if callable(D):
        return D
    raise InvalidArgumentError(f"cannot use {D!r} as a scalar function of time")


@dataclass(frozen=True)
class AxisZ:
    """Target ``a'(t) = -D(t) a3``."""

    D: object

    def __post_init__(self):
        object.__setattr__(self, "D", _as_scalar_fn(self.D))

    def coefficients(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = np.asarray(self.D(t), dtype=float) + 0.0 * t
        z = np.zeros_like(d)
        return np.stack([z, z, d], axis=-1)


@dataclass(frozen=True)
class FixedDirection:
    """Target ``a'(t) = -D(t) (c1 a1 + c2 a2 + c3 a3)`` with a unit vector ``c``."""

    direction: tuple
    D: object

    def __post_init__(self):
        c = np.asarray(self.direction, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)) or abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise InvalidArgumentError("direction must be a unit vector (within 1e-12)")
        object.__setattr__(self, "direction", tuple(float(v) for v in c))
        object.__setattr__(self, "D", _as_scalar_fn(self.D))

    def coefficients(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = np.asarray(self.D(t), dtype=float) + 0.0 * t
        return d[..., None] * np.asarray(self.direction)


def _target_curve(target):
    if isinstance(target, (AxisZ, FixedDirection)):
        return target.coefficients
    return _as_curve(target)


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True, eq=False)
class GroupTrajectory:
    """Samples ``coords[n]`` of a curve in SU(2) at ``times[n]``.

    Between samples the curve is interpolated along the geodesic through
    consecutive samples.
    """

    times: np.ndarray
    coords: np.ndarray

    def __len__(self) -> int:
        return self.times.size

    def element(self, n: int) -> su2.GroupElement:
        return su2.GroupElement(*self.coords[n])

    def first_integral(self) -> np.ndarray:
        return np.einsum("ni,ni->n", self.coords, self.coords)

    def matrices(self) -> np.ndarray:
        return su2.to_matrix(self.coords)

    def at(self, t) -> np.ndarray:
        """Coordinates at arbitrary times inside the grid."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise InvalidArgumentError("time outside trajectory range")
        n = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 2)
        s = (t - self.times[n]) / (self.times[n + 1] - self.times[n])
        g0 = su2.normalize_coords(self.coords[n])
        g1 = su2.normalize_coords(self.coords[n + 1])
        step = su2.log_coords(su2.product_coords(g1, su2.inverse_coords(g0)))
        return su2.compose_coords(su2.exp_coords(s[..., None] * step), g0)


def _grid(grid) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise InvalidArgumentError("grid must be a strictly increasing 1-d array with at least two points")
    return t


def _left_products(steps: np.ndarray, g0) -> np.ndarray:
    """``g_{n+1} = steps[n] * g_n`` with per-step renormalisation."""
    out = np.empty((steps.shape[0] + 1, 4))
    x1, x2, y1, y2 = (float(v) for v in g0)
    out[0] = (x1, x2, y1, y2)
    # g = w + i v.sigma with v = (y2, x2, y1); inline product for speed
    for n, (a1, a2, b1, b2) in enumerate(steps.tolist(), start=1):
        w = a1 * x1 - (b2 * y2 + a2 * x2 + b1 * y1)
        vx = a1 * y2 + x1 * b2 - (a2 * y1 - b1 * x2)
        vy = a1 * x2 + x1 * a2 - (b1 * y2 - b2 * y1)
        vz = a1 * y1 + x1 * b1 - (b2 * x2 - a2 * y2)
        norm = math.sqrt(w * w + vx * vx + vy * vy + vz * vz)
        x1, x2, y1, y2 = w / norm, vy / norm, vz / norm, vx / norm
        out[n] = (x1, x2, y1, y2)
    return out


def solve_group_equation(b, grid, g0: su2.GroupElement | None = None) -> GroupTrajectory:
    """Solve ``g' g^-1 = -sum b_k(t) a_k`` with ``g(t0) = g0`` (identity by default).

    Exponential midpoint rule
    ``g_{n+1} = exp(-h b(t_n + h/2) . a) g_n``; second order, and every
    sample lies on SU(2).
    """
    t = _grid(grid)
    curve = _as_curve(b)
    h = np.diff(t)
    mid = t[:-1] + 0.5 * h
    coeff = np.asarray(curve(mid), dtype=float)
    steps = su2.exp_coords(-h[:, None] * coeff)
    start = (su2.IDENTITY if g0 is None else g0).as_array()
    return GroupTrajectory(t, _left_products(steps, start))


def solve_fsys(b, target, g0, grid) -> GroupTrajectory:
    """Integrate the transformation system ``x' = M(b(t), b'(t)) x``.

    Parameters
    ----------
    b : FieldSpec or callable
        Coefficients of the source equation.
    target : AxisZ, FixedDirection, FieldSpec or callable
        Coefficients ``b'`` of the target equation.
    g0 : GroupElement or array_like
        Initial value; must satisfy ``|I(g0) - 1| < 1e-12``.
    grid : array_like
        Strictly increasing times.

    Notes
    -----
    Each step multiplies by the exact exponential of the antisymmetric
    midpoint matrix. The samples are *not* renormalised, so ``I(x(t))``
    along the result measures how well the scheme keeps the first integral.
    """
    t = _grid(grid)
    x0 = g0.as_array() if isinstance(g0, su2.GroupElement) else np.asarray(g0, dtype=float).reshape(4)
    if not np.all(np.isfinite(x0)) or abs(float(x0 @ x0) - 1.0) >= 1e-12:
        raise InvalidArgumentError("initial value must satisfy I(x0) = 1 within 1e-12")
    b_fn = _as_curve(b)
    bp_fn = _target_curve(target)
    h = np.diff(t)
    mid = t[:-1] + 0.5 * h
    E = expm_fsys(b_fn(mid), bp_fn(mid), h)
    out = np.empty((t.size, 4))
    out[0] = x0
    x = x0.tolist()
    for n, m in enumerate(E.tolist(), start=1):
        x = [m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2] + m[i][3] * x[3] for i in range(4)]
        out[n] = x
    return GroupTrajectory(t, out)


# --------------------------------------------------------------------------
# curve transformation


@dataclass(frozen=True)
class AGammaCurve:
    """Analytic curve ``t -> A_gamma(phi(t)) = exp(gamma sin(phi) a1 - gamma cos(phi) a2)``."""

    gamma: float
    phi: Callable
    phi_dot: Callable

    def __post_init__(self):
        if abs(math.sin(0.5 * self.gamma)) < 1e-12:
            raise InvalidArgumentError("gamma must not be a multiple of 2*pi")

    def coords(self, t) -> np.ndarray:
        return su2.a_gamma_coords(self.gamma, self.phi(np.asarray(t, dtype=float)))

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        phi = np.asarray(self.phi(t), dtype=float)
        pd = np.asarray(self.phi_dot(t), dtype=float)
        s = math.sin(0.5 * self.gamma)
        z = np.zeros_like(phi + pd)
        return np.stack([z, s * np.sin(phi) * pd, z, s * np.cos(phi) * pd], axis=-1)

    def element(self, t: float) -> su2.GroupElement:
        return su2.GroupElement(*self.coords(float(t)))


@dataclass(frozen=True, eq=False)
class TransformedCurve:
    """Coefficients ``b'`` of the transformed equation on a grid.

    ``derivative`` records whether ``d gbar/dt`` was taken analytically or by
    finite differences (accuracy ``O(h^2)`` in the latter case).
    """

    times: np.ndarray
    coefficients: np.ndarray
    derivative: str

    @property
    def warning(self) -> str | None:
        if self.derivative == "numeric":
            return "d gbar/dt from central finite differences; coefficients are O(h^2) accurate"
        return None


def transform_curve(b, gbar, grid) -> TransformedCurve:
    """Coefficients of ``Ad(gbar)(-b . a) + gbar' gbar^-1`` written as ``-b' . a``.

    ``gbar`` is either a :class:`GroupTrajectory` sampled on ``grid`` (its
    derivative is then taken by central differences) or any object with
    ``coords(t)`` and ``derivative(t)`` methods, such as :class:`AGammaCurve`.
    """
    t = _grid(grid)
    b_vals = np.asarray(_as_curve(b)(t), dtype=float)
    if isinstance(gbar, GroupTrajectory):
        if gbar.times.shape != t.shape or not np.allclose(gbar.times, t, rtol=0, atol=1e-12):
            raise InvalidArgumentError("trajectory must be sampled on the requested grid")
        g = gbar.coords
        gdot = np.gradient(g, t, axis=0, edge_order=2)
        kind = "numeric"
    else:
        g = np.asarray(gbar.coords(t), dtype=float)
        gdot = np.asarray(gbar.derivative(t), dtype=float)
        kind = "analytic"
    G = su2.to_matrix(g)
    Ginv = np.conj(np.swapaxes(G, -1, -2))
    X = -G @ su2.algebra_matrix(b_vals) @ Ginv + su2.to_matrix(gdot) @ Ginv
    return TransformedCurve(t, -su2.project_algebra(X), kind)
