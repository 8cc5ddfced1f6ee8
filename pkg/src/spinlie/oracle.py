"""Reference integrators for ``dpsi/dt = -i H(t) psi`` and comparison metrics.

Two independent fixed-step schemes:

* ``rk4`` -- classical fourth-order Runge-Kutta on the complex coordinates,
  norm not enforced;
* ``unitary_midpoint`` -- ``U_{n+1} = exp(-i h H(t_n + h/2)) U_n``, exactly
  unitary, second order.

Both accept an initial state (state mode) or none (operator mode, ``U(0) = I``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .fields import FieldSpec, eval_cartesian
from .spinrep import SpinOperators, build_spin_operators, exp_hermitian

__all__ = [
    "PropagationResult",
    "ComparisonMetrics",
    "rk4_propagate",
    "unitary_midpoint_propagate",
    "compare",
    "observed_orders",
    "flow_commutator_defect",
]

CHUNK = 4096


@dataclass(frozen=True, eq=False)
class PropagationResult:
    """Samples of a propagation on ``times``.

    ``values`` has shape ``(n, d)`` in state mode and ``(n, d, d)`` in
    operator mode. ``norm_drift`` is ``max | |psi| - 1 |`` (states) or the
    unitarity defect (operators).
    """

    times: np.ndarray
    values: np.ndarray
    scheme: str
    step: float
    norm_drift: float

    @property
    def operator_mode(self) -> bool:
        return self.values.ndim == 3

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


@dataclass(frozen=True)
class ComparisonMetrics:
    max_state_error: float
    infidelity: float
    max_operator_error: float
    unitarity_defect: float

    def as_dict(self) -> dict:
        return {
            "max_state_error": self.max_state_error,
            "infidelity": self.infidelity,
            "max_operator_error": self.max_operator_error,
            "unitarity_defect": self.unitarity_defect,
        }


def _setup(field, j, initial, grid):
    ops = j if isinstance(j, SpinOperators) else build_spin_operators(j)
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise InvalidArgumentError("grid must be strictly increasing with at least two points")
    d = ops.dim
    if initial is None:
        y0 = np.eye(d, dtype=complex)
    else:
        y0 = np.asarray(initial, dtype=complex).reshape(d)
        if abs(np.linalg.norm(y0) - 1.0) > 1e-10:
            raise InvalidArgumentError("initial state must be normalised")
        y0 = y0[:, None]
    return ops, t, y0


def _generator(field: FieldSpec, ops: SpinOperators, t) -> np.ndarray:
    """Stack of ``-i H(t)``."""
    b = eval_cartesian(field, t)
    if not np.all(np.isfinite(b)):
        raise InvalidArgumentError("field is not finite; propagation aborted")
    return -1j * ops.dot(b)


def _drift(values, operator: bool) -> float:
    if operator:
        d = values.shape[-1]
        prod = np.conj(np.swapaxes(values, -1, -2)) @ values
        return float(np.max(np.abs(prod - np.eye(d))))
    return float(np.max(np.abs(np.linalg.norm(values, axis=-1) - 1.0)))


def _chain(step_matrices_fn, y0, count):
    """Apply ``count`` step matrices, produced chunk by chunk, to ``y0``."""
    out = np.empty((count + 1,) + y0.shape, dtype=complex)
    out[0] = y0
    y = y0
    for start in range(0, count, CHUNK):
        stop = min(start + CHUNK, count)
        P = step_matrices_fn(start, stop)
        for k in range(stop - start):
            y = P[k] @ y
            out[start + k + 1] = y
    return out


def rk4_propagate(field: FieldSpec, j, initial, grid) -> PropagationResult:
    """Classical RK4. ``initial=None`` propagates the identity."""
    ops, t, y0 = _setup(field, j, initial, grid)
    h = np.diff(t)
    eye = np.eye(ops.dim)

    def steps(a, b):
        hh = h[a:b, None, None]
        A1 = _generator(field, ops, t[a:b])
        A2 = _generator(field, ops, t[a:b] + 0.5 * h[a:b])
        A3 = _generator(field, ops, t[a + 1 : b + 1])
        # stage maps K_i with k_i = K_i y for the linear system y' = A(t) y
        K1 = A1
        K2 = A2 @ (eye + 0.5 * hh * K1)
        K3 = A2 @ (eye + 0.5 * hh * K2)
        K4 = A3 @ (eye + hh * K3)
        return eye + hh / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4)

    out = _chain(steps, y0, h.size)
    values = out if initial is None else out[..., 0]
    return PropagationResult(t, values, "rk4", float(np.max(h)), _drift(values, initial is None))


def unitary_midpoint_propagate(field: FieldSpec, j, grid, initial=None) -> PropagationResult:
    """Exponential midpoint rule; every sample is unitary up to rounding."""
    ops, t, y0 = _setup(field, j, initial, grid)
    h = np.diff(t)

    def steps(a, b):
        mid = t[a:b] + 0.5 * h[a:b]
        H = ops.dot(eval_cartesian(field, mid)).astype(complex)
        return exp_hermitian(H, h[a:b])

    out = _chain(steps, y0, h.size)
    values = out if initial is None else out[..., 0]
    return PropagationResult(t, values, "unitary_midpoint", float(np.max(h)), _drift(values, initial is None))


def compare(a: PropagationResult, b: PropagationResult) -> ComparisonMetrics:
    """Metrics between two propagations on the same grid.

    The infidelity ``1 - |<a|b>| / (|a| |b|)`` is phase-blind and blind to
    norm errors, which ``unitarity_defect`` reports instead (the larger norm
    drift of the two inputs). In operator mode the state metrics use the
    first basis state and the infidelity is also maximised with the
    normalised trace overlap ``1 - |Tr(Ua^dagger Ub)| / (||Ua|| ||Ub||)``.
    """
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise InvalidArgumentError("results live on different grids")
    if a.values.shape[-1] != b.values.shape[-1]:
        raise InvalidArgumentError("results have different dimensions")

    def states(r):
        return r.values[..., 0] if r.operator_mode else r.values

    sa, sb = states(a), states(b)
    max_state = float(np.max(np.linalg.norm(sa - sb, axis=-1)))
    overlap = np.abs(np.einsum("ni,ni->n", np.conj(sa), sb))
    overlap /= np.linalg.norm(sa, axis=-1) * np.linalg.norm(sb, axis=-1)
    infid = float(np.max(np.clip(1.0 - overlap, 0.0, None)))
    op_err = 0.0
    if a.operator_mode and b.operator_mode:
        op_err = float(np.max(np.abs(a.values - b.values)))
        tr = np.abs(np.einsum("nij,nij->n", np.conj(a.values), b.values))
        tr /= np.linalg.norm(a.values, axis=(-2, -1)) * np.linalg.norm(b.values, axis=(-2, -1))
        infid = max(infid, float(np.max(np.clip(1.0 - tr, 0.0, None))))
    defect = max(_drift(a.values, a.operator_mode), _drift(b.values, b.operator_mode))
    return ComparisonMetrics(max_state, infid, op_err, defect)


def observed_orders(errors) -> np.ndarray:
    """``log2`` of successive error ratios for a sequence of step halvings."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


def flow_commutator_defect(A, B, t: float) -> float:
    """Error of the second-difference estimate of the flow commutator.

    For Hermitian ``A``, ``B`` the four-flow composition
    ``C(t) = exp(-t Bs) exp(-t As) exp(t Bs) exp(t As)`` with skew generators
    ``As = -iA``, ``Bs = -iB`` satisfies ``C''(0) = 2 [Bs, As]``. Returns
    ``max |(C(t) + C(-t) - 2I)/t^2 - 2 [Bs, As]|``, which is ``O(t^2)``.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    As, Bs = -1j * A, -1j * B

    def flow(X, s):
        # exp(s X) for skew X = -i H is exp(-i s H)
        return exp_hermitian(1j * X, s)

    def C(s):
        return flow(Bs, -s) @ flow(As, -s) @ flow(Bs, s) @ flow(As, s)

    d = A.shape[-1]
    second = (C(t) + C(-t) - 2.0 * np.eye(d)) / (t * t)
    target = 2.0 * (Bs @ As - As @ Bs)
    return float(np.max(np.abs(second - target)))

